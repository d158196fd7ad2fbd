//! Two-sided isoperimetric ratios over the circle candidates, their
//! global minimisation, and the hypothesis checks built on them.
//!
//! With `P` the boundary area of a separating sphere and `v1, v2` the
//! volumes of the two sides,
//!
//! * `ratio_of_split(P, v1, v2, 1) = P (1/v1 + 1/v2)` (the `C`/`D` ratios),
//! * `ratio_of_split(P, v1, v2, n+1) = P^{n+1} (1/v1 + 1/v2)^n` (`I`/`J`).
//!
//! Every candidate here is a smooth, embedded, separating sphere, so the
//! sharp and tilde variants coincide with the plain ones at candidate level.

use rayon::prelude::*;
use thiserror::Error;

use crate::numerics::{minimize_1d, Interval};
use crate::profile::{liminf_profile_ratio, profile, CandidateKind, CandidateRegion, LiminfEstimate, ProfileError};
use crate::warped_geometry::{GeometryError, SurfaceOfRevolution};

/// Fraction of the total volume excluded at each end of the search.
pub const ENDPOINT_EPSILON: f64 = 1e-6;
pub const SEARCH_GRID: usize = 1024;
const REFINE_GRID: usize = 64;
/// Constants at or below this are treated as zero.
pub const POSITIVITY_THRESHOLD: f64 = 1e-8;
const CHAIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RatioError {
    #[error("ratio arguments must be positive (P={perimeter}, v1={v1}, v2={v2}, p={p})")]
    Domain { perimeter: f64, v1: f64, v2: f64, p: f64 },
    #[error("minimum at the edge of the search (V = {volume:e}, value {value:e}) and still decreasing")]
    BoundaryMinimum { volume: f64, value: f64 },
    #[error("ordering violated at V = {volume}: {detail}")]
    OrderingViolated { volume: f64, detail: String },
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

impl From<GeometryError> for RatioError {
    fn from(e: GeometryError) -> Self {
        RatioError::Profile(e.into())
    }
}

/// `P^p (1/v1 + 1/v2)^{max(p-1, 1)}`: `P (1/v1 + 1/v2)` at `p = 1` and
/// `P^{n+1} (1/v1 + 1/v2)^n` at `p = n + 1`.
pub fn ratio_of_split(perimeter: f64, v1: f64, v2: f64, p: f64) -> Result<f64, RatioError> {
    let ok = perimeter > 0.0 && v1 > 0.0 && v2 > 0.0 && p >= 1.0;
    if !ok || !(perimeter.is_finite() && v1.is_finite() && v2.is_finite() && p.is_finite()) {
        return Err(RatioError::Domain { perimeter, v1, v2, p });
    }
    let harmonic = 1.0 / v1 + 1.0 / v2;
    Ok(if p == 1.0 {
        perimeter * harmonic
    } else {
        perimeter.powf(p) * harmonic.powf((p - 1.0).max(1.0))
    })
}

/// The starred exponent `n + 1`.
pub fn star_exponent(surface: &SurfaceOfRevolution) -> f64 {
    surface.n() as f64 + 1.0
}

/// `I(V) (1/V + 1/(A - V))`.
pub fn iflat(surface: &SurfaceOfRevolution, v: f64) -> Result<f64, RatioError> {
    let p = profile(surface, v)?;
    ratio_of_split(p.value, v, surface.total_volume() - v, 1.0)
}

/// `I(V)^{n+1} (1/V + 1/(A - V))^n`.
pub fn istar(surface: &SurfaceOfRevolution, v: f64) -> Result<f64, RatioError> {
    let p = profile(surface, v)?;
    ratio_of_split(p.value, v, surface.total_volume() - v, star_exponent(surface))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioCurvePoint {
    pub volume: f64,
    pub iflat: f64,
    pub istar: f64,
    /// Sharp ratio over smooth separating candidates.
    pub isharp_cand: f64,
    /// Tilde-starred ratio over smooth separating candidates.
    pub istar_tilde_cand: f64,
    pub best: CandidateRegion,
}

pub fn ratio_curve_point(surface: &SurfaceOfRevolution, v: f64) -> Result<RatioCurvePoint, RatioError> {
    let p = profile(surface, v)?;
    let rest = surface.total_volume() - v;
    let flat = ratio_of_split(p.value, v, rest, 1.0)?;
    let star = ratio_of_split(p.value, v, rest, star_exponent(surface))?;
    Ok(RatioCurvePoint {
        volume: v,
        iflat: flat,
        istar: star,
        isharp_cand: flat,
        istar_tilde_cand: star,
        best: p.best,
    })
}

pub fn ratio_curve(surface: &SurfaceOfRevolution, grid: &[f64]) -> Result<Vec<RatioCurvePoint>, RatioError> {
    grid.par_iter().map(|&v| ratio_curve_point(surface, v)).collect()
}

/// Which half of `]0, A[` the minimiser searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchHalf {
    /// `]eps A, A/2]`.
    Lower,
    /// `[A/2, (1 - eps) A[`.
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizerCertificate {
    pub volume: f64,
    pub value: f64,
    /// Radius of the boundary sphere.
    pub radius: f64,
    pub best: CandidateRegion,
    /// `min(V0, A - V0)`.
    pub interior_margin: f64,
    pub exponent: f64,
}

/// Ratio along one candidate family, parametrised by the boundary radius.
fn family_ratio(surface: &SurfaceOfRevolution, complement: bool, t: f64, p: f64) -> Result<(f64, f64), RatioError> {
    let a = surface.total_volume();
    let v = if complement {
        surface.tail_volume(t)?
    } else {
        surface.disk_volume(t)?
    };
    Ok((v, ratio_of_split(surface.sphere_area(t), v, a - v, p)?))
}

/// Global minimum of `ratio_of_split(I(V), V, A - V, p)`.
///
/// A log-spaced grid of [`SEARCH_GRID`] volumes covers `]eps A, A/2]`; the
/// best grid cell is then refined by golden-section search in the boundary
/// radius of the winning candidate family. The ratio is symmetric under
/// `V -> A - V`, so the upper half is the mirror image of the lower one.
pub fn minimize_ratio(
    surface: &SurfaceOfRevolution,
    p: f64,
    half: SearchHalf,
) -> Result<MinimizerCertificate, RatioError> {
    let a = surface.total_volume();
    let lo = (ENDPOINT_EPSILON * a).ln();
    let hi = (0.5 * a).ln();
    let grid: Vec<f64> = (0..SEARCH_GRID)
        .map(|i| {
            if i + 1 == SEARCH_GRID {
                0.5 * a
            } else {
                (lo + (hi - lo) * i as f64 / (SEARCH_GRID - 1) as f64).exp()
            }
        })
        .collect();
    let values: Vec<(f64, CandidateRegion)> = grid
        .par_iter()
        .map(|&w| {
            let pt = profile(surface, w)?;
            Ok((ratio_of_split(pt.value, w, a - w, p)?, pt.best))
        })
        .collect::<Result<_, RatioError>>()?;

    let mut best_i = 0;
    for i in 1..values.len() {
        if values[i].0 < values[best_i].0 {
            best_i = i;
        }
    }
    if best_i <= 2 && values[0].0 <= values[1].0 && values[1].0 <= values[2].0 {
        let volume = match half {
            SearchHalf::Lower => grid[best_i],
            SearchHalf::Upper => a - grid[best_i],
        };
        return Err(RatioError::BoundaryMinimum {
            volume,
            value: values[best_i].0,
        });
    }

    let (grid_value, grid_best) = values[best_i];
    let complement = matches!(grid_best.kind, CandidateKind::Complement { .. });
    let neighbour = |i: usize| -> Result<f64, RatioError> {
        let w = grid[i];
        Ok(if complement {
            surface.radius_of_tail_volume(w)?
        } else {
            surface.radius_of_disk_volume(w)?
        })
    };
    let r_a = neighbour(best_i.saturating_sub(1))?;
    let r_b = neighbour((best_i + 1).min(grid.len() - 1))?;
    let (t_lo, t_hi) = (r_a.min(r_b), r_a.max(r_b));
    let t_grid = grid_best.radius().expect("profile candidates have one boundary sphere");

    let mut t0 = t_grid;
    let mut value = grid_value;
    if t_hi > t_lo {
        let objective = |t: f64| match family_ratio(surface, complement, t, p) {
            // stay on the small side so the mirror argument applies
            Ok((v, r)) if v <= 0.5 * a => r,
            _ => f64::INFINITY,
        };
        let m = minimize_1d(
            objective,
            Interval::new(t_lo, t_hi).map_err(GeometryError::from)?,
            REFINE_GRID,
            surface.tolerances().minimize,
        )
        .map_err(GeometryError::from)?;
        if m.value < value {
            t0 = m.argmin;
            value = m.value;
        }
    }
    let w0 = if t0 == t_grid {
        grid_best.volume
    } else {
        family_ratio(surface, complement, t0, p)?.0
    };
    let kind_lower = if complement {
        CandidateKind::Complement { t: t0 }
    } else {
        CandidateKind::Disk { t: t0 }
    };
    // mirroring swaps the region with its complement
    let (volume, kind) = match half {
        SearchHalf::Lower => (w0, kind_lower),
        SearchHalf::Upper => (
            a - w0,
            if complement {
                CandidateKind::Disk { t: t0 }
            } else {
                CandidateKind::Complement { t: t0 }
            },
        ),
    };
    Ok(MinimizerCertificate {
        volume,
        value,
        radius: t0,
        best: CandidateRegion {
            kind,
            volume,
            perimeter: surface.sphere_area(t0),
        },
        interior_margin: w0.min(a - w0),
        exponent: p,
    })
}

pub fn minimize_iflat(surface: &SurfaceOfRevolution) -> Result<MinimizerCertificate, RatioError> {
    minimize_ratio(surface, 1.0, SearchHalf::Lower)
}

pub fn minimize_istar(surface: &SurfaceOfRevolution) -> Result<MinimizerCertificate, RatioError> {
    minimize_ratio(surface, star_exponent(surface), SearchHalf::Lower)
}

/// Candidate-level constants at a minimiser.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioConstants {
    /// Minimum of the volume-parametrised ratio.
    pub minimum: f64,
    /// Hypersurface ratio of the minimising sphere, `C` (or `I`).
    pub c: f64,
    /// Same ratio read as `D` (or `J`).
    pub d: f64,
    /// Sharp (or tilde-starred) candidate ratio re-evaluated from the profile.
    pub sharp: f64,
}

impl RatioConstants {
    /// Largest relative spread among the four values.
    pub fn spread(&self) -> f64 {
        let vals = [self.minimum, self.c, self.d, self.sharp];
        let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        (max - min) / min.abs()
    }

    pub fn chain_holds(&self) -> bool {
        self.spread() <= CHAIN_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub exponent: f64,
    /// Small-volume constant (`C1` for the flat ratio, `C2` for the starred one).
    pub limit: LiminfEstimate,
    pub cond_i_holds: bool,
    /// Minimum found, or the boundary value when the search ran into an end.
    pub inf_value: f64,
    pub cond_ii_holds: bool,
    pub certificate: Option<MinimizerCertificate>,
    pub boundary_minimum: Option<(f64, f64)>,
    pub constants: Option<RatioConstants>,
}

impl HypothesisReport {
    pub fn hypotheses_hold(&self) -> bool {
        self.cond_i_holds && self.cond_ii_holds
    }
}

fn constants_at(surface: &SurfaceOfRevolution, cert: &MinimizerCertificate) -> Result<RatioConstants, RatioError> {
    let a = surface.total_volume();
    let c = ratio_of_split(cert.best.perimeter, cert.volume, a - cert.volume, cert.exponent)?;
    let sharp = {
        let pt = profile(surface, cert.volume)?;
        ratio_of_split(pt.value, cert.volume, a - cert.volume, cert.exponent)?
    };
    Ok(RatioConstants {
        minimum: cert.value,
        c,
        d: c,
        sharp,
    })
}

fn check_theorem(surface: &SurfaceOfRevolution, p: f64) -> Result<HypothesisReport, RatioError> {
    let limit = liminf_profile_ratio(surface, p)?;
    let cond_i_holds = limit.value > POSITIVITY_THRESHOLD;
    let (certificate, boundary_minimum, inf_value) = match minimize_ratio(surface, p, SearchHalf::Lower) {
        Ok(c) => (Some(c), None, c.value),
        Err(RatioError::BoundaryMinimum { volume, value }) => (None, Some((volume, value)), value),
        Err(e) => return Err(e),
    };
    let cond_ii_holds = certificate.is_some() && inf_value < limit.value;
    let constants = match &certificate {
        Some(c) => Some(constants_at(surface, c)?),
        None => None,
    };
    Ok(HypothesisReport {
        exponent: p,
        limit,
        cond_i_holds,
        inf_value,
        cond_ii_holds,
        certificate,
        boundary_minimum,
        constants,
    })
}

/// Small-volume positivity and the strict gap below it for the flat ratio.
pub fn check_theorem_ste4(surface: &SurfaceOfRevolution) -> Result<HypothesisReport, RatioError> {
    check_theorem(surface, 1.0)
}

/// The same pipeline for the starred ratio with exponent `n + 1`.
pub fn check_theorem_ste5(surface: &SurfaceOfRevolution) -> Result<HypothesisReport, RatioError> {
    check_theorem(surface, star_exponent(surface))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderingReport {
    pub points: Vec<RatioCurvePoint>,
    /// `max(iflat - isharp_cand)`, expected to be at most zero.
    pub sharp_slack: f64,
    /// `max(istar - istar_tilde_cand)`, expected to be at most zero.
    pub star_slack: f64,
    /// `min(istar)` over the grid, with its volume.
    pub min_istar: (f64, f64),
}

/// Pointwise orderings of the flat/sharp and starred/tilde ratios on `grid`.
pub fn ordering_check(surface: &SurfaceOfRevolution, grid: &[f64]) -> Result<OrderingReport, RatioError> {
    let points = ratio_curve(surface, grid)?;
    let mut sharp_slack = f64::NEG_INFINITY;
    let mut star_slack = f64::NEG_INFINITY;
    let mut min_istar = (f64::NAN, f64::INFINITY);
    for p in &points {
        let ds = p.iflat - p.isharp_cand;
        let dt = p.istar - p.istar_tilde_cand;
        if ds > 0.0 {
            return Err(RatioError::OrderingViolated {
                volume: p.volume,
                detail: format!("iflat {} exceeds the sharp candidate {}", p.iflat, p.isharp_cand),
            });
        }
        if dt > 0.0 {
            return Err(RatioError::OrderingViolated {
                volume: p.volume,
                detail: format!("istar {} exceeds the tilde candidate {}", p.istar, p.istar_tilde_cand),
            });
        }
        sharp_slack = sharp_slack.max(ds);
        star_slack = star_slack.max(dt);
        if p.istar < min_istar.1 {
            min_istar = (p.volume, p.istar);
        }
    }
    Ok(OrderingReport {
        points,
        sharp_slack,
        star_slack,
        min_istar,
    })
}
