//! Split inequalities for separating hypersurfaces and the penalty paid by
//! disconnected regions.
//!
//! For positive `L1, L2, A1, A2, A3` and `p` in `{1, 2}`:
//!
//! ```text
//! (L1 + L2)^p (1/(A1 + A2) + 1/A3)
//!     > min(L1^p (1/A1 + 1/(A2 + A3)), L2^p (1/A2 + 1/(A1 + A3)))
//! ```

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::profile::{CandidateKind, CandidateRegion};
use crate::warped_geometry::{GeometryError, SurfaceOfRevolution};

const SAMPLE_LO: f64 = 1e-6;
const SAMPLE_HI: f64 = 1e6;
const SHARDS: u64 = 16;
/// Float margins below this fraction of the rhs are re-decided exactly.
const EXACT_FALLBACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LemmaError {
    #[error("split instance fields must be positive and finite: {0:?}")]
    Domain([f64; 5]),
    #[error("exponent {0} is outside the proven cases; use the conjecture mode")]
    UnsupportedExponent(f64),
    #[error("trials must be at least one")]
    NoTrials,
    #[error("invalid annuli: {0}")]
    InvalidAnnuli(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Exponent of the split inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    One,
    Two,
    /// Any `p >= 1`; not covered by a proof.
    Conjecture(f64),
}

impl Exponent {
    /// `p` restricted to the proven cases.
    pub fn proven(p: u32) -> Result<Self, LemmaError> {
        match p {
            1 => Ok(Exponent::One),
            2 => Ok(Exponent::Two),
            other => Err(LemmaError::UnsupportedExponent(other as f64)),
        }
    }

    pub fn conjecture(p: f64) -> Result<Self, LemmaError> {
        if p >= 1.0 && p.is_finite() {
            Ok(Exponent::Conjecture(p))
        } else {
            Err(LemmaError::UnsupportedExponent(p))
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            Exponent::One => 1.0,
            Exponent::Two => 2.0,
            Exponent::Conjecture(p) => *p,
        }
    }

    fn integer(&self) -> Option<i32> {
        match self {
            Exponent::One => Some(1),
            Exponent::Two => Some(2),
            Exponent::Conjecture(p) if p.fract() == 0.0 && *p <= 64.0 => Some(*p as i32),
            Exponent::Conjecture(_) => None,
        }
    }

    pub fn is_proven(&self) -> bool {
        !matches!(self, Exponent::Conjecture(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitInstance {
    pub l1: f64,
    pub l2: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl SplitInstance {
    pub fn new(l1: f64, l2: f64, a1: f64, a2: f64, a3: f64) -> Result<Self, LemmaError> {
        let fields = [l1, l2, a1, a2, a3];
        if fields.iter().all(|x| *x > 0.0 && x.is_finite()) {
            Ok(Self { l1, l2, a1, a2, a3 })
        } else {
            Err(LemmaError::Domain(fields))
        }
    }

    pub fn fields(&self) -> [f64; 5] {
        [self.l1, self.l2, self.a1, self.a2, self.a3]
    }

    /// `(cL, cA)`.
    pub fn scaled(&self, c: f64) -> Result<Self, LemmaError> {
        Self::new(c * self.l1, c * self.l2, c * self.a1, c * self.a2, c * self.a3)
    }
}

pub fn split_lhs(inst: &SplitInstance, p: Exponent) -> f64 {
    (inst.l1 + inst.l2).powf(p.value()) * (1.0 / (inst.a1 + inst.a2) + 1.0 / inst.a3)
}

pub fn split_rhs(inst: &SplitInstance, p: Exponent) -> f64 {
    let q = p.value();
    let first = inst.l1.powf(q) * (1.0 / inst.a1 + 1.0 / (inst.a2 + inst.a3));
    let second = inst.l2.powf(q) * (1.0 / inst.a2 + 1.0 / (inst.a1 + inst.a3));
    first.min(second)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCheck {
    pub holds: bool,
    /// `lhs - rhs`.
    pub margin: f64,
    /// The verdict came from exact rational arithmetic.
    pub exact: bool,
}

/// Strict inequality `lhs > rhs`, re-decided in exact arithmetic when the
/// float margin is within rounding of zero.
pub fn check_split(inst: &SplitInstance, p: Exponent) -> SplitCheck {
    let lhs = split_lhs(inst, p);
    let rhs = split_rhs(inst, p);
    let margin = lhs - rhs;
    if margin.abs() > EXACT_FALLBACK * rhs.abs() {
        return SplitCheck {
            holds: margin > 0.0,
            margin,
            exact: false,
        };
    }
    match exact_split(inst, p) {
        Some(ex) => SplitCheck {
            holds: ex.margin.is_positive(),
            margin,
            exact: true,
        },
        None => SplitCheck {
            holds: margin > 0.0,
            margin,
            exact: false,
        },
    }
}

/// `2 A1 A2 / (A3 (A1 + A2))`: what remains for `p = 1` when the two
/// bounds `lhs <= rhs_i` are normalised and summed.
pub fn summed_slack(inst: &SplitInstance) -> f64 {
    2.0 * inst.a1 * inst.a2 / (inst.a3 * (inst.a1 + inst.a2))
}

/// Both sides of the inequality in exact rational arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSplit {
    pub lhs: BigRational,
    pub rhs: BigRational,
    pub margin: BigRational,
}

fn to_rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite by construction")
}

/// Exact evaluation for integer exponents; every `f64` field is converted to
/// the rational it represents.
pub fn exact_split(inst: &SplitInstance, p: Exponent) -> Option<ExactSplit> {
    let k = p.integer()?;
    let [l1, l2, a1, a2, a3] = inst.fields().map(to_rational);
    let one = BigRational::one();
    let lhs = num::pow::pow(&l1 + &l2, k as usize) * (&one / (&a1 + &a2) + &one / &a3);
    let first = num::pow::pow(l1, k as usize) * (&one / &a1 + &one / (&a2 + &a3));
    let second = num::pow::pow(l2, k as usize) * (&one / &a2 + &one / (&a1 + &a3));
    let rhs = if first < second { first } else { second };
    let margin = &lhs - &rhs;
    Some(ExactSplit { lhs, rhs, margin })
}

/// Exact split for an integer instance.
pub fn exact_split_integers(fields: [i64; 5], p: Exponent) -> Result<ExactSplit, LemmaError> {
    if fields.iter().any(|&x| x <= 0) {
        return Err(LemmaError::Domain(fields.map(|x| x as f64)));
    }
    let inst = SplitInstance::new(
        fields[0] as f64,
        fields[1] as f64,
        fields[2] as f64,
        fields[3] as f64,
        fields[4] as f64,
    )?;
    exact_split(&inst, p).ok_or(LemmaError::UnsupportedExponent(p.value()))
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        if x.is_zero() {
            0.0
        } else {
            let n = x.numer().to_f64().unwrap_or(f64::NAN);
            let d = x.denom().to_f64().unwrap_or(f64::NAN);
            n / d
        }
    })
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport {
    pub exponent: Exponent,
    pub trials: u64,
    pub seed: u64,
    pub violations: u64,
    /// First violating instance, if any.
    pub first_violation: Option<SplitInstance>,
    /// Smallest `margin / rhs` seen, with its instance.
    pub min_relative_margin: f64,
    pub argmin: SplitInstance,
    /// Smallest absolute margin seen.
    pub min_margin: f64,
}

fn log_uniform<R: Rng>(rng: &mut R) -> f64 {
    let (lo, hi) = (SAMPLE_LO.ln(), SAMPLE_HI.ln());
    rng.gen_range(lo..hi).exp()
}

fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

/// Sample instances log-uniformly over `[1e-6, 1e6]^5` and count failures of
/// the strict inequality. Shards draw from independent streams of the
/// master seed, so the report does not depend on the thread count.
pub fn random_search_counterexample(p: Exponent, trials: u64, seed: u64) -> Result<SearchReport, LemmaError> {
    if trials == 0 {
        return Err(LemmaError::NoTrials);
    }
    struct Shard {
        violations: u64,
        first_violation: Option<SplitInstance>,
        min_rel: (f64, SplitInstance),
        min_margin: f64,
    }
    let shards: Vec<Shard> = (0..SHARDS)
        .into_par_iter()
        .map(|k| {
            let count = trials / SHARDS + u64::from(k < trials % SHARDS);
            let mut rng = shard_rng(seed, k);
            let mut shard = Shard {
                violations: 0,
                first_violation: None,
                min_rel: (
                    f64::INFINITY,
                    SplitInstance::new(1.0, 1.0, 1.0, 1.0, 1.0).expect("valid"),
                ),
                min_margin: f64::INFINITY,
            };
            for _ in 0..count {
                let f: [f64; 5] = std::array::from_fn(|_| log_uniform(&mut rng));
                let inst = SplitInstance::new(f[0], f[1], f[2], f[3], f[4]).expect("positive samples");
                let check = check_split(&inst, p);
                if !check.holds {
                    shard.violations += 1;
                    shard.first_violation.get_or_insert(inst);
                }
                let rel = check.margin / split_rhs(&inst, p);
                if rel < shard.min_rel.0 {
                    shard.min_rel = (rel, inst);
                }
                shard.min_margin = shard.min_margin.min(check.margin);
            }
            shard
        })
        .collect();

    let mut report = SearchReport {
        exponent: p,
        trials,
        seed,
        violations: 0,
        first_violation: None,
        min_relative_margin: f64::INFINITY,
        argmin: shards[0].min_rel.1,
        min_margin: f64::INFINITY,
    };
    for s in shards {
        report.violations += s.violations;
        if report.first_violation.is_none() {
            report.first_violation = s.first_violation;
        }
        if s.min_rel.0 < report.min_relative_margin {
            report.min_relative_margin = s.min_rel.0;
            report.argmin = s.min_rel.1;
        }
        report.min_margin = report.min_margin.min(s.min_margin);
    }
    Ok(report)
}

/// An annulus `{inner < r < outer}` given by its boundary radii.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Annulus {
    pub inner: f64,
    pub outer: f64,
}

impl Annulus {
    pub fn new(inner: f64, outer: f64) -> Result<Self, LemmaError> {
        if inner > 0.0 && outer > inner && outer.is_finite() {
            Ok(Self { inner, outer })
        } else {
            Err(LemmaError::InvalidAnnuli(format!(
                "need 0 < inner < outer, got ({inner}, {outer})"
            )))
        }
    }

    pub fn region(&self, surface: &SurfaceOfRevolution) -> Result<CandidateRegion, LemmaError> {
        let volume = surface.disk_volume(self.outer)? - surface.disk_volume(self.inner)?;
        Ok(CandidateRegion {
            kind: CandidateKind::Annulus {
                inner: self.inner,
                outer: self.outer,
            },
            volume,
            perimeter: surface.sphere_area(self.inner) + surface.sphere_area(self.outer),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyReport {
    /// Flat ratio of the union of both annuli.
    pub d_union: f64,
    pub d_parts: (f64, f64),
    /// `d_union - min(d_parts)`.
    pub margin: f64,
    /// The same comparison phrased as a split instance.
    pub instance: SplitInstance,
    pub holds: bool,
}

/// Compare the flat ratio `P (1/v + 1/(A - v))` of two disjoint annuli taken
/// together with that of each annulus alone.
pub fn disconnection_penalty(
    surface: &SurfaceOfRevolution,
    first: Annulus,
    second: Annulus,
) -> Result<PenaltyReport, LemmaError> {
    let (x, y) = if first.inner <= second.inner {
        (first, second)
    } else {
        (second, first)
    };
    if x.outer > y.inner {
        return Err(LemmaError::InvalidAnnuli(format!("annuli overlap: {x:?} and {y:?}")));
    }
    let a = surface.total_volume();
    let rx = x.region(surface)?;
    let ry = y.region(surface)?;
    let rest = a - rx.volume - ry.volume;
    if !(rx.volume > 0.0 && ry.volume > 0.0 && rest > 0.0) {
        return Err(LemmaError::InvalidAnnuli(format!(
            "volumes must be positive with room left over (got {}, {}, rest {rest})",
            rx.volume, ry.volume
        )));
    }
    let flat = |perimeter: f64, v: f64| perimeter * (1.0 / v + 1.0 / (a - v));
    let d_union = flat(rx.perimeter + ry.perimeter, rx.volume + ry.volume);
    let d_parts = (flat(rx.perimeter, rx.volume), flat(ry.perimeter, ry.volume));
    let instance = SplitInstance::new(rx.perimeter, ry.perimeter, rx.volume, ry.volume, rest)?;
    let margin = d_union - d_parts.0.min(d_parts.1);
    Ok(PenaltyReport {
        d_union,
        d_parts,
        margin,
        instance,
        holds: check_split(&instance, Exponent::One).holds && margin > 0.0,
    })
}

/// Two disjoint annuli from four sorted uniform volumes in `]0, A[`.
pub fn random_annulus_pair<R: Rng>(
    surface: &SurfaceOfRevolution,
    rng: &mut R,
) -> Result<(Annulus, Annulus), LemmaError> {
    let a = surface.total_volume();
    let mut v: [f64; 4] = std::array::from_fn(|_| rng.gen_range(0.0..1.0) * a);
    v.sort_by(f64::total_cmp);
    let mut t = [0.0; 4];
    for (ti, vi) in t.iter_mut().zip(v) {
        *ti = surface.radius_of_disk_volume(vi.max(f64::MIN_POSITIVE))?;
    }
    Ok((Annulus::new(t[0], t[1])?, Annulus::new(t[2], t[3])?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltySearch {
    pub pairs: usize,
    pub failures: usize,
    pub min_margin: f64,
}

/// [`disconnection_penalty`] over `pairs` random annulus pairs.
pub fn random_penalty_search(
    surface: &SurfaceOfRevolution,
    pairs: usize,
    seed: u64,
) -> Result<PenaltySearch, LemmaError> {
    let reports: Vec<PenaltyReport> = (0..pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = shard_rng(seed, i as u64);
            let (x, y) = random_annulus_pair(surface, &mut rng)?;
            disconnection_penalty(surface, x, y)
        })
        .collect::<Result<_, _>>()?;
    Ok(PenaltySearch {
        pairs,
        failures: reports.iter().filter(|r| !r.holds).count(),
        min_margin: reports.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min),
    })
}
