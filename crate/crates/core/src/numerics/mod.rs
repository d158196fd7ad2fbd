//! Deterministic one-dimensional numerical kernel.
//!
//! Everything the geometric layers need lives here: adaptive Gauss–Kronrod
//! quadrature (with certified exponential tails for half-infinite domains),
//! bracketed root finding, grid-seeded golden-section minimisation and a
//! Richardson-style limit extrapolator for sequences sampled at growing
//! arguments. All routines are pure functions of their inputs.

mod extrapolate;
mod minimize;
mod quadrature;
mod roots;

pub use extrapolate::{extrapolate_limit, extrapolate_sequence, ExtrapolationOptions, LimitEstimate};
pub use minimize::{golden_section, minimize_1d, Minimum};
pub use quadrature::{integrate, integrate_with_points, DecayBound, QuadOptions, QuadratureResult};
pub use roots::{bisect_sign_change, solve_monotone};

use thiserror::Error;

/// Default relative tolerance for quadrature.
pub const DEFAULT_QUAD_REL_TOL: f64 = 1e-9;
/// Default absolute floor for quadrature error targets.
pub const DEFAULT_QUAD_ABS_TOL: f64 = 1e-14;
/// Default relative tolerance for root finding.
pub const DEFAULT_ROOT_TOL: f64 = 1e-10;
/// Default tolerance for 1D minimisation.
pub const DEFAULT_MIN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("invalid interval [{lo}, {hi}]: need finite lo < hi")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("integrand over an infinite domain needs a decay bound")]
    NonIntegrable,
    #[error("quadrature stalled after {subdivisions} subdivisions (error {error:e} > target {target:e})")]
    ToleranceNotMet {
        subdivisions: usize,
        error: f64,
        target: f64,
    },
    #[error("integrand is not finite at x = {x}")]
    NonFinite { x: f64 },
    #[error("target {target} outside the range of the function on the bracket")]
    TargetOutOfRange { target: f64 },
    #[error("no sign change on [{lo}, {hi}]")]
    NotBracketed { lo: f64, hi: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// A real interval `[lo, hi]` with a finite lower end; `hi` may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, NumericsError> {
        let hi_ok = hi.is_finite() || hi == f64::INFINITY;
        if !lo.is_finite() || !hi_ok || lo >= hi {
            return Err(NumericsError::InvalidInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    /// `[lo, +inf)`.
    pub fn half_line(lo: f64) -> Result<Self, NumericsError> {
        Self::new(lo, f64::INFINITY)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.hi.is_finite()
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}
