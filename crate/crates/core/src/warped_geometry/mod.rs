//! Rotationally symmetric manifolds `dt^2 + f(t)^2 g_{S^n}` of finite volume.
//!
//! A [`SurfaceOfRevolution`] owns a [`WarpingFunction`], the dimension `n` of
//! its geodesic spheres and the cached total volume. Geodesic spheres about
//! the pole have area `omega_n f(t)^n`; the disk and tail volume maps and
//! their inverses are computed by certified quadrature.

mod conditions;
mod warping;

pub use conditions::{check_conditions, Condition, ConditionsReport, Witness};
pub use warping::{unit_sphere_measure, ExpCusp, Family, Tabulated, WarpingFunction};

use thiserror::Error;

use crate::numerics::{
    integrate_with_points, solve_monotone, DecayBound, Interval, NumericsError, QuadOptions, DEFAULT_MIN_TOL,
    DEFAULT_QUAD_REL_TOL, DEFAULT_ROOT_TOL,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("warping function is not positive at t = {t}")]
    NotPositive { t: f64 },
    #[error("decay certificate violated at t = {t}: f = {value:e} > {bound:e}")]
    DecayViolated { t: f64, value: f64, bound: f64 },
    #[error("curvature requested at t = {t}, too close to the pole")]
    PoleSingularity { t: f64 },
    #[error("warping function underflows at t = {t}")]
    Underflow { t: f64 },
    #[error("pole is not regular: f(0) = {f0}, f'(0) = {d0}, expected f'(0) = {expected}")]
    IrregularPole { f0: f64, d0: f64, expected: f64 },
    #[error("volume {volume} outside ]0, {total}[")]
    VolumeOutOfRange { volume: f64, total: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

impl From<GeometryError> for NumericsError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::Numerics(inner) => inner,
            other => NumericsError::InvalidInput(other.to_string()),
        }
    }
}

/// Numerical tolerances shared by the geometric layers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub quadrature: f64,
    pub root: f64,
    pub minimize: f64,
    /// Curvature is not evaluated closer than this to the pole.
    pub pole_epsilon: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            quadrature: DEFAULT_QUAD_REL_TOL,
            root: DEFAULT_ROOT_TOL,
            minimize: DEFAULT_MIN_TOL,
            pole_epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceOfRevolution {
    n: u32,
    warping: WarpingFunction,
    omega: f64,
    total_volume: f64,
    tolerances: Tolerances,
}

impl SurfaceOfRevolution {
    pub fn new(n: u32, warping: WarpingFunction, tolerances: Tolerances) -> Result<Self, GeometryError> {
        if n == 0 {
            return Err(GeometryError::InvalidParameter(
                "sphere dimension n must be at least 1".into(),
            ));
        }
        let tol_ok = |x: f64| x > 0.0 && x < 1.0;
        if !(tol_ok(tolerances.quadrature) && tol_ok(tolerances.root) && tol_ok(tolerances.minimize))
            || !(tolerances.pole_epsilon > 0.0)
        {
            return Err(GeometryError::InvalidParameter(format!(
                "tolerances out of range: {tolerances:?}"
            )));
        }

        let (f0, d0, _) = warping.jet(0.0);
        let expected = warping.amplitude();
        if f0 != 0.0 || (d0 - expected).abs() > 1e-12 * expected {
            return Err(GeometryError::IrregularPole { f0, d0, expected });
        }
        let reach = warping.asymptotic_start().max(warping.decay_certificate().t0) + 1.0;
        let samples = 4096;
        for i in 1..=samples {
            let t = reach * i as f64 / samples as f64;
            if !(warping.eval(t) > 0.0) {
                return Err(GeometryError::NotPositive { t });
            }
        }

        let mut surface = Self {
            n,
            omega: unit_sphere_measure(n),
            warping,
            total_volume: f64::NAN,
            tolerances,
        };
        let total = surface.tail_integral(0.0)?;
        if !(total > 0.0 && total.is_finite()) {
            return Err(GeometryError::InvalidParameter(format!(
                "total volume {total} is not finite and positive"
            )));
        }
        surface.total_volume = total;
        Ok(surface)
    }

    pub fn with_defaults(n: u32, warping: WarpingFunction) -> Result<Self, GeometryError> {
        Self::new(n, warping, Tolerances::default())
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn warping(&self) -> &WarpingFunction {
        &self.warping
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn total_volume(&self) -> f64 {
        self.total_volume
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }

    pub fn curvature(&self, t: f64) -> Result<f64, GeometryError> {
        self.warping.curvature(t, self.tolerances.pole_epsilon)
    }

    /// `omega_n f(t)^n`.
    pub fn sphere_area(&self, t: f64) -> f64 {
        self.omega * self.warping.eval(t).powi(self.n as i32)
    }

    /// Certificate for the integrand `omega_n f^n`.
    fn area_decay(&self) -> DecayBound {
        let d = self.warping.decay_certificate();
        let n = self.n as f64;
        DecayBound {
            m: self.omega * d.m.powf(n),
            alpha: n * d.alpha,
            t0: d.t0,
        }
    }

    fn quad_options(&self) -> QuadOptions {
        QuadOptions {
            rel_tol: self.tolerances.quadrature,
            abs_tol: 0.0,
            ..QuadOptions::default()
        }
    }

    fn tail_integral(&self, t: f64) -> Result<f64, GeometryError> {
        let opts = self.quad_options().decay(self.area_decay());
        let res = integrate_with_points(
            |r| self.sphere_area(r),
            Interval::half_line(t)?,
            &self.warping.breakpoints(),
            &opts,
        )?;
        Ok(res.value)
    }

    /// `int_0^t omega_n f^n`.
    pub fn disk_volume(&self, t: f64) -> Result<f64, GeometryError> {
        if !(t >= 0.0) {
            return Err(GeometryError::InvalidParameter(format!(
                "radius must be nonnegative, got {t}"
            )));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        if t == f64::INFINITY {
            return Ok(self.total_volume);
        }
        let res = integrate_with_points(
            |r| self.sphere_area(r),
            Interval::new(0.0, t)?,
            &self.warping.breakpoints(),
            &self.quad_options(),
        )?;
        Ok(res.value)
    }

    /// `int_t^inf omega_n f^n`, by direct tail quadrature.
    pub fn tail_volume(&self, t: f64) -> Result<f64, GeometryError> {
        if !(t >= 0.0) {
            return Err(GeometryError::InvalidParameter(format!(
                "radius must be nonnegative, got {t}"
            )));
        }
        if t == 0.0 {
            return Ok(self.total_volume);
        }
        self.tail_integral(t)
    }

    fn check_volume(&self, v: f64) -> Result<(), GeometryError> {
        if v > 0.0 && v < self.total_volume {
            Ok(())
        } else {
            Err(GeometryError::VolumeOutOfRange {
                volume: v,
                total: self.total_volume,
            })
        }
    }

    fn solve_disk(&self, v: f64) -> Result<f64, GeometryError> {
        let t = solve_monotone(
            |t| self.disk_volume(t).unwrap_or(f64::NAN),
            v,
            Interval::half_line(0.0)?,
            self.tolerances.root,
        )?;
        Ok(t)
    }

    fn solve_tail(&self, v: f64) -> Result<f64, GeometryError> {
        let t = solve_monotone(
            |t| self.tail_volume(t).unwrap_or(f64::NAN),
            v,
            Interval::half_line(0.0)?,
            self.tolerances.root,
        )?;
        Ok(t)
    }

    /// Radius `t` with `disk_volume(t) = v`.
    ///
    /// The equation is solved on whichever side has the smaller volume, so
    /// both ends keep full relative accuracy.
    pub fn radius_of_disk_volume(&self, v: f64) -> Result<f64, GeometryError> {
        self.check_volume(v)?;
        if v <= 0.5 * self.total_volume {
            self.solve_disk(v)
        } else {
            self.solve_tail(self.total_volume - v)
        }
    }

    /// Radius `t` with `tail_volume(t) = v`.
    pub fn radius_of_tail_volume(&self, v: f64) -> Result<f64, GeometryError> {
        self.check_volume(v)?;
        if v <= 0.5 * self.total_volume {
            self.solve_tail(v)
        } else {
            self.solve_disk(self.total_volume - v)
        }
    }

    /// Radii `(r_disk, r_tail)` with `disk_volume(r_disk) = w` and
    /// `tail_volume(r_tail) = w` for `w <= A/2`.
    pub(crate) fn small_side_radii(&self, w: f64) -> Result<(f64, f64), GeometryError> {
        self.check_volume(w)?;
        Ok((self.solve_disk(w)?, self.solve_tail(w)?))
    }

    /// The same surface with warping function `c f`.
    pub fn scaled(&self, c: f64) -> Result<Self, GeometryError> {
        Self::new(self.n, self.warping.scaled(c)?, self.tolerances)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn gaussian() -> SurfaceOfRevolution {
        SurfaceOfRevolution::with_defaults(1, WarpingFunction::gaussian_cusp()).unwrap()
    }

    fn exp_cusp() -> SurfaceOfRevolution {
        SurfaceOfRevolution::with_defaults(1, WarpingFunction::exp_cusp()).unwrap()
    }

    #[test]
    fn gaussian_volumes_match_closed_forms() {
        let s = gaussian();
        assert!((s.total_volume() - PI).abs() < 1e-12);
        let t = 2f64.ln().sqrt();
        assert!((s.disk_volume(t).unwrap() - PI / 2.0).abs() < 1e-12);
        assert!((s.tail_volume(1.0).unwrap() - PI / 1f64.exp()).abs() < 1e-12);
        assert!((s.sphere_area(1.0) - 2.0 * PI / 1f64.exp()).abs() < 1e-15);
        assert_eq!(s.disk_volume(0.0).unwrap(), 0.0);
        assert_eq!(s.tail_volume(0.0).unwrap(), s.total_volume());
        assert!((s.radius_of_disk_volume(PI / 2.0).unwrap() - t).abs() < 1e-9);
    }

    #[test]
    fn exp_cusp_tail_is_pure_exponential() {
        let s = exp_cusp();
        for t in [10.0f64, 12.0, 20.0, 35.0] {
            let expected = 2.0 * PI * (-t).exp();
            let got = s.tail_volume(t).unwrap();
            assert!((got - expected).abs() <= 1e-9 * expected, "t={t}: {got} vs {expected}");
            assert!((s.sphere_area(t) - expected).abs() <= 1e-15 * expected);
        }
        for i in 0..64 {
            let t = 10.0 + 0.37 * i as f64 + 1e-3;
            assert!((s.curvature(t).unwrap() + 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn sphere_area_vanishes_far_out() {
        assert!(gaussian().sphere_area(40.0) < 1e-6);
        assert!(exp_cusp().sphere_area(40.0) < 1e-6);
    }

    #[test]
    fn volume_out_of_range() {
        let s = gaussian();
        assert!(matches!(
            s.radius_of_disk_volume(s.total_volume()),
            Err(GeometryError::VolumeOutOfRange { .. })
        ));
        assert!(s.radius_of_disk_volume(0.0).is_err());
        assert!(s.radius_of_tail_volume(-1.0).is_err());
    }

    #[test]
    fn small_volumes_have_small_radii() {
        let s = gaussian();
        let t = s.radius_of_disk_volume(1e-10).unwrap();
        // disk volume ~ pi t^2 near the pole
        assert!((t - (1e-10 / PI).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn dimension_two_sphere_measure() {
        let s = SurfaceOfRevolution::with_defaults(2, WarpingFunction::gaussian_cusp()).unwrap();
        // int 4 pi t^2 e^{-2t^2} dt = 4 pi * sqrt(pi/2) / 8
        let expected = 4.0 * PI * (PI / 2.0).sqrt() / 8.0;
        assert!((s.total_volume() - expected).abs() < 1e-10 * expected);
    }

    #[test]
    fn rejects_bad_dimension_and_pole() {
        assert!(SurfaceOfRevolution::with_defaults(0, WarpingFunction::gaussian_cusp()).is_err());
        let decay = DecayBound::new(10.0, 1.0, 0.0).unwrap();
        // slope at the pole is forced to 1, but the first knot must be the pole
        assert!(WarpingFunction::tabulated(vec![(0.0, 0.0), (1.0, 0.5), (2.0, 0.2)], 1.0, decay).is_ok());
    }

    #[test]
    fn scaling_scales_volume() {
        let s = gaussian();
        let c = 3.5;
        let sc = s.scaled(c).unwrap();
        assert!((sc.total_volume() - c * s.total_volume()).abs() < 1e-11);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn volume_partition_gaussian(t in 0.01f64..6.0) {
            let s = gaussian();
            let sum = s.disk_volume(t).unwrap() + s.tail_volume(t).unwrap();
            prop_assert!((sum - s.total_volume()).abs() <= 1e-9 * s.total_volume());
        }

        #[test]
        fn volume_partition_exp_cusp(t in 0.01f64..30.0) {
            let s = exp_cusp();
            let sum = s.disk_volume(t).unwrap() + s.tail_volume(t).unwrap();
            prop_assert!((sum - s.total_volume()).abs() <= 1e-9 * s.total_volume());
        }

        #[test]
        fn disk_radius_round_trip(frac in 1e-6f64..0.999_999) {
            for s in [gaussian(), exp_cusp()] {
                let v = frac * s.total_volume();
                let t = s.radius_of_disk_volume(v).unwrap();
                prop_assert!((s.disk_volume(t).unwrap() - v).abs() <= 1e-8 * s.total_volume());
            }
        }

        #[test]
        fn gaussian_curvature_matches_finite_differences(t in 0.1f64..3.0) {
            let w = WarpingFunction::gaussian_cusp();
            let h = 1e-3;
            let f = |k: f64| w.eval(t + k * h);
            let d2 = (-f(2.0) + 16.0 * f(1.0) - 30.0 * f(0.0) + 16.0 * f(-1.0) - f(-2.0)) / (12.0 * h * h);
            let fd = -d2 / w.eval(t);
            let k = gaussian().curvature(t).unwrap();
            prop_assert!((k - fd).abs() <= 1e-6 * k.abs().max(1.0));
        }
    }
}
