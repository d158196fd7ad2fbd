//! Warping functions `f(t)` for metrics `dt^2 + f(t)^2 g_{S^n}`.

use std::f64::consts::PI;

use crate::numerics::{bisect_sign_change, DecayBound};

use super::GeometryError;

/// Quintic pole blend joined C2 to `exp(-rate t)` at `t1`.
///
/// The quintic `t + c3 t^3 + c4 t^4 + c5 t^5` has `h(0) = 0`, `h'(0) = 1` and
/// `h''(0) = 0`, the odd-extension conditions for a smooth pole.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpCusp {
    t1: f64,
    rate: f64,
    coeffs: [f64; 3],
}

impl ExpCusp {
    pub const DEFAULT_T1: f64 = 8.0;

    pub fn new(t1: f64, rate: f64) -> Result<Self, GeometryError> {
        if !(t1 > 0.0 && t1.is_finite() && rate > 0.0 && rate.is_finite()) {
            return Err(GeometryError::InvalidParameter(format!(
                "exp cusp needs t1 > 0 and rate > 0 (got t1={t1}, rate={rate})"
            )));
        }
        let e = (-rate * t1).exp();
        // unknowns u_k = c_k t1^k
        let r0 = e - t1;
        let r1 = t1 * (-rate * e - 1.0);
        let r2 = t1 * t1 * rate * rate * e;
        let u5 = 0.5 * (r2 + 12.0 * r0 - 6.0 * r1);
        let u4 = r1 - 3.0 * r0 - 2.0 * u5;
        let u3 = r0 - u4 - u5;
        let cusp = Self {
            t1,
            rate,
            coeffs: [u3 / t1.powi(3), u4 / t1.powi(4), u5 / t1.powi(5)],
        };
        let samples = 2048;
        for i in 1..=samples {
            let t = t1 * i as f64 / samples as f64;
            if cusp.blend(t).0 <= 0.0 {
                return Err(GeometryError::NotPositive { t });
            }
        }
        Ok(cusp)
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// `[c3, c4, c5]`.
    pub fn blend_coefficients(&self) -> [f64; 3] {
        self.coeffs
    }

    fn blend(&self, t: f64) -> (f64, f64, f64) {
        let [c3, c4, c5] = self.coeffs;
        let t2 = t * t;
        let f = t + t2 * t * (c3 + t * (c4 + t * c5));
        let d1 = 1.0 + t2 * (3.0 * c3 + t * (4.0 * c4 + t * 5.0 * c5));
        let d2 = t * (6.0 * c3 + t * (12.0 * c4 + t * 20.0 * c5));
        (f, d1, d2)
    }

    fn jet(&self, t: f64) -> (f64, f64, f64) {
        if t < self.t1 {
            self.blend(t)
        } else {
            let e = (-self.rate * t).exp();
            (e, -self.rate * e, self.rate * self.rate * e)
        }
    }
}

/// Monotone piecewise-cubic (Fritsch–Butland) interpolant through knots
/// starting at `(0, 0)`, extended past the last knot by
/// `f_N exp(-tail_rate (t - t_N))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    knots: Vec<(f64, f64)>,
    slopes: Vec<f64>,
    tail_rate: f64,
}

impl Tabulated {
    pub fn new(knots: Vec<(f64, f64)>, tail_rate: f64) -> Result<Self, GeometryError> {
        let bad = |msg: String| Err(GeometryError::InvalidParameter(msg));
        if knots.len() < 2 {
            return bad("tabulated warping needs at least two knots".into());
        }
        if knots[0] != (0.0, 0.0) {
            return bad(format!("first knot must be (0, 0), got {:?}", knots[0]));
        }
        if !(tail_rate > 0.0 && tail_rate.is_finite()) {
            return bad(format!("tail rate must be positive, got {tail_rate}"));
        }
        for (i, w) in knots.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) || !w[1].0.is_finite() {
                return bad(format!("knot abscissae must increase strictly (knot {})", i + 1));
            }
            if !(w[1].1 > 0.0) || !w[1].1.is_finite() {
                return bad(format!("knot values after the pole must be positive (knot {})", i + 1));
            }
        }

        let n = knots.len();
        let secant: Vec<f64> = knots
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = 1.0;
        for k in 1..n - 1 {
            let (d0, d1) = (secant[k - 1], secant[k]);
            if d0 * d1 <= 0.0 {
                slopes[k] = 0.0;
            } else {
                let h0 = knots[k].0 - knots[k - 1].0;
                let h1 = knots[k + 1].0 - knots[k].0;
                let w1 = 2.0 * h1 + h0;
                let w2 = h1 + 2.0 * h0;
                slopes[k] = (w1 + w2) / (w1 / d0 + w2 / d1);
            }
        }
        slopes[n - 1] = -tail_rate * knots[n - 1].1;
        Ok(Self {
            knots,
            slopes,
            tail_rate,
        })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn tail_rate(&self) -> f64 {
        self.tail_rate
    }

    fn last_knot(&self) -> (f64, f64) {
        *self.knots.last().expect("at least two knots")
    }

    fn jet(&self, t: f64) -> (f64, f64, f64) {
        let (tn, fnn) = self.last_knot();
        if t >= tn {
            let e = fnn * (-self.tail_rate * (t - tn)).exp();
            return (e, -self.tail_rate * e, self.tail_rate * self.tail_rate * e);
        }
        let k = self.knots.partition_point(|&(x, _)| x <= t).saturating_sub(1);
        let (x0, y0) = self.knots[k];
        let (x1, y1) = self.knots[k + 1];
        let (d0, d1) = (self.slopes[k], self.slopes[k + 1]);
        let h = x1 - x0;
        let s = (t - x0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let f = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * h * d0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * h * d1;
        let df = ((6.0 * s2 - 6.0 * s) * y0 + (-6.0 * s2 + 6.0 * s) * y1) / h
            + (3.0 * s2 - 4.0 * s + 1.0) * d0
            + (3.0 * s2 - 2.0 * s) * d1;
        let ddf = ((12.0 * s - 6.0) * y0 + (6.0 - 12.0 * s) * y1) / (h * h)
            + ((6.0 * s - 4.0) * d0 + (6.0 * s - 2.0) * d1) / h;
        (f, df, ddf)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// Quintic pole blend followed by `exp(-rate t)` for `t >= t1`.
    ExpCusp(ExpCusp),
    /// `t exp(-t^2)`.
    GaussianCusp,
    /// `t exp(-t^a)`, `a > 1`.
    PowerCusp {
        a: f64,
    },
    Tabulated(Tabulated),
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::ExpCusp(_) => "exp_cusp",
            Family::GaussianCusp => "gaussian_cusp",
            Family::PowerCusp { .. } => "power_cusp",
            Family::Tabulated(_) => "tabulated",
        }
    }
}

/// The profile `f` of a rotationally symmetric metric, with its first two
/// derivatives and an exponential decay certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpingFunction {
    family: Family,
    amplitude: f64,
    decay: DecayBound,
}

impl WarpingFunction {
    pub fn new(family: Family, decay: DecayBound) -> Result<Self, GeometryError> {
        if let Family::PowerCusp { a } = family {
            if !(a > 1.0 && a.is_finite()) {
                return Err(GeometryError::InvalidParameter(format!(
                    "power cusp needs a > 1, got {a}"
                )));
            }
        }
        let w = Self {
            family,
            amplitude: 1.0,
            decay,
        };
        w.check_decay()?;
        Ok(w)
    }

    /// Exponential cusp with the default blend point and its natural
    /// certificate `f <= exp(-rate t)` for `t >= t1`.
    pub fn exp_cusp() -> Self {
        Self::exp_cusp_with(ExpCusp::DEFAULT_T1, 1.0).expect("default exp cusp is valid")
    }

    pub fn exp_cusp_with(t1: f64, rate: f64) -> Result<Self, GeometryError> {
        let cusp = ExpCusp::new(t1, rate)?;
        let decay = DecayBound::new(1.0, rate, t1)?;
        Self::new(Family::ExpCusp(cusp), decay)
    }

    /// `t exp(-t^2)` with certificate `f <= exp(-t)` on `t >= 0`.
    pub fn gaussian_cusp() -> Self {
        let decay = DecayBound::new(1.0, 1.0, 0.0).expect("valid");
        Self::new(Family::GaussianCusp, decay).expect("gaussian cusp is valid")
    }

    /// `t exp(-t^a)` with certificate `f <= M exp(-t)` on `t >= 0`, where
    /// `M = max_t t exp(t - t^a)`.
    pub fn power_cusp(a: f64) -> Result<Self, GeometryError> {
        if !(a > 1.0 && a.is_finite()) {
            return Err(GeometryError::InvalidParameter(format!(
                "power cusp needs a > 1, got {a}"
            )));
        }
        // stationary point of ln t + t - t^a: 1/t + 1 - a t^{a-1} = 0
        let g = |t: f64| 1.0 / t + 1.0 - a * t.powf(a - 1.0);
        let mut hi = 1.0;
        while g(hi) > 0.0 {
            hi *= 2.0;
        }
        let t_star = bisect_sign_change(g, 1e-12, hi, 1e-15)?;
        let log_m = t_star.ln() + t_star - t_star.powf(a);
        let decay = DecayBound::new(log_m.exp() * (1.0 + 1e-12), 1.0, 0.0)?;
        Self::new(Family::PowerCusp { a }, decay)
    }

    pub fn tabulated(knots: Vec<(f64, f64)>, tail_rate: f64, decay: DecayBound) -> Result<Self, GeometryError> {
        Self::new(Family::Tabulated(Tabulated::new(knots, tail_rate)?), decay)
    }

    /// The same shape scaled by `c`, i.e. `c f`. For `c != 1` the pole is
    /// conical (`f'(0) = c`).
    pub fn scaled(&self, c: f64) -> Result<Self, GeometryError> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(GeometryError::InvalidParameter(format!(
                "scale must be positive, got {c}"
            )));
        }
        let decay = DecayBound::new(self.decay.m * c, self.decay.alpha, self.decay.t0)?;
        Ok(Self {
            family: self.family.clone(),
            amplitude: self.amplitude * c,
            decay,
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn decay_certificate(&self) -> DecayBound {
        self.decay
    }

    /// Whether the derivatives come from a closed form rather than an
    /// interpolant.
    pub fn has_closed_form(&self) -> bool {
        !matches!(self.family, Family::Tabulated(_))
    }

    /// Points where `f` is only finitely smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.family {
            Family::ExpCusp(c) => vec![c.t1],
            Family::Tabulated(tab) => tab.knots.iter().skip(1).map(|k| k.0).collect(),
            _ => Vec::new(),
        }
    }

    /// Start of the region where `f` follows its asymptotic closed form.
    pub fn asymptotic_start(&self) -> f64 {
        match &self.family {
            Family::ExpCusp(c) => c.t1,
            Family::Tabulated(tab) => tab.last_knot().0,
            _ => 0.0,
        }
    }

    /// `(f, f', f'')` at `t >= 0`.
    pub fn jet(&self, t: f64) -> (f64, f64, f64) {
        let (f, d1, d2) = match &self.family {
            Family::ExpCusp(c) => c.jet(t),
            Family::GaussianCusp => {
                let e = (-t * t).exp();
                let t2 = t * t;
                (t * e, e * (1.0 - 2.0 * t2), e * t * (4.0 * t2 - 6.0))
            }
            Family::PowerCusp { a } => {
                let a = *a;
                let ta = t.powf(a);
                let e = (-ta).exp();
                let d2 = if t > 0.0 {
                    -a * t.powf(a - 1.0) * e * (1.0 + a - a * ta)
                } else {
                    0.0
                };
                (t * e, e * (1.0 - a * ta), d2)
            }
            Family::Tabulated(tab) => tab.jet(t),
        };
        let c = self.amplitude;
        (c * f, c * d1, c * d2)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.jet(t).0
    }

    pub fn deriv1(&self, t: f64) -> f64 {
        self.jet(t).1
    }

    pub fn deriv2(&self, t: f64) -> f64 {
        self.jet(t).2
    }

    /// Sectional curvature `-f''/f` of the two-dimensional metric.
    pub fn curvature(&self, t: f64, pole_epsilon: f64) -> Result<f64, GeometryError> {
        if !(t >= pole_epsilon) {
            return Err(GeometryError::PoleSingularity { t });
        }
        let (f, _, d2) = self.jet(t);
        if !(f > 0.0) {
            return Err(GeometryError::Underflow { t });
        }
        Ok(-d2 / f)
    }

    fn check_decay(&self) -> Result<(), GeometryError> {
        let d = self.decay;
        let reach = d.t0.max(self.asymptotic_start()) + 60.0 / d.alpha;
        let samples = 2048;
        for i in 0..=samples {
            let t = d.t0 + (reach - d.t0) * i as f64 / samples as f64;
            let f = self.eval(t);
            let bound = d.envelope(t);
            if f > bound * (1.0 + 1e-9) + 1e-300 {
                return Err(GeometryError::DecayViolated { t, value: f, bound });
            }
        }
        Ok(())
    }
}

/// `n`-dimensional measure of the unit `n`-sphere.
pub fn unit_sphere_measure(n: u32) -> f64 {
    // omega_n = 2 pi / (n - 1) * omega_{n-2}
    let (mut w, start) = if n.is_multiple_of(2) { (2.0, 2) } else { (2.0 * PI, 3) };
    let mut k = start;
    while k <= n {
        w *= 2.0 * PI / (k - 1) as f64;
        k += 2;
    }
    w
}
