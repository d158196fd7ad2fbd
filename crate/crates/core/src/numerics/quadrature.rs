use super::{Interval, NumericsError, DEFAULT_QUAD_ABS_TOL, DEFAULT_QUAD_REL_TOL};

/// Exponential decay certificate `|f(t)| <= m * exp(-alpha * t)` for `t >= t0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayBound {
    pub m: f64,
    pub alpha: f64,
    pub t0: f64,
}

impl DecayBound {
    pub fn new(m: f64, alpha: f64, t0: f64) -> Result<Self, NumericsError> {
        if !(m > 0.0 && m.is_finite() && alpha > 0.0 && alpha.is_finite() && t0.is_finite()) {
            return Err(NumericsError::InvalidInput(format!(
                "decay bound needs M > 0, alpha > 0, finite T0 (got M={m}, alpha={alpha}, T0={t0})"
            )));
        }
        Ok(Self { m, alpha, t0 })
    }

    /// Upper bound on `f(t)` for `t >= t0`.
    pub fn envelope(&self, t: f64) -> f64 {
        self.m * (-self.alpha * t).exp()
    }

    /// Upper bound on `int_t^inf |f|` for `t >= t0`.
    pub fn tail_bound(&self, t: f64) -> f64 {
        self.envelope(t) / self.alpha
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    /// Absolute floor of the error target; zero means purely relative.
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Required when the domain is half-infinite.
    pub decay: Option<DecayBound>,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: DEFAULT_QUAD_REL_TOL,
            abs_tol: DEFAULT_QUAD_ABS_TOL,
            max_subdivisions: 2000,
            decay: None,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    pub fn decay(mut self, decay: DecayBound) -> Self {
        self.decay = Some(decay);
        self
    }

    fn target(&self, value: f64) -> f64 {
        (self.rel_tol * value.abs()).max(self.abs_tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    /// Estimated absolute error, including the analytic tail remainder.
    pub error_bound: f64,
    pub evaluations: usize,
}

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK tables).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel, NumericsError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| -> Result<f64, NumericsError> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(NumericsError::NonFinite { x })
        }
    };

    let fc = eval(center)?;
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        // odd Kronrod nodes are the Gauss nodes
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Panel { a, b, value, error })
}

struct Adaptive {
    panels: Vec<Panel>,
    evaluations: usize,
}

impl Adaptive {
    fn new() -> Self {
        Self {
            panels: Vec::new(),
            evaluations: 0,
        }
    }

    fn push<F: Fn(f64) -> f64>(&mut self, f: &F, a: f64, b: f64) -> Result<(), NumericsError> {
        if b > a {
            self.panels.push(gk21(f, a, b)?);
            self.evaluations += 21;
        }
        Ok(())
    }

    fn totals(&self) -> (f64, f64) {
        self.panels
            .iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error))
    }

    /// Bisect the worst panel until the summed error meets `target(value)`.
    fn refine<F, T>(&mut self, f: &F, max_subdivisions: usize, target: T) -> Result<(f64, f64), NumericsError>
    where
        F: Fn(f64) -> f64,
        T: Fn(f64) -> f64,
    {
        let mut subdivisions = 0;
        loop {
            let (value, error) = self.totals();
            let goal = target(value);
            if error <= goal {
                return Ok((value, error));
            }
            let worst = self
                .panels
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
                .map(|(i, _)| i)
                .expect("at least one panel");
            let p = self.panels[worst];
            let mid = 0.5 * (p.a + p.b);
            let too_narrow = mid <= p.a || mid >= p.b || (p.b - p.a) <= 8.0 * f64::EPSILON * mid.abs().max(1e-300);
            if subdivisions >= max_subdivisions || too_narrow {
                return Err(NumericsError::ToleranceNotMet {
                    subdivisions,
                    error,
                    target: goal,
                });
            }
            let left = gk21(f, p.a, mid)?;
            let right = gk21(f, mid, p.b)?;
            self.evaluations += 42;
            self.panels[worst] = left;
            self.panels.push(right);
            subdivisions += 1;
        }
    }
}

/// Integrate `f` over `domain`.
///
/// Finite domains use globally adaptive 21-point Gauss–Kronrod bisection.
/// Half-infinite domains require `opts.decay`: the integral is computed on
/// `[lo, T]` and the remainder past `T` is bounded by `M e^{-alpha T} / alpha`,
/// with `T` pushed out until that bound is at most half the error target.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    domain: Interval,
    opts: &QuadOptions,
) -> Result<QuadratureResult, NumericsError> {
    integrate_with_points(f, domain, &[], opts)
}

/// As [`integrate`], with known non-smooth points that become panel edges.
pub fn integrate_with_points<F: Fn(f64) -> f64>(
    f: F,
    domain: Interval,
    points: &[f64],
    opts: &QuadOptions,
) -> Result<QuadratureResult, NumericsError> {
    if !(opts.rel_tol > 0.0) || opts.abs_tol < 0.0 {
        return Err(NumericsError::InvalidInput(format!(
            "quadrature tolerances must be positive (rel_tol={}, abs_tol={})",
            opts.rel_tol, opts.abs_tol
        )));
    }
    let lo = domain.lo();
    let finite_hi = if domain.is_finite() {
        domain.hi()
    } else {
        let decay = opts.decay.ok_or(NumericsError::NonIntegrable)?;
        // at least one decay length past the certified region
        lo.max(decay.t0) + 1.0 / decay.alpha
    };

    let mut edges: Vec<f64> = points.iter().copied().filter(|&x| x > lo && x < finite_hi).collect();
    edges.sort_by(f64::total_cmp);
    edges.dedup();

    let mut adaptive = Adaptive::new();
    let mut a = lo;
    for &x in edges.iter().chain(std::iter::once(&finite_hi)) {
        adaptive.push(&f, a, x)?;
        a = x;
    }

    // finite part gets half the budget when a tail remainder is to be added
    let share = if domain.is_finite() { 1.0 } else { 0.5 };
    let target = |v: f64| share * opts.target(v);
    let (mut value, mut error) = adaptive.refine(&f, opts.max_subdivisions, target)?;

    if domain.is_finite() {
        return Ok(QuadratureResult {
            value,
            error_bound: error,
            evaluations: adaptive.evaluations,
        });
    }

    let decay = opts.decay.expect("checked above");
    let mut cut = finite_hi;
    for _ in 0..64 {
        let remainder = decay.tail_bound(cut);
        let goal = (0.5 * opts.target(value)).max(f64::MIN_POSITIVE);
        if remainder <= goal {
            return Ok(QuadratureResult {
                value,
                error_bound: error + remainder,
                evaluations: adaptive.evaluations,
            });
        }
        let needed = (decay.m / (decay.alpha * goal)).ln() / decay.alpha;
        let next = needed.max(cut + 1.0 / decay.alpha).min(cut + 64.0 / decay.alpha);
        let mut extension = Adaptive::new();
        extension.push(&f, cut, next)?;
        let (v, e) = extension.refine(&f, opts.max_subdivisions, |v| target(value + v))?;
        adaptive.evaluations += extension.evaluations;
        value += v;
        error += e;
        cut = next;
    }
    Err(NumericsError::ToleranceNotMet {
        subdivisions: opts.max_subdivisions,
        error: error + decay.tail_bound(cut),
        target: opts.target(value),
    })
}
