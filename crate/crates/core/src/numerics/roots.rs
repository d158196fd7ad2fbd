use super::{Interval, NumericsError};

const MAX_ITER: usize = 200;
const MAX_EXPANSION: f64 = 1e6;

/// Solve `f(t) = target` for a strictly monotone `f` on `bracket`.
///
/// Brent's method, so the root stays bracketed throughout. Stops when
/// `|f(t) - target| <= tol * |target|` (`tol` itself for a zero target) or
/// when the bracket has collapsed to a few ulps. A half-infinite bracket is
/// searched outward by doubling, up to a width of `1e6`.
pub fn solve_monotone<F: Fn(f64) -> f64>(f: F, target: f64, bracket: Interval, tol: f64) -> Result<f64, NumericsError> {
    if !(tol > 0.0) || !target.is_finite() {
        return Err(NumericsError::InvalidInput(format!(
            "solve_monotone needs tol > 0 and a finite target (tol={tol}, target={target})"
        )));
    }
    let g = |t: f64| f(t) - target;
    let lo = bracket.lo();
    let g_lo = g(lo);
    if g_lo.is_nan() {
        return Err(NumericsError::NotBracketed { lo, hi: bracket.hi() });
    }
    if g_lo == 0.0 {
        return Ok(lo);
    }

    let (hi, g_hi) = if bracket.is_finite() {
        (bracket.hi(), g(bracket.hi()))
    } else {
        let mut step = 1.0f64.max(lo.abs());
        loop {
            let hi = lo + step;
            let g_hi = g(hi);
            if g_hi.is_nan() {
                return Err(NumericsError::NotBracketed { lo, hi });
            }
            if g_hi == 0.0 || g_hi.signum() != g_lo.signum() {
                break (hi, g_hi);
            }
            if step > MAX_EXPANSION {
                return Err(NumericsError::TargetOutOfRange { target });
            }
            step *= 2.0;
        }
    };
    if g_hi.is_nan() {
        return Err(NumericsError::NotBracketed { lo, hi });
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    if g_hi.signum() == g_lo.signum() {
        return Err(NumericsError::TargetOutOfRange { target });
    }

    let scale = if target != 0.0 { target.abs() } else { 1.0 };
    brent(g, lo, hi, g_lo, g_hi, tol * scale)
}

/// Locate a sign change of `f` on `[lo, hi]` (no monotonicity assumed).
pub fn bisect_sign_change<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, xtol: f64) -> Result<f64, NumericsError> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.signum() != fb.signum()) || fa.is_nan() || fb.is_nan() {
        return Err(NumericsError::NotBracketed { lo, hi });
    }
    for _ in 0..MAX_ITER {
        let m = 0.5 * (a + b);
        if (b - a) <= xtol || m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

fn brent<G: Fn(f64) -> f64>(g: G, a0: f64, b0: f64, ga: f64, gb: f64, ftol: f64) -> Result<f64, NumericsError> {
    let (mut a, mut b, mut fa, mut fb) = (a0, b0, ga, gb);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let xtol = 2.0 * f64::EPSILON * b.abs() + 1e-300;
        let m = 0.5 * (c - b);
        if fb.abs() <= ftol || m.abs() <= xtol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= xtol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (xtol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > xtol { d } else { xtol.copysign(m) };
        fb = g(b);
        if fb.is_nan() {
            return Err(NumericsError::NotBracketed { lo: a0, hi: b0 });
        }
    }
    Ok(b)
}
