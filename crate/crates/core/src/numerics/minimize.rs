use super::{Interval, NumericsError};

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const MIN_GRID: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub argmin: f64,
    pub value: f64,
}

fn score(y: f64) -> f64 {
    if y.is_nan() {
        f64::INFINITY
    } else {
        y
    }
}

/// Golden-section search on `[a, b]`, stopping once the bracket is narrower
/// than `tol * (1 + |x|)`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> Minimum {
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = score(f(x1));
    let mut f2 = score(f(x2));
    for _ in 0..300 {
        if (b - a) <= tol * (1.0 + 0.5 * (a + b).abs()) {
            break;
        }
        // ties move toward the left end
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = score(f(x1));
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = score(f(x2));
        }
    }
    if f1 <= f2 {
        Minimum { argmin: x1, value: f1 }
    } else {
        Minimum { argmin: x2, value: f2 }
    }
}

/// Global minimum of `f` on a finite interval: a uniform scan over
/// `grid_points` nodes (endpoints included) picks the best node, then
/// golden-section refines the bracket formed by its two neighbours.
///
/// Ties go to the smallest argument. There is no failure mode beyond invalid
/// input; callers inspect the returned point for boundary proximity.
pub fn minimize_1d<F: Fn(f64) -> f64>(
    f: F,
    domain: Interval,
    grid_points: usize,
    tol: f64,
) -> Result<Minimum, NumericsError> {
    if !domain.is_finite() {
        return Err(NumericsError::InvalidInput("minimize_1d needs a finite domain".into()));
    }
    if grid_points < MIN_GRID {
        return Err(NumericsError::InvalidInput(format!(
            "minimize_1d needs at least {MIN_GRID} grid points (got {grid_points})"
        )));
    }
    if !(tol > 0.0) {
        return Err(NumericsError::InvalidInput(format!(
            "tolerance must be positive (got {tol})"
        )));
    }
    let (lo, hi) = (domain.lo(), domain.hi());
    let step = (hi - lo) / (grid_points - 1) as f64;
    let node = |i: usize| if i + 1 == grid_points { hi } else { lo + step * i as f64 };

    let mut best_i = 0;
    let mut best = score(f(lo));
    for i in 1..grid_points {
        let y = score(f(node(i)));
        if y < best {
            best = y;
            best_i = i;
        }
    }

    let a = node(best_i.saturating_sub(1));
    let b = node((best_i + 1).min(grid_points - 1));
    let refined = golden_section(&f, a, b, tol);
    let grid_min = Minimum {
        argmin: node(best_i),
        value: best,
    };
    let better =
        refined.value < grid_min.value || (refined.value == grid_min.value && refined.argmin < grid_min.argmin);
    Ok(if better { refined } else { grid_min })
}
