use super::NumericsError;

const MIN_SAMPLES: usize = 8;
const TAIL: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtrapolationOptions {
    /// Agreement required between the last three estimates, relative to the
    /// larger of the limit and the largest sample magnitude.
    pub rel_tol: f64,
    /// Absolute floor for the agreement test (limits equal to zero).
    pub abs_floor: f64,
    /// An increasing tail above this value is reported as divergent.
    pub blowup_threshold: f64,
}

impl Default for ExtrapolationOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_floor: 1e-12,
            blowup_threshold: 1e8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitEstimate {
    /// Extrapolated limit; `+inf` when the tail diverges.
    pub value: f64,
    pub stable: bool,
    pub diverges: bool,
    /// The raw tail increments change sign at least twice.
    pub oscillating: bool,
    /// Smallest of the last eight raw samples.
    pub tail_infimum: f64,
    /// Successive Richardson estimates, one per adjacent sample pair.
    pub estimates: Vec<f64>,
}

/// Estimate `lim s(x)` as `x -> inf` from samples `(x_k, s_k)` taken at
/// increasing arguments.
///
/// Each adjacent pair is extrapolated linearly in `h = 1/x` to `h = 0`, which
/// is exact for `s = L + c/x` and for eventually constant sequences. The
/// result is stable when the last three estimates agree.
pub fn extrapolate_limit(samples: &[(f64, f64)], opts: &ExtrapolationOptions) -> Result<LimitEstimate, NumericsError> {
    if samples.len() < MIN_SAMPLES {
        return Err(NumericsError::InvalidInput(format!(
            "need at least {MIN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if samples.windows(2).any(|w| !(w[1].0 > w[0].0) || w[0].0 <= 0.0) {
        return Err(NumericsError::InvalidInput(
            "sample arguments must be positive and increasing".into(),
        ));
    }
    if samples.iter().any(|s| s.1.is_nan()) {
        return Err(NumericsError::InvalidInput("samples contain NaN".into()));
    }

    let values: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let tail = &values[values.len() - TAIL..];
    let tail_infimum = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let increments: Vec<f64> = tail.windows(2).map(|w| w[1] - w[0]).collect();
    let sign_changes = increments
        .windows(2)
        .filter(|w| w[0] != 0.0 && w[1] != 0.0 && w[0].signum() != w[1].signum())
        .count();
    let oscillating = sign_changes >= 2;

    let last4 = &increments[increments.len() - 3..];
    let increasing = last4.iter().all(|&d| d > 0.0);
    let not_shrinking = last4[2] >= last4[0];
    let last = *values.last().expect("nonempty");
    let diverges = increasing && (not_shrinking || last > opts.blowup_threshold) || last == f64::INFINITY;

    let estimates: Vec<f64> = samples
        .windows(2)
        .map(|w| {
            let (h0, h1) = (1.0 / w[0].0, 1.0 / w[1].0);
            w[1].1 - (w[1].1 - w[0].1) * h1 / (h1 - h0)
        })
        .collect();

    if diverges {
        return Ok(LimitEstimate {
            value: f64::INFINITY,
            stable: true,
            diverges: true,
            oscillating,
            tail_infimum,
            estimates,
        });
    }

    let recent = &estimates[estimates.len() - 3..];
    let value = recent[2];
    let scale = values.iter().fold(value.abs(), |m, v| m.max(v.abs()));
    let slack = (opts.rel_tol * scale).max(opts.abs_floor);
    let stable = recent.iter().all(|e| (e - value).abs() <= slack);
    Ok(LimitEstimate {
        value,
        stable,
        diverges: false,
        oscillating,
        tail_infimum,
        estimates,
    })
}

/// [`extrapolate_limit`] for a sequence indexed `1..=count` (argument = index).
pub fn extrapolate_sequence<S: Fn(usize) -> f64>(
    seq: S,
    count: usize,
    opts: &ExtrapolationOptions,
) -> Result<LimitEstimate, NumericsError> {
    let samples: Vec<(f64, f64)> = (1..=count).map(|k| (k as f64, seq(k))).collect();
    extrapolate_limit(&samples, opts)
}
