//! Acceptance gate. Each criterion writes one `PASS`/`FAIL` line to stderr,
//! bypassing the harness capture, then asserts.

use std::io::Write;
use std::time::{Duration, Instant};

use isoratio::lemma_oracle::{
    exact_split_integers, random_penalty_search, random_search_counterexample, rational_to_f64, split_lhs, split_rhs,
    Exponent, SplitInstance,
};
use isoratio::profile::{annulus_oracle, liminf_small_volume_ratio, profile};
use isoratio::ratios::{check_theorem_ste4, istar, minimize_iflat};
use isoratio::warped_geometry::{check_conditions, Family, SurfaceOfRevolution, WarpingFunction};
use isoratio_cli::commands::verify;
use isoratio_cli::Exit;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn exp_cusp() -> SurfaceOfRevolution {
    SurfaceOfRevolution::with_defaults(1, WarpingFunction::exp_cusp()).unwrap()
}

fn gaussian() -> SurfaceOfRevolution {
    SurfaceOfRevolution::with_defaults(1, WarpingFunction::gaussian_cusp()).unwrap()
}

fn cusps() -> [(&'static str, SurfaceOfRevolution); 2] {
    [("exp", exp_cusp()), ("gaussian", gaussian())]
}

fn gate(id: u32, name: &str, budget: Duration, body: impl FnOnce() -> (bool, String)) {
    let start = Instant::now();
    let (ok, detail) = body();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let tag = if ok && in_time { "PASS" } else { "FAIL" };
    let line = format!(
        "{tag} criterion {id} {name}: {detail} [{:.3} s of {:.1} s]",
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    let _ = writeln!(std::io::stderr(), "{line}");
    assert!(ok && in_time, "{line}");
}

fn secs(s: f64) -> Duration {
    Duration::from_secs_f64(s)
}

#[test]
fn criterion_1_exp_cusp_small_volume_constant() {
    let s = exp_cusp();
    gate(1, "C1 = 1 on the exponential cusp", secs(1.0), || {
        let est = liminf_small_volume_ratio(&s).unwrap();
        let ok = est.stable && !est.diverges && (est.value - 1.0).abs() <= 1e-6;
        (
            ok,
            format!("C1 = {:e} (|C1 - 1| = {:e})", est.value, (est.value - 1.0).abs()),
        )
    });
}

#[test]
fn criterion_2_exp_cusp_hypothesis_chain() {
    let s = exp_cusp();
    gate(2, "verify on the exponential cusp", secs(5.0), || {
        let outcome = verify(&s);
        let h = check_theorem_ste4(&s).unwrap();
        let spread = h.constants.map(|c| c.spread()).unwrap_or(f64::INFINITY);
        let ok = outcome.exit == Exit::Ok
            && h.cond_i_holds
            && h.cond_ii_holds
            && h.inf_value < 1.0
            && spread <= 1e-9
            && !outcome.report.contains("FAIL");
        (
            ok,
            format!(
                "cond (i) {}, cond (ii) {}, I-flat = {:e}, chain spread {:e}",
                h.cond_i_holds, h.cond_ii_holds, h.inf_value, spread
            ),
        )
    });
}

#[test]
fn criterion_3_constant_curvature() {
    let s = exp_cusp();
    let Family::ExpCusp(cusp) = s.warping().family() else {
        unreachable!()
    };
    let t1 = cusp.t1();
    gate(3, "K = -1 beyond the blend point", secs(0.1), || {
        let worst = (0..64)
            .map(|k| {
                let t = t1 * (1.0 + (k + 1) as f64 / 16.0);
                (s.curvature(t).unwrap() + 1.0).abs()
            })
            .fold(0.0, f64::max);
        (
            worst <= 1e-8,
            format!("max |K + 1| = {worst:e} over 64 radii in ]{t1}, {}]", 5.0 * t1),
        )
    });
}

#[test]
fn criterion_4_split_lemmas() {
    gate(4, "split inequalities, random and exact", secs(5.0), || {
        let mut ok = true;
        let mut parts = Vec::new();
        for p in [Exponent::One, Exponent::Two] {
            let r = random_search_counterexample(p, 100_000, 42).unwrap();
            ok &= r.violations == 0 && r.min_margin > 0.0;
            parts.push(format!(
                "p = {}: {} violations, min margin {:e}",
                p.value(),
                r.violations,
                r.min_margin
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let f: [i64; 5] = std::array::from_fn(|_| rng.gen_range(1..=1000));
            let inst = SplitInstance::new(f[0] as f64, f[1] as f64, f[2] as f64, f[3] as f64, f[4] as f64).unwrap();
            for p in [Exponent::One, Exponent::Two] {
                let ex = exact_split_integers(f, p).unwrap();
                let (lhs, rhs) = (rational_to_f64(&ex.lhs), rational_to_f64(&ex.rhs));
                worst = worst
                    .max((split_lhs(&inst, p) - lhs).abs() / lhs)
                    .max((split_rhs(&inst, p) - rhs).abs() / rhs);
                ok &= ex.lhs > ex.rhs;
            }
        }
        ok &= worst <= 1e-12;
        parts.push(format!("exact vs float on 10 integer instances: worst rel {worst:e}"));
        (ok, parts.join("; "))
    });
}

#[test]
fn criterion_5_profile_symmetry() {
    let surfaces = cusps();
    gate(5, "I(V) = I(A - V)", secs(2.0), || {
        let mut ok = true;
        let mut parts = Vec::new();
        for (name, s) in &surfaces {
            let a = s.total_volume();
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let worst = (0..100)
                .map(|_| {
                    let v = rng.gen_range(1e-6..1.0 - 1e-6) * a;
                    let lo = profile(s, v).unwrap().value;
                    let hi = profile(s, a - v).unwrap().value;
                    (lo - hi).abs() / lo.max(hi)
                })
                .fold(0.0, f64::max);
            ok &= worst <= 1e-9;
            parts.push(format!("{name} max asymmetry {worst:e}"));
        }
        (ok, parts.join("; "))
    });
}

#[test]
fn criterion_6_starred_ratio_vanishes_at_the_ends() {
    let s = exp_cusp();
    gate(6, "I-star vanishes at both ends", secs(2.0), || {
        let a = s.total_volume();
        let mid = istar(&s, 0.5 * a).unwrap();
        let low = istar(&s, 1e-4 * a).unwrap() / mid;
        let high = istar(&s, (1.0 - 1e-4) * a).unwrap() / mid;
        let approach = |side: fn(f64) -> f64| -> Vec<f64> {
            (0..8)
                .map(|k| istar(&s, a * side(10f64.powf(-1.0 - 3.0 * k as f64 / 7.0))).unwrap())
                .collect()
        };
        let lower = approach(|x| x);
        let upper = approach(|x| 1.0 - x);
        let decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
        let ok = low < 1e-2 && high < 1e-2 && decreasing(&lower) && decreasing(&upper);
        (
            ok,
            format!(
                "I*(1e-4 A)/I*(A/2) = {low:e}, I*((1-1e-4) A)/I*(A/2) = {high:e}, monotone {}/{}",
                decreasing(&lower),
                decreasing(&upper)
            ),
        )
    });
}

/// `2t / (1 - e^{-t^2})`, the flat ratio of the circle at radius `t`.
fn gaussian_ratio(t: f64) -> f64 {
    2.0 * t / (-(-t * t).exp_m1())
}

#[test]
fn criterion_7_gaussian_minimiser() {
    let s = gaussian();
    gate(7, "Gaussian minimiser against brute force", secs(10.0), || {
        let cert = minimize_iflat(&s).unwrap();
        let t = cert.radius;
        let residual = ((t * t).exp() - 1.0 - 2.0 * t * t).abs();
        let n = 1_000_000;
        let brute = (1..=n)
            .map(|i| gaussian_ratio(6.0 * i as f64 / n as f64))
            .fold(f64::INFINITY, f64::min);
        let rel = (cert.value - brute).abs() / brute;
        let ok = residual <= 1e-6 && rel <= 1e-6;
        (
            ok,
            format!(
                "t0 = {t:e}, residual {residual:e}, value {:e} vs grid {brute:e} (rel {rel:e})",
                cert.value
            ),
        )
    });
}

#[test]
fn criterion_8_connectedness_penalty() {
    let surfaces = cusps();
    gate(8, "disconnected annuli pay a penalty", secs(10.0), || {
        let mut ok = true;
        let mut parts = Vec::new();
        for (name, s) in &surfaces {
            let r = random_penalty_search(s, 1000, 8).unwrap();
            ok &= r.failures == 0 && r.min_margin > 0.0;
            parts.push(format!(
                "{name}: {} failures in {}, min margin {:e}",
                r.failures, r.pairs, r.min_margin
            ));
        }
        (ok, parts.join("; "))
    });
}

#[test]
fn criterion_9_annulus_oracle_dominance() {
    let surfaces = cusps();
    gate(9, "annuli never beat the profile", secs(30.0), || {
        let mut ok = true;
        let mut parts = Vec::new();
        for (name, s) in &surfaces {
            let conditions = check_conditions(s).all_hold();
            let a = s.total_volume();
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let worst = (0..100)
                .map(|_| {
                    let v = rng.gen_range(1e-3..1.0 - 1e-3) * a;
                    let oracle = annulus_oracle(s, v, 256).unwrap().perimeter;
                    profile(s, v).unwrap().value - oracle
                })
                .fold(f64::NEG_INFINITY, f64::max);
            ok &= conditions && worst <= 1e-9;
            parts.push(format!(
                "{name}: conditions {conditions}, max(profile - annulus) {worst:e}"
            ));
        }
        (ok, parts.join("; "))
    });
}
