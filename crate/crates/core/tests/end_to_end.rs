use isoratio::lemma_oracle::{
    check_split, disconnection_penalty, random_annulus_pair, random_penalty_search, random_search_counterexample,
    summed_slack, Exponent, SplitInstance,
};
use isoratio::profile::{liminf_small_volume_ratio, profile, profile_sweep};
use isoratio::ratios::{istar, minimize_iflat, ratio_curve};
use isoratio::warped_geometry::{check_conditions, SurfaceOfRevolution, WarpingFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn surfaces() -> Vec<(&'static str, SurfaceOfRevolution)> {
    vec![
        (
            "exp",
            SurfaceOfRevolution::with_defaults(1, WarpingFunction::exp_cusp()).unwrap(),
        ),
        (
            "gaussian",
            SurfaceOfRevolution::with_defaults(1, WarpingFunction::gaussian_cusp()).unwrap(),
        ),
        (
            "power",
            SurfaceOfRevolution::with_defaults(1, WarpingFunction::power_cusp(1.5).unwrap()).unwrap(),
        ),
    ]
}

#[test]
fn split_lemmas_hold_on_large_samples() {
    for p in [Exponent::One, Exponent::Two] {
        let r = random_search_counterexample(p, 100_000, 42).unwrap();
        assert_eq!(r.violations, 0, "{r:?}");
        assert!(r.min_margin > 0.0 && r.min_relative_margin > 0.0);
        assert!(check_split(&r.argmin, p).holds);
    }
}

#[test]
fn summed_bounds_leave_a_positive_slack() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10_000 {
        let f: [f64; 5] = std::array::from_fn(|_| 10f64.powf(rng.gen_range(-6.0..6.0)));
        let s = SplitInstance::new(f[0], f[1], f[2], f[3], f[4]).unwrap();
        let x1 = 1.0 / s.a1 + 1.0 / (s.a2 + s.a3);
        let x2 = 1.0 / s.a2 + 1.0 / (s.a1 + s.a3);
        let y = 1.0 / (s.a1 + s.a2) + 1.0 / s.a3;
        let excess = y / x1 + y / x2 - 1.0;
        let slack = summed_slack(&s);
        assert!(excess > 0.0);
        assert!(
            (excess - slack).abs() <= 1e-9 * (1.0 + slack),
            "{s:?}: {excess} vs {slack}"
        );
    }
}

#[test]
fn penalty_on_every_family() {
    for (name, s) in surfaces() {
        let r = random_penalty_search(&s, 1000, 3).unwrap();
        assert_eq!(r.failures, 0, "{name}");
        assert!(r.min_margin > 0.0, "{name}");
    }
}

#[test]
fn random_annuli_are_disjoint_and_fill_their_volumes() {
    let (_, s) = surfaces().remove(1);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let (x, y) = random_annulus_pair(&s, &mut rng).unwrap();
        assert!(x.inner < x.outer && x.outer <= y.inner && y.inner < y.outer);
        let r = disconnection_penalty(&s, y, x).unwrap();
        assert!(r.instance.a1 + r.instance.a2 + r.instance.a3 <= s.total_volume() * (1.0 + 1e-12));
    }
}

#[test]
fn starred_ratio_approaches_zero_monotonically() {
    for (name, s) in surfaces().into_iter().take(2) {
        let a = s.total_volume();
        for side in [|x: f64| x, |x: f64| 1.0 - x] {
            let seq: Vec<f64> = (0..8)
                .map(|k| istar(&s, a * side(10f64.powf(-1.0 - 3.0 * k as f64 / 7.0))).unwrap())
                .collect();
            assert!(seq.windows(2).all(|w| w[1] < w[0]), "{name}: {seq:?}");
        }
    }
}

#[test]
fn conditions_and_minimisers_on_builtin_families() {
    for (name, s) in surfaces() {
        assert!(check_conditions(&s).all_hold(), "{name}");
        let cert = minimize_iflat(&s).unwrap();
        assert!(cert.interior_margin > 0.0);
        let limit = liminf_small_volume_ratio(&s).unwrap();
        assert!(cert.value < limit.value, "{name}: {} vs {}", cert.value, limit.value);
    }
}

#[test]
fn sweeps_agree_with_pointwise_evaluation() {
    let (_, s) = surfaces().remove(0);
    let a = s.total_volume();
    let grid: Vec<f64> = (0..64).map(|i| a * (i as f64 + 0.5) / 64.0).collect();
    let sweep = profile_sweep(&s, &grid).unwrap();
    let curve = ratio_curve(&s, &grid).unwrap();
    for ((v, p), c) in grid.iter().zip(&sweep).zip(&curve) {
        let single = profile(&s, *v).unwrap();
        assert_eq!(p, &single);
        assert_eq!(c.best, single.best);
        let flat = single.value * (1.0 / v + 1.0 / (a - v));
        assert!((c.iflat - flat).abs() <= 1e-14 * flat);
    }
}

#[test]
fn scaling_the_metric_scales_the_flat_minimum() {
    let (_, s) = surfaces().remove(1);
    let base = minimize_iflat(&s).unwrap();
    // f -> c f multiplies perimeters by c and volumes by c: the flat ratio
    // is unchanged in dimension one
    let scaled = s.scaled(3.0).unwrap();
    let m = minimize_iflat(&scaled).unwrap();
    assert!((m.value - base.value).abs() <= 1e-8 * base.value);
}
