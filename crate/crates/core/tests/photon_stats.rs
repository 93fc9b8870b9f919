mod common;

use common::{dark_mixture, decay_grid_check, poisson, poisson_rational, rel_err};
use iontomo_core::photon_stats::*;
use proptest::prelude::*;

fn params(t: f64, lambda: f64, lambda_b: f64, lambda_d: f64) -> FluorescenceParams {
    FluorescenceParams::new(t, lambda, lambda_b, lambda_d).unwrap()
}

fn dists(p: &FluorescenceParams) -> (CountDistribution, CountDistribution) {
    let trunc = Truncation::default();
    (
        bright_distribution(p, BrightChannel::FluorescenceOnly, &trunc).unwrap(),
        dark_distribution(p, &trunc).unwrap(),
    )
}

#[test]
fn decay_pmf_matches_quadrature_of_mixture() {
    let (checked, worst, at) = decay_grid_check(|k, t, lambda, lambda_b| {
        dark_decay_pmf(k, &params(t, lambda, lambda_b, 0.0)).unwrap()
    });
    assert!(checked > 500, "only {checked} points");
    assert!(worst < 1e-8, "relative error {worst} at {at}");
}

#[test]
fn dark_distribution_matches_noisy_mixture() {
    for p in [FluorescenceParams::well_resolved(), FluorescenceParams::poorly_resolved()] {
        let (_, dark) = dists(&p);
        for k in 0..40 {
            let expected = dark_mixture(
                k as u64,
                p.detection_time,
                p.decay_rate,
                p.bright_rate,
                p.background_rate,
            );
            if expected > 1e-12 {
                assert!(rel_err(dark.prob(k), expected) < 1e-8, "k={k}");
            }
        }
    }
}

#[test]
fn poisson_matches_exact_rational() {
    // Means 1/4, 3, 25 and 123/10.
    for (num, den) in [(1, 4), (3, 1), (25, 1), (123, 10)] {
        let mean = num as f64 / den as f64;
        for k in 0..=30 {
            let exact = poisson_rational(k, num, den);
            assert!(rel_err(poisson_pmf(k, mean).unwrap(), exact) < 1e-12, "mean={mean} k={k}");
        }
    }
}

#[test]
fn bright_table_is_poisson() {
    let (bright, _) = dists(&FluorescenceParams::well_resolved());
    for k in 0..=30 {
        assert!(rel_err(bright.prob(k), poisson_rational(k as u64, 25, 1)) < 1e-12);
    }
    assert!((bright.mean() - 25.0).abs() < 1e-9);
}

/// `G⁽ᵏ⁾(0)/k!` by forward differences `Δₕᵏ G(0)/hᵏ` taken at steps
/// `h = 0.75ʲ/k` for `j = 0..8` (so every node stays in `[0, 1]`), then
/// extrapolated to `h → 0` with Neville's scheme. The difference quotient is a
/// power series in `h`, which is what polynomial extrapolation assumes.
fn taylor_coefficient(k: u32, f: impl Fn(f64) -> f64) -> f64 {
    let steps: Vec<f64> = (0..8).map(|j| 0.75f64.powi(j) / k as f64).collect();
    let mut table: Vec<f64> = steps
        .iter()
        .map(|&h| {
            let mut diff = 0.0;
            let mut binom = 1.0;
            for j in 0..=k {
                let sign = if (k - j).is_multiple_of(2) { 1.0 } else { -1.0 };
                diff += sign * binom * f(j as f64 * h);
                binom = binom * (k - j) as f64 / (j + 1) as f64;
            }
            let factorial: f64 = (1..=k).map(f64::from).product();
            diff / h.powi(k as i32) / factorial
        })
        .collect();
    for m in 1..steps.len() {
        for i in 0..steps.len() - m {
            table[i] = (steps[i + m] * table[i] - steps[i] * table[i + 1]) / (steps[i + m] - steps[i]);
        }
    }
    table[0]
}

#[test]
fn generating_function_derivatives_give_pmf() {
    for p in [params(1.0, 1.0, 3.0, 0.05), params(1.0, 1.0, 3.0, 0.0), params(1.0, 2.0, 4.0, 0.1)] {
        let (_, dark) = dists(&p);
        let g = |z: f64| generating_function(z, &p, true).unwrap();
        assert!(rel_err(g(0.0), dark.prob(0)) < 1e-12);
        for k in 1..=6 {
            let numeric = taylor_coefficient(k, g);
            assert!(
                rel_err(numeric, dark.prob(k as usize)) < 1e-4,
                "{p:?} k={k}: {numeric} vs {}",
                dark.prob(k as usize)
            );
        }
    }
}

#[test]
fn generating_function_at_zero_is_zero_count_probability() {
    for p in [FluorescenceParams::well_resolved(), FluorescenceParams::poorly_resolved()] {
        let (_, dark) = dists(&p);
        assert!(rel_err(generating_function(0.0, &p, true).unwrap(), dark.prob(0)) < 1e-12);
    }
}

#[test]
fn closed_form_moments_match_pmf_sums() {
    for p in [
        FluorescenceParams::poorly_resolved(),
        FluorescenceParams::well_resolved(),
        params(1.0, 1e3, 25.0, 0.2),
        params(2.0, 1.0, 3.0, 0.0),
    ] {
        let noiseless = params(p.detection_time, p.decay_rate, p.bright_rate, 0.0);
        let (_, dark) = dists(&noiseless);
        let m = factorial_moments(&p).unwrap();
        let mean: f64 = dark.pmf().iter().enumerate().map(|(k, q)| k as f64 * q).sum();
        let second: f64 = dark
            .pmf()
            .iter()
            .enumerate()
            .map(|(k, q)| (k * k.saturating_sub(1)) as f64 * q)
            .sum();
        assert!(rel_err(m.mean, mean) < 1e-6, "{p:?}");
        assert!(rel_err(m.second_factorial, second) < 1e-6, "{p:?}");
        assert!(rel_err(m.variance, dark.variance()) < 1e-6, "{p:?}");
    }
}

#[test]
fn no_decay_leaves_only_noise() {
    let p = params(1.0, 0.0, 25.0, 0.2);
    let (_, dark) = dists(&p);
    for k in 0..dark.pmf().len() {
        assert!(rel_err(dark.prob(k), poisson(k as u64, 0.2)) < 1e-12, "k={k}");
    }
}

#[test]
fn fast_decay_approaches_bright_plus_noise() {
    let p = params(1.0, 1e3, 25.0, 0.2);
    let (_, dark) = dists(&p);
    let tv: f64 = 0.5 * (0..200).map(|k| (dark.prob(k) - poisson(k as u64, 25.2)).abs()).sum::<f64>();
    assert!(tv < 1e-2, "total variation {tv}");
}

#[test]
fn well_resolved_shapes() {
    let (bright, dark) = dists(&FluorescenceParams::well_resolved());
    assert_eq!(bright.mode(), 24);
    assert!((bright.mean() - 25.0).abs() < 1e-9);
    assert_eq!(dark.mode(), 0);
}

#[test]
fn reference_error_rates() {
    let (bright, dark) = dists(&FluorescenceParams::well_resolved());
    let choice = choose_threshold(&bright, &dark).unwrap();
    assert_eq!(choice.k0, 8);
    assert!(!choice.is_ambiguous());
    let model = error_rates(&bright, &dark, choice.k0);
    assert!(rel_err(model.p10, 2.29248e-5) < 1e-5, "{}", model.p10);
    assert!(rel_err(model.p01, 6.87758e-4) < 1e-5, "{}", model.p01);

    let (bright, dark) = dists(&FluorescenceParams::poorly_resolved());
    let choice = choose_threshold(&bright, &dark).unwrap();
    assert_eq!(choice.k0, 1);
    let model = error_rates(&bright, &dark, choice.k0);
    assert!(rel_err(model.p10, 0.0497871) < 1e-5, "{}", model.p10);
    assert!(rel_err(model.p01, 0.0806290) < 1e-5, "{}", model.p01);
}

#[test]
fn identical_curves_are_indistinguishable() {
    let flat = CountDistribution::from_pmf(vec![0.5, 0.5]).unwrap();
    assert!(matches!(
        choose_threshold(&flat, &flat),
        Err(iontomo_core::Error::Indistinguishable(_))
    ));
}

fn arb_params() -> impl Strategy<Value = FluorescenceParams> {
    (0.1f64..3.0, 0.0f64..5.0, 0.5f64..40.0, 0.0f64..2.0)
        .prop_map(|(t, lambda, lambda_b, lambda_d)| params(t, lambda, lambda_b, lambda_d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distributions_are_normalized(p in arb_params()) {
        let (bright, dark) = dists(&p);
        for d in [&bright, &dark] {
            let total: f64 = d.pmf().iter().sum::<f64>() + d.tail_mass();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(d.tail_mass() < 1e-11);
            prop_assert!(d.pmf().iter().all(|q| (0.0..=1.0).contains(q)));
        }
    }

    #[test]
    fn error_rates_are_monotone_in_threshold(p in arb_params()) {
        let (bright, dark) = dists(&p);
        let mut last = error_rates(&bright, &dark, 0);
        for k0 in 1..=60u64 {
            let next = error_rates(&bright, &dark, k0);
            prop_assert!(next.p10 >= last.p10);
            prop_assert!(next.p01 <= last.p01);
            last = next;
        }
    }

    #[test]
    fn generating_function_is_normalized_and_increasing(p in arb_params(), z in 0.0f64..1.0) {
        let g = generating_function(z, &p, true).unwrap();
        let g_next = generating_function((z + 0.01).min(1.0), &p, true).unwrap();
        prop_assert!(g > 0.0 && g <= 1.0 + 1e-15);
        prop_assert!(g_next >= g - 1e-15);
    }
}
