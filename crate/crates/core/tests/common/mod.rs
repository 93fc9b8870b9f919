//! Reference implementations shared by the integration tests. They are kept
//! independent of the library: plain quadrature, exact rationals and
//! statrs special functions.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integral of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let mut intervals = vec![(a, b, gk15(&f, a, b))];
    for _ in 0..2000 {
        let total: f64 = intervals.iter().map(|iv| iv.2 .0).sum();
        let error: f64 = intervals.iter().map(|iv| iv.2 .1).sum();
        if error <= rel_tol * total.abs() || error < 1e-300 {
            return total;
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .unwrap();
        let (lo, hi, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        intervals.push((lo, mid, gk15(&f, lo, mid)));
        intervals.push((mid, hi, gk15(&f, mid, hi)));
    }
    panic!("quadrature did not converge on [{a}, {b}]");
}

pub fn poisson(k: u64, mean: f64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * mean.ln() - mean - statrs::function::gamma::ln_gamma(k as f64 + 1.0)).exp()
}

/// Decayed-dark count probability as the mixture over the decay time `t₁`
/// (exponential density on `[0, t]`, bright Poisson for the remainder of the
/// window, plus the no-decay atom at zero counts).
pub fn decay_mixture(k: u64, t: f64, lambda: f64, lambda_b: f64) -> f64 {
    let atom = if k == 0 { (-lambda * t).exp() } else { 0.0 };
    if lambda == 0.0 {
        return atom;
    }
    let integrand = |t1: f64| lambda * (-lambda * t1).exp() * poisson(k, lambda_b * (t - t1));
    // Split at the point where the Poisson factor peaks to help the adaptive rule.
    let peak = (t - k as f64 / lambda_b).clamp(0.0, t);
    let mut total = atom;
    for (a, b) in [(0.0, peak), (peak, t)] {
        if b > a {
            total += integrate(integrand, a, b, 1e-12);
        }
    }
    total
}

/// Decayed-dark mixture convolved with Poisson background noise.
pub fn dark_mixture(k: u64, t: f64, lambda: f64, lambda_b: f64, lambda_d: f64) -> f64 {
    (0..=k)
        .map(|j| poisson(j, lambda_d * t) * decay_mixture(k - j, t, lambda, lambda_b))
        .sum()
}

/// `meanᵏ e^(−mean)/k!` with `e^(−mean)` as a rational Taylor sum; `mean` is
/// given as a ratio of integers so the whole computation is exact until the
/// final division.
pub fn poisson_rational(k: u64, num: i64, den: i64) -> f64 {
    let mean = BigRational::new(BigInt::from(num), BigInt::from(den));
    let mut exp_neg = BigRational::zero();
    let mut term = BigRational::one();
    // Alternating series; 200 terms is far past convergence for means below 40.
    for n in 1..=200u32 {
        exp_neg += &term;
        term = -term * &mean / BigRational::from_integer(BigInt::from(n));
    }
    let mut power = BigRational::one();
    let mut factorial = BigInt::one();
    for i in 1..=k {
        power *= &mean;
        factorial *= BigInt::from(i);
    }
    let value = power * exp_neg / BigRational::from_integer(factorial);
    value.to_f64().unwrap()
}

pub fn rel_err(actual: f64, expected: f64) -> f64 {
    if expected == 0.0 {
        actual.abs()
    } else {
        ((actual - expected) / expected).abs()
    }
}

/// Compares `closed_form(k, t, λ, λ_B)` with [`decay_mixture`] over
/// `λ ∈ {1e-4, 0.05, 1}`, `λ_B ∈ {3, 25}`, `t ∈ {0.5, 1, 2}` and every `k`
/// whose oracle value exceeds `1e-12`. Returns the number of points compared
/// and the worst relative error with its location.
pub fn decay_grid_check(closed_form: impl Fn(u64, f64, f64, f64) -> f64) -> (usize, f64, String) {
    let mut checked = 0;
    let mut worst = (0.0, String::new());
    for lambda in [1e-4, 0.05, 1.0] {
        for lambda_b in [3.0, 25.0] {
            for t in [0.5, 1.0, 2.0] {
                let mean: f64 = lambda_b * t;
                // Far enough past the bright mean that the Poisson factor is below 1e-12.
                let k_limit = (mean + 12.0 * mean.sqrt() + 30.0) as u64;
                for k in 0..=k_limit {
                    let expected = decay_mixture(k, t, lambda, lambda_b);
                    if expected <= 1e-12 {
                        continue;
                    }
                    let err = rel_err(closed_form(k, t, lambda, lambda_b), expected);
                    checked += 1;
                    if err > worst.0 {
                        worst = (err, format!("lambda={lambda} lambda_b={lambda_b} t={t} k={k}"));
                    }
                }
            }
        }
    }
    (checked, worst.0, worst.1)
}
