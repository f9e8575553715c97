#![allow(dead_code)]

use std::f64::consts::{LN_2, PI};

use simlab::error_rate::q_function;

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

fn log2_1p_exp(x: f64) -> f64 {
    (x.max(0.0) + (-x.abs()).exp().ln_1p()) / LN_2
}

/// Mutual information of equiprobable `+-a` observed in circular complex
/// noise of variance `sigma2`, by quadrature over the in-phase noise.
pub fn binary_awgn_mi(a: f64, sigma2: f64) -> f64 {
    let s = sigma2 / 2.0;
    let sd = s.sqrt();
    let density = |n: f64| (-n * n / (2.0 * s)).exp() / (2.0 * PI * s).sqrt();
    let expect = simpson(|n| density(n) * log2_1p_exp(-2.0 * a * (a + n) / s), -12.0 * sd, 12.0 * sd, 8000);
    1.0 - expect
}

/// `E[Q(sqrt(gamma))]` for `gamma ~ Gamma(n_rx, nu_bar)` by quadrature in
/// `u = sqrt(gamma / nu_bar)`.
pub fn average_pep_quadrature(nu_bar: f64, n_rx: usize) -> f64 {
    let fact: f64 = (1..n_rx).map(|i| i as f64).product();
    let f = |u: f64| q_function((nu_bar).sqrt() * u) * u.powi(2 * n_rx as i32 - 1) * (-u * u).exp() * 2.0 / fact;
    simpson(f, 0.0, 9.0, 20_000)
}

/// Paired-sample mean difference and its standard error.
pub fn paired_diff(a: &[f64], b: &[f64]) -> (f64, f64) {
    assert_eq!(a.len(), b.len());
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    simlab::harness::sweep::mean_and_std_err(&d)
}
