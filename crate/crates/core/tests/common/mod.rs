#![allow(dead_code)]

use carpenter::sequences::{SequenceSpec, TailRegime};

/// `d_k = λ_k + δ_k − δ_{k−1}`.
pub fn d_from_delta(lambda: &[f64], delta: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut prev = 0.0;
    (1..=lambda.len())
        .map(|k| {
            let dk = delta(k);
            let out = lambda[k - 1] + dk - prev;
            prev = dk;
            out
        })
        .collect()
}

pub fn specs(
    lambda: &[f64],
    d: &[f64],
    regime: TailRegime<f64>,
) -> (SequenceSpec<f64>, SequenceSpec<f64>) {
    (
        SequenceSpec::new(lambda.to_vec(), TailRegime::ExplicitOnly, "lambda").unwrap(),
        SequenceSpec::derived(d.to_vec(), regime, "d").unwrap(),
    )
}

/// `λ_n = n − 1`, `d_1 = 1/2`, `d_n = n − 1 − 2^{−n}`: `δ_n = 2^{−n}`.
pub fn geometric(w: usize) -> (Vec<f64>, Vec<f64>) {
    let lambda: Vec<f64> = (0..w).map(|n| n as f64).collect();
    let mut d: Vec<f64> = (1..=w)
        .map(|k| (k - 1) as f64 - 0.5f64.powi(k as i32))
        .collect();
    d[0] = 0.5;
    (lambda, d)
}

/// `λ_k = 2(k − 1)`, `δ_k = 1/k`.
pub fn harmonic(w: usize) -> (Vec<f64>, Vec<f64>) {
    let lambda: Vec<f64> = (0..w).map(|n| 2.0 * n as f64).collect();
    let d = d_from_delta(&lambda, |k| 1.0 / k as f64);
    (lambda, d)
}

/// `λ_k = ⌊(k−1)/2⌋`, `δ_1 = 1/4`, `δ_k = 1/k`: `d_1 ≥ λ_2`, so the flat
/// prefix stage is needed.
pub fn plateau(w: usize) -> (Vec<f64>, Vec<f64>) {
    let lambda: Vec<f64> = (0..w).map(|n| (n / 2) as f64).collect();
    let d = d_from_delta(&lambda, |k| if k == 1 { 0.25 } else { 1.0 / k as f64 });
    (lambda, d)
}

/// `λ_k = 3(k − 1)`, `δ_k = 1 + 1/k`, `liminf δ = 1`.
pub fn eventually_above(w: usize) -> (Vec<f64>, Vec<f64>) {
    let lambda: Vec<f64> = (0..w).map(|n| 3.0 * n as f64).collect();
    let d = d_from_delta(&lambda, |k| 1.0 + 1.0 / k as f64);
    (lambda, d)
}

/// `λ_k = 3(k − 1)`, `δ_k = 1 − 1/(k+1)` for odd `k` and `2` for even `k`:
/// `liminf δ = 1`, approached from below.
pub fn dips(w: usize) -> (Vec<f64>, Vec<f64>) {
    let lambda: Vec<f64> = (0..w).map(|n| 3.0 * n as f64).collect();
    let d = d_from_delta(&lambda, |k| {
        if k % 2 == 1 {
            1.0 - 1.0 / (k as f64 + 1.0)
        } else {
            2.0
        }
    });
    (lambda, d)
}

/// `λ_k = 3(k − 1)`; one unit moves from each odd index to the next.
pub fn paired_zeros(w: usize) -> (Vec<f64>, Vec<f64>) {
    let lambda: Vec<f64> = (0..w).map(|n| 3.0 * n as f64).collect();
    let mut d = lambda.clone();
    for k in (0..w - 1).step_by(2) {
        d[k] += 1.0;
        d[k + 1] -= 1.0;
    }
    (lambda, d)
}
