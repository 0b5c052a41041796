//! Independent oracles for the integration tests: closed-form factors,
//! brute-force Pauli matrices and trace-formula PTMs built from plain
//! matrix arithmetic, and seeded random inputs.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type CMat = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// Closed-form reconstruction factors for ⟨σ_z^⊗n⟩.

pub fn bit_flip_factor(n: usize, p: f64, mu: f64) -> f64 {
    match n {
        1 => 1.0 / (1.0 - 2.0 * p),
        2 => 1.0 / (1.0 + 4.0 * (mu - 1.0) * (1.0 - p) * p),
        3 => 1.0 / ((1.0 - 2.0 * p) * (1.0 + 4.0 * (mu - 1.0).powi(2) * (p - 1.0) * p)),
        _ => unreachable!(),
    }
}

pub fn depolarizing_factor(n: usize, q: f64, mu: f64) -> f64 {
    match n {
        1 => 1.0 / (1.0 - q),
        2 => 1.0 / (1.0 + (mu - 1.0) * (2.0 - q) * q),
        3 => 1.0 / ((1.0 - q) * (1.0 + (mu - 1.0).powi(2) * (q - 2.0) * q)),
        _ => unreachable!(),
    }
}

/// Per-step attenuation of ⟨σ_z^⊗3⟩ under the three-qubit depolarizing channel.
pub fn depolarizing_lambda3(q: f64, mu: f64) -> f64 {
    (1.0 - q) * (1.0 + (mu - 1.0).powi(2) * (q - 2.0) * q)
}

pub fn amp_f(eta: f64, mu: f64) -> f64 {
    1.0 / (2.0 * (mu * (eta - eta.sqrt()) - eta) * (mu * (eta - 1.0) - eta))
}

pub fn amp_g(eta: f64, mu: f64) -> f64 {
    1.0 / (eta + mu * (1.0 - eta)).powi(2)
}

// Brute-force matrices.

pub fn sigma(a: u8) -> CMat {
    let v = match a {
        0 => [c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)],
        1 => [c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)],
        2 => [c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)],
        3 => [c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)],
        _ => unreachable!(),
    };
    DMatrix::from_row_slice(2, 2, &v)
}

/// `σ_{α₁} ⊗ … ⊗ σ_{αₙ}` with `α₁` the most significant base-4 digit of `k`.
pub fn pauli_matrix(n: usize, k: usize) -> CMat {
    let mut out = DMatrix::from_element(1, 1, c(1., 0.));
    for i in 0..n {
        let digit = (k >> (2 * (n - 1 - i))) & 3;
        out = out.kronecker(&sigma(digit as u8));
    }
    out
}

pub fn label_index(label: &str) -> usize {
    label.chars().fold(0, |acc, ch| {
        4 * acc
            + match ch {
                'I' => 0,
                'X' => 1,
                'Y' => 2,
                'Z' => 3,
                _ => panic!("bad label"),
            }
    })
}

pub fn apply_kraus(ops: &[CMat], rho: &CMat) -> CMat {
    ops.iter().fold(DMatrix::zeros(rho.nrows(), rho.ncols()), |acc, k| {
        acc + k * rho * k.adjoint()
    })
}

/// `Γⱼq = Tr[𝒫ⱼ Φ(𝒫q)]/d` by direct traces.
pub fn trace_ptm(n: usize, ops: &[CMat]) -> DMatrix<f64> {
    let d = 1usize << n;
    let side = d * d;
    let paulis: Vec<CMat> = (0..side).map(|k| pauli_matrix(n, k)).collect();
    DMatrix::from_fn(side, side, |j, q| {
        let out = apply_kraus(ops, &paulis[q]);
        (&paulis[j] * out).trace().re / d as f64
    })
}

pub fn amplitude_damping_kraus(eta: f64) -> [CMat; 2] {
    let e0 = DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(eta.sqrt(), 0.)]);
    let e1 = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c((1.0 - eta).sqrt(), 0.), c(0., 0.), c(0., 0.)]);
    [e0, e1]
}

/// Memoryless ops weighted by `√(1−μ)` followed by the memoryful pair
/// weighted by `√μ`.
pub fn correlated_amplitude_damping_kraus(eta: f64, mu: f64) -> Vec<CMat> {
    let [e0, e1] = amplitude_damping_kraus(eta);
    let mut ops = Vec::new();
    let s0 = c((1.0 - mu).sqrt(), 0.);
    for a in [&e0, &e1] {
        for b in [&e0, &e1] {
            ops.push(a.kronecker(b) * s0);
        }
    }
    let s1 = c(mu.sqrt(), 0.);
    let mut b0 = CMat::identity(4, 4);
    b0[(3, 3)] = c(eta.sqrt(), 0.);
    let mut b1 = CMat::zeros(4, 4);
    b1[(0, 3)] = c((1.0 - eta).sqrt(), 0.);
    ops.push(b0 * s1);
    ops.push(b1 * s1);
    ops
}

/// Markov-chain weights by explicit enumeration of digit strings.
pub fn markov_weights(n: usize, p: [f64; 4], mu: f64) -> Vec<f64> {
    (0..1usize << (2 * n))
        .map(|k| {
            let digits: Vec<usize> = (0..n).map(|i| (k >> (2 * (n - 1 - i))) & 3).collect();
            let mut w = p[digits[0]];
            for pair in digits.windows(2) {
                let delta = if pair[0] == pair[1] { 1.0 } else { 0.0 };
                w *= (1.0 - mu) * p[pair[1]] + mu * delta;
            }
            w
        })
        .collect()
}

pub fn pauli_kraus(n: usize, weights: &[f64]) -> Vec<CMat> {
    weights
        .iter()
        .enumerate()
        .filter(|(_, w)| **w > 0.0)
        .map(|(k, w)| pauli_matrix(n, k) * c(w.sqrt(), 0.))
        .collect()
}

// Seeded random inputs.

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `GG†/Tr[GG†]` for a complex Ginibre `G`.
pub fn random_state(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let d = 1usize << n;
    let g = DMatrix::from_fn(d, d, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

/// Random real coefficients on a random subset of Pauli strings.
pub fn random_terms(n: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, f64)> {
    let side = 1usize << (2 * n);
    let r = rng.random_range(1..=side.min(6));
    let mut out: Vec<(usize, f64)> = Vec::new();
    while out.len() < r {
        let k = rng.random_range(0..side);
        if out.iter().all(|(j, _)| *j != k) {
            out.push((k, rng.random::<f64>() * 4.0 - 2.0));
        }
    }
    out.sort_by_key(|(k, _)| *k);
    out
}

pub fn terms_matrix(n: usize, terms: &[(usize, f64)]) -> CMat {
    let d = 1usize << n;
    terms.iter().fold(CMat::zeros(d, d), |acc, (k, v)| acc + pauli_matrix(n, *k) * c(*v, 0.))
}

pub fn expectation(rho: &CMat, obs: &CMat) -> f64 {
    (rho * obs).trace().re
}

pub fn random_probability_vector(rng: &mut ChaCha8Rng, max_error: f64) -> [f64; 4] {
    let mut errs = [0.0; 3];
    for e in &mut errs {
        *e = rng.random::<f64>();
    }
    let total: f64 = errs.iter().sum();
    let scale = rng.random::<f64>() * max_error / total;
    let [x, y, z] = errs.map(|e| e * scale);
    [1.0 - x - y - z, x, y, z]
}

pub fn max_abs(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Pass/fail line for the acceptance log.
pub fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("criterion {id} [{status}] {name}: {detail}");
}
