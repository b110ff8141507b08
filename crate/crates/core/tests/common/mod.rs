//! Shared test support: independent oracles for beam-splitter action, a
//! chi-square goodness-of-fit helper, and seeded random generators.
//!
//! The oracles deliberately avoid the library's binomial-expansion code path:
//! one routes every photon individually through the splitter matrix and
//! collects monomials, the other exponentiates the two-mode generator on a
//! fixed photon-number block. Both must agree with the implementation and
//! with each other.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, PI};

pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

// ---------------------------------------------------------------------------
// Routing oracle: per-photon monomial expansion
// ---------------------------------------------------------------------------

/// A splitter acting in place on two occupation positions. `matrix[0]` gives
/// the output coefficients of a photon entering the first mode, `matrix[1]`
/// of one entering the second.
#[derive(Clone, Copy)]
pub struct RoutedSplitter {
    pub mode_a: usize,
    pub mode_b: usize,
    pub matrix: [[Complex64; 2]; 2],
}

impl RoutedSplitter {
    pub fn balanced(mode_a: usize, mode_b: usize) -> Self {
        let w = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            mode_a,
            mode_b,
            matrix: [[re(w), re(w)], [re(w), re(-w)]],
        }
    }

    pub fn general(mode_a: usize, mode_b: usize, t: Complex64, r: Complex64) -> Self {
        Self {
            mode_a,
            mode_b,
            matrix: [[t, r], [r.conj(), -t.conj()]],
        }
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Applies one splitter to a term map by expanding each photon separately:
/// a term is a product of creation operators, each of which maps to a sum of
/// the two output operators, and the expanded monomials are recollected with
/// the √(n!) occupancy factors.
pub fn route_once(
    terms: &BTreeMap<Vec<u32>, Complex64>,
    splitter: &RoutedSplitter,
) -> BTreeMap<Vec<u32>, Complex64> {
    let mut out: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
    for (occ, amp) in terms {
        let mut photons = Vec::new();
        for (mode, &count) in occ.iter().enumerate() {
            for _ in 0..count {
                photons.push(mode);
            }
        }
        let input_norm: f64 = occ.iter().map(|&n| factorial(n)).product::<f64>().sqrt();

        // branches: (output counts, accumulated coefficient)
        let mut branches: Vec<(Vec<u32>, Complex64)> = vec![(vec![0; occ.len()], amp / input_norm)];
        for &mode in &photons {
            let options: Vec<(usize, Complex64)> = if mode == splitter.mode_a {
                vec![
                    (splitter.mode_a, splitter.matrix[0][0]),
                    (splitter.mode_b, splitter.matrix[0][1]),
                ]
            } else if mode == splitter.mode_b {
                vec![
                    (splitter.mode_a, splitter.matrix[1][0]),
                    (splitter.mode_b, splitter.matrix[1][1]),
                ]
            } else {
                vec![(mode, ONE)]
            };
            let mut next = Vec::with_capacity(branches.len() * options.len());
            for (counts, coef) in &branches {
                for &(target, weight) in &options {
                    let mut counts = counts.clone();
                    counts[target] += 1;
                    next.push((counts, coef * weight));
                }
            }
            branches = next;
        }
        for (counts, coef) in branches {
            let output_norm: f64 = counts.iter().map(|&n| factorial(n)).product::<f64>().sqrt();
            *out.entry(counts).or_insert(ZERO) += coef * output_norm;
        }
    }
    out.retain(|_, a| a.norm_sqr() > 1e-24);
    out
}

/// Routes a term map through a sequence of splitters.
pub fn route(
    terms: &BTreeMap<Vec<u32>, Complex64>,
    splitters: &[RoutedSplitter],
) -> BTreeMap<Vec<u32>, Complex64> {
    let mut current = terms.clone();
    for splitter in splitters {
        current = route_once(&current, splitter);
    }
    current
}

// ---------------------------------------------------------------------------
// Generator-exponential oracle for the balanced splitter
// ---------------------------------------------------------------------------

/// Balanced-splitter matrix on the two-mode block with `n` photons, computed
/// as exp((π/4)(a†b − ab†)) followed by a π phase on the second mode. Basis
/// order: k photons in the first mode, k = 0..=n.
pub fn balanced_block_matrix(n: usize) -> Vec<Vec<Complex64>> {
    let dim = n + 1;
    // Generator G = a†b − ab† on basis |k, n−k⟩.
    let mut generator = vec![vec![ZERO; dim]; dim];
    for k in 0..dim {
        let ka = k as f64;
        let kb = (n - k) as f64;
        if k + 1 < dim {
            // a†b: |k, n−k⟩ → √((k+1)(n−k)) |k+1, n−k−1⟩
            generator[k + 1][k] += re(((ka + 1.0) * kb).sqrt());
        }
        if k > 0 {
            // ab†: |k, n−k⟩ → √(k(n−k+1)) |k−1, n−k+1⟩
            generator[k - 1][k] -= re((ka * (kb + 1.0)).sqrt());
        }
    }
    let rotation = matrix_exp(&scale(&generator, re(FRAC_PI_4)));
    // π phase on the second mode: |k, n−k⟩ picks up (−1)^(n−k).
    let mut full = vec![vec![ZERO; dim]; dim];
    for (row, out) in full.iter_mut().enumerate() {
        let sign = Complex64::from_polar(1.0, PI * (n - row) as f64);
        for (col, value) in out.iter_mut().enumerate() {
            *value = sign * rotation[row][col];
        }
    }
    full
}

fn scale(m: &[Vec<Complex64>], factor: Complex64) -> Vec<Vec<Complex64>> {
    m.iter()
        .map(|row| row.iter().map(|v| v * factor).collect())
        .collect()
}

fn mat_mul(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let dim = a.len();
    let mut out = vec![vec![ZERO; dim]; dim];
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i][k];
            if aik == ZERO {
                continue;
            }
            for j in 0..dim {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

fn matrix_exp(m: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let dim = m.len();
    let mut result = vec![vec![ZERO; dim]; dim];
    for (i, row) in result.iter_mut().enumerate() {
        row[i] = ONE;
    }
    let mut term = result.clone();
    for j in 1..=60 {
        term = mat_mul(&term, m);
        term = scale(&term, re(1.0 / j as f64));
        for i in 0..dim {
            for k in 0..dim {
                result[i][k] += term[i][k];
            }
        }
    }
    result
}

/// Applies the exponential-oracle balanced splitter to coefficients over the
/// `n`-photon block (index = photons in the first mode).
pub fn balanced_block_apply(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let matrix = balanced_block_matrix(n);
    (0..coeffs.len())
        .map(|row| {
            (0..coeffs.len())
                .map(|col| matrix[row][col] * coeffs[col])
                .sum()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Chi-square goodness of fit
// ---------------------------------------------------------------------------

/// Upper-tail p-value of Pearson's statistic against exact probabilities.
pub fn chi_square_p_value(observed: &[u64], expected_probs: &[f64], shots: u64) -> f64 {
    assert_eq!(observed.len(), expected_probs.len());
    let mut statistic = 0.0;
    for (&o, &p) in observed.iter().zip(expected_probs) {
        let e = p * shots as f64;
        statistic += (o as f64 - e) * (o as f64 - e) / e;
    }
    let dof = (observed.len() - 1) as f64;
    gamma_q(dof / 2.0, statistic / 2.0)
}

/// Regularized upper incomplete gamma Q(a, x).
pub fn gamma_q(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_continued_fraction(a, x)
    }
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..500 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-16 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_q_continued_fraction(a: f64, x: f64) -> f64 {
    // Lentz's algorithm.
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos approximation (g = 7, n = 9); coefficients kept at source
    // precision.
    #[allow(clippy::excessive_precision)]
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, &coef) in COEFFS.iter().enumerate().skip(1) {
        acc += coef / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

// ---------------------------------------------------------------------------
// Seeded random inputs
// ---------------------------------------------------------------------------

/// A uniformly-phased normalized amplitude pair.
pub fn random_amplitude_pair<R: Rng>(rng: &mut R) -> (Complex64, Complex64) {
    let theta = rng.random::<f64>() * std::f64::consts::FRAC_PI_2;
    let phi1 = rng.random::<f64>() * 2.0 * PI;
    let phi2 = rng.random::<f64>() * 2.0 * PI;
    (
        Complex64::from_polar(theta.cos(), phi1),
        Complex64::from_polar(theta.sin(), phi2),
    )
}

/// Like [`random_amplitude_pair`] but bounded away from the poles so that
/// |αβ| stays above 0.05.
pub fn random_balanced_pair<R: Rng>(rng: &mut R) -> (Complex64, Complex64) {
    loop {
        let (alpha, beta) = random_amplitude_pair(rng);
        if (alpha.norm() * beta.norm()) > 0.05 {
            return (alpha, beta);
        }
    }
}
