//! Linear-optical elements acting unitarily on Fock states: two-mode beam
//! splitters, single-mode phase shifters, and mode relabeling.
//!
//! The balanced beam splitter uses the real mode matrix
//!
//! ```text
//!   [ 1  1 ]
//!   [ 1 -1 ] / √2
//! ```
//!
//! mapping input creation operators to output creation operators. Under this
//! convention a (|1,0⟩+|0,1⟩)/√2 input routes its photon entirely to port 1,
//! the sign-flipped state routes to port 2, and a |1,1⟩ input bunches into
//! (|2,0⟩−|0,2⟩)/√2, so the two ports never click once each.

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::modes::Occupation;
use crate::state::QuantumState;

/// Two-mode beam splitter acting on a named pair of registry modes.
///
/// The mode matrix is completed from the two free entries `t` and `r` as
/// `[[t, r], [r*, −t*]]`, which is unitary for any normalized pair: the
/// first input's creation operator maps to `t·a† + r·b†` and the second's to
/// `r*·a† − t*·b†`.
#[derive(Debug, Clone)]
pub struct BeamSplitterSpec {
    mode_a: String,
    mode_b: String,
    t: Complex64,
    r: Complex64,
}

impl BeamSplitterSpec {
    pub fn new(
        mode_a: impl Into<String>,
        mode_b: impl Into<String>,
        t: Complex64,
        r: Complex64,
    ) -> Result<Self> {
        let spec = Self {
            mode_a: mode_a.into(),
            mode_b: mode_b.into(),
            t,
            r,
        };
        spec.check_unitary()?;
        Ok(spec)
    }

    /// The 50/50 splitter with the real symmetric-in-magnitude matrix
    /// `[[1,1],[1,−1]]/√2`.
    pub fn balanced(mode_a: impl Into<String>, mode_b: impl Into<String>) -> Self {
        Self {
            mode_a: mode_a.into(),
            mode_b: mode_b.into(),
            t: Complex64::new(FRAC_1_SQRT_2, 0.0),
            r: Complex64::new(FRAC_1_SQRT_2, 0.0),
        }
    }

    /// Splitter implementing the inverse mode matrix.
    pub fn inverted(&self) -> Self {
        // The adjoint of [[t, r], [r*, −t*]] is the same completion built
        // from (t*, r).
        Self {
            mode_a: self.mode_a.clone(),
            mode_b: self.mode_b.clone(),
            t: self.t.conj(),
            r: self.r,
        }
    }

    pub fn modes(&self) -> (&str, &str) {
        (&self.mode_a, &self.mode_b)
    }

    /// Mode matrix rows: output operator coefficients per input operator.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        [[self.t, self.r], [self.r.conj(), -self.t.conj()]]
    }

    fn check_unitary(&self) -> Result<()> {
        let m = self.matrix();
        let mut max_dev: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                // (M M†)[i][j]
                let entry = m[i][0] * m[j][0].conj() + m[i][1] * m[j][1].conj();
                let target = if i == j { 1.0 } else { 0.0 };
                max_dev = max_dev.max((entry - Complex64::new(target, 0.0)).norm());
            }
        }
        if max_dev > 1e-12 {
            return Err(Error::Config(format!(
                "beam splitter matrix is not unitary (deviation {max_dev:.3e})"
            )));
        }
        Ok(())
    }
}

/// Applies the beam splitter to a state by formal binomial expansion of the
/// substituted creation-operator powers.
///
/// For a term with `m` and `n` photons in the two modes, every split
/// `(i, j)` of the photons contributes
/// `C(m,i)·C(n,j)·tⁱ·r^(m−i)·(r*)ʲ·(−t*)^(n−j)·√(p!q!/(m!n!))` to the output
/// occupation with `p = i+j` photons in port 1 and `q = m+n−p` in port 2.
/// Total photon number is conserved term by term and the norm is preserved.
pub fn apply_beam_splitter(state: &QuantumState, spec: &BeamSplitterSpec) -> Result<QuantumState> {
    spec.check_unitary()?;
    let idx_a = state.registry().require(&spec.mode_a)?;
    let idx_b = state.registry().require(&spec.mode_b)?;
    if idx_a == idx_b {
        return Err(Error::Config(
            "beam splitter needs two distinct modes".into(),
        ));
    }

    let t = spec.t;
    let r = spec.r;
    let rc = r.conj();
    let mtc = -t.conj();

    let mut out: BTreeMap<Occupation, Complex64> = BTreeMap::new();
    for (occ, amp) in state.terms() {
        let m = occ.count(idx_a);
        let n = occ.count(idx_b);
        let input_norm = (factorial(m) * factorial(n)).sqrt();
        for i in 0..=m {
            for j in 0..=n {
                let p = i + j;
                let q = m + n - p;
                let coef = binomial(m, i)
                    * binomial(n, j)
                    * t.powu(i)
                    * r.powu(m - i)
                    * rc.powu(j)
                    * mtc.powu(n - j)
                    * ((factorial(p) * factorial(q)).sqrt() / input_norm);
                let mut counts = occ.clone();
                counts.set(idx_a, p);
                counts.set(idx_b, q);
                *out.entry(counts).or_insert(Complex64::new(0.0, 0.0)) += amp * coef;
            }
        }
    }
    let result = QuantumState::collect(state.registry().clone(), out, state.prune_tolerance())?;
    debug_assert_eq!(result.total_photons(), state.total_photons());
    Ok(result)
}

/// Multiplies each term by `exp(i·phi·n)` where `n` is the photon count in
/// `mode`. Norm is preserved exactly.
pub fn phase_shift(state: &QuantumState, mode: &str, phi: f64) -> Result<QuantumState> {
    let idx = state.registry().require(mode)?;
    let terms: Vec<(Occupation, Complex64)> = state
        .terms()
        .map(|(occ, amp)| {
            let n = occ.count(idx);
            (
                occ.clone(),
                amp * Complex64::from_polar(1.0, phi * n as f64),
            )
        })
        .collect();
    QuantumState::collect(state.registry().clone(), terms, state.prune_tolerance())
}

/// Permutes photon counts among modes according to a bijective relabeling.
///
/// The mapping must be a permutation of a subset of registry names: the same
/// set of names must appear as sources and as targets.
pub fn relabel_modes(
    state: &QuantumState,
    mapping: &BTreeMap<String, String>,
) -> Result<QuantumState> {
    let registry = state.registry();
    let mut perm: Vec<usize> = (0..registry.len()).collect();
    let mut sources: Vec<usize> = Vec::with_capacity(mapping.len());
    let mut targets: Vec<usize> = Vec::with_capacity(mapping.len());
    for (from, to) in mapping {
        let from_idx = registry.require(from)?;
        let to_idx = registry.require(to)?;
        if targets.contains(&to_idx) {
            return Err(Error::Config(format!("relabel target `{to}` used twice")));
        }
        sources.push(from_idx);
        targets.push(to_idx);
    }
    let mut sorted_sources = sources.clone();
    let mut sorted_targets = targets.clone();
    sorted_sources.sort_unstable();
    sorted_targets.sort_unstable();
    if sorted_sources != sorted_targets {
        return Err(Error::Config(
            "relabel mapping must permute a subset of modes (source and target sets differ)".into(),
        ));
    }
    for (s, t) in sources.iter().zip(&targets) {
        perm[*s] = *t;
    }

    let terms: Vec<(Occupation, Complex64)> = state
        .terms()
        .map(|(occ, amp)| {
            let mut counts = vec![0u32; occ.len()];
            for (pos, &count) in occ.counts().iter().enumerate() {
                counts[perm[pos]] = count;
            }
            (Occupation::new(counts), amp)
        })
        .collect();
    QuantumState::collect(registry.clone(), terms, state.prune_tolerance())
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn binomial(n: u32, k: u32) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}
