//! Sparse Fock-space states: a map from multi-mode occupation vectors to
//! complex amplitudes, together with the linear algebra the protocol needs
//! (tensor products, inner products, fidelity, projective collapse onto
//! photon counts).
//!
//! States are immutable from the caller's perspective: every operation is a
//! pure function returning a fresh value, so states can be shared freely
//! across threads. Terms whose squared magnitude falls below the pruning
//! tolerance squared are dropped after every operation, which keeps the exact
//! zeros produced by destructive interference out of the term map.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::{ModeRegistry, Occupation};

/// Default pruning tolerance: amplitudes with `|a|² < ε²` are discarded.
pub const DEFAULT_PRUNE_EPS: f64 = 1e-12;

/// Norm deviation accepted by operations that require normalized inputs.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// A pure state of a fixed set of optical modes, stored sparsely.
#[derive(Debug, Clone)]
pub struct QuantumState {
    registry: Arc<ModeRegistry>,
    terms: BTreeMap<Occupation, Complex64>,
    eps: f64,
}

impl QuantumState {
    /// Builds a state from explicit terms. Duplicate occupation vectors are
    /// merged by amplitude addition, then sub-tolerance terms are pruned.
    ///
    /// The caller must supply amplitudes whose squared magnitudes sum to 1
    /// within [`NORM_TOLERANCE`], and every term must carry the same total
    /// photon number; use [`QuantumState::from_terms_normalized`] to have the
    /// state rescaled instead.
    pub fn from_terms<T>(registry: Arc<ModeRegistry>, terms: T) -> Result<Self>
    where
        T: IntoIterator<Item = (Occupation, Complex64)>,
    {
        let state = Self::collect(registry, terms, DEFAULT_PRUNE_EPS)?;
        state.require_homogeneous()?;
        let norm_sqr = state.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "terms are not normalized (⟨ψ|ψ⟩ = {norm_sqr}); use from_terms_normalized"
            )));
        }
        Ok(state)
    }

    /// Like [`QuantumState::from_terms`] but rescales the result to unit norm.
    pub fn from_terms_normalized<T>(registry: Arc<ModeRegistry>, terms: T) -> Result<Self>
    where
        T: IntoIterator<Item = (Occupation, Complex64)>,
    {
        let state = Self::collect(registry, terms, DEFAULT_PRUNE_EPS)?;
        state.require_homogeneous()?;
        state.normalized()
    }

    /// Single-basis-state convenience constructor.
    pub fn basis_state(
        registry: Arc<ModeRegistry>,
        occupation: impl Into<Occupation>,
    ) -> Result<Self> {
        Self::from_terms(registry, [(occupation.into(), Complex64::new(1.0, 0.0))])
    }

    /// Internal constructor that skips the photon-number homogeneity and
    /// normalization checks. Bell basis vectors of Φ type superpose different
    /// photon numbers, and decomposition residuals are deliberately scaled by
    /// their expansion coefficients, so both need this path.
    pub(crate) fn collect<T>(registry: Arc<ModeRegistry>, terms: T, eps: f64) -> Result<Self>
    where
        T: IntoIterator<Item = (Occupation, Complex64)>,
    {
        let width = registry.len();
        let mut map: BTreeMap<Occupation, Complex64> = BTreeMap::new();
        for (occ, amp) in terms {
            if occ.len() != width {
                return Err(Error::InvalidState(format!(
                    "occupation vector has {} entries for a registry of {} modes",
                    occ.len(),
                    width
                )));
            }
            if !amp.is_finite() {
                return Err(Error::InvalidState("non-finite amplitude".into()));
            }
            *map.entry(occ).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        let mut state = Self {
            registry,
            terms: map,
            eps,
        };
        state.prune();
        Ok(state)
    }

    fn prune(&mut self) {
        let cut = self.eps * self.eps;
        self.terms.retain(|_, amp| amp.norm_sqr() >= cut);
    }

    fn require_homogeneous(&self) -> Result<()> {
        if self.total_photons().is_none() && !self.terms.is_empty() {
            return Err(Error::InvalidState(
                "terms mix different total photon numbers".into(),
            ));
        }
        Ok(())
    }

    pub fn registry(&self) -> &Arc<ModeRegistry> {
        &self.registry
    }

    pub fn prune_tolerance(&self) -> f64 {
        self.eps
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterates stored terms in occupation order (deterministic).
    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, Complex64)> {
        self.terms.iter().map(|(occ, amp)| (occ, *amp))
    }

    /// Amplitude of one occupation vector (zero when absent).
    pub fn amplitude(&self, occupation: &Occupation) -> Complex64 {
        self.terms
            .get(occupation)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self, tolerance: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tolerance
    }

    /// Total photon number if it is the same for every stored term, `None`
    /// when the terms mix photon numbers (only Bell Φ reference vectors do).
    pub fn total_photons(&self) -> Option<u32> {
        let mut totals = self.terms.keys().map(Occupation::total);
        let first = totals.next()?;
        totals.all(|t| t == first).then_some(first)
    }

    /// Rescaled copy with ⟨ψ|ψ⟩ = 1.
    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if norm < self.eps {
            return Err(Error::InvalidState(
                "cannot normalize a zero-norm state".into(),
            ));
        }
        Ok(self.scaled(Complex64::new(1.0 / norm, 0.0)))
    }

    /// Copy with every amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = Self {
            registry: Arc::clone(&self.registry),
            terms: self
                .terms
                .iter()
                .map(|(occ, amp)| (occ.clone(), amp * factor))
                .collect(),
            eps: self.eps,
        };
        out.prune();
        out
    }

    /// Termwise sum of two states on the same registry.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.require_same_registry(other)?;
        let mut terms = self.terms.clone();
        for (occ, amp) in &other.terms {
            *terms.entry(occ.clone()).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        let mut out = Self {
            registry: Arc::clone(&self.registry),
            terms,
            eps: self.eps.max(other.eps),
        };
        out.prune();
        Ok(out)
    }

    fn require_same_registry(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.registry, &other.registry)
            || self.registry.names() == other.registry.names()
        {
            Ok(())
        } else {
            Err(Error::Config(
                "states live on different mode registries".into(),
            ))
        }
    }

    /// Tensor product on the concatenated registry. The registries must not
    /// share mode names.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        for name in other.registry.names() {
            if self.registry.contains(name) {
                return Err(Error::Config(format!(
                    "mode name `{name}` appears in both tensor factors"
                )));
            }
        }
        let names: Vec<String> = self
            .registry
            .names()
            .iter()
            .chain(other.registry.names())
            .cloned()
            .collect();
        let registry = Arc::new(ModeRegistry::from_names(names)?);
        let mut terms = BTreeMap::new();
        for (occ_a, amp_a) in &self.terms {
            for (occ_b, amp_b) in &other.terms {
                let mut counts = occ_a.counts().to_vec();
                counts.extend_from_slice(occ_b.counts());
                terms.insert(Occupation::new(counts), amp_a * amp_b);
            }
        }
        let mut out = Self {
            registry,
            terms,
            eps: self.eps.max(other.eps),
        };
        out.prune();
        Ok(out)
    }

    /// ⟨self|other⟩, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &Self) -> Result<Complex64> {
        self.require_same_registry(other)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (occ, a) in &self.terms {
            if let Some(b) = other.terms.get(occ) {
                acc += a.conj() * b;
            }
        }
        Ok(acc)
    }

    /// |⟨self|other⟩|² for normalized states; invariant under a global phase
    /// of either argument.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        if !self.is_normalized(NORM_TOLERANCE) || !other.is_normalized(NORM_TOLERANCE) {
            return Err(Error::InvalidState(
                "fidelity requires normalized states".into(),
            ));
        }
        Ok(self.inner_product(other)?.norm_sqr())
    }

    /// Projects onto fixed photon counts for the listed modes.
    ///
    /// Returns the outcome probability and the renormalized conditional state
    /// on the remaining modes; a zero-probability branch yields `None` instead
    /// of a conditional.
    pub fn project_counts(
        &self,
        measured_modes: &[&str],
        counts: &Occupation,
    ) -> Result<(f64, Option<QuantumState>)> {
        if counts.len() != measured_modes.len() {
            return Err(Error::Config(format!(
                "{} counts supplied for {} measured modes",
                counts.len(),
                measured_modes.len()
            )));
        }
        let positions = self.resolve_distinct(measured_modes)?;
        let mut probability = 0.0;
        let mut matched: Vec<(Occupation, Complex64)> = Vec::new();
        for (occ, amp) in &self.terms {
            if occ.select(&positions) == *counts {
                probability += amp.norm_sqr();
                matched.push((occ.without(&positions), *amp));
            }
        }
        if matched.is_empty() {
            return Ok((0.0, None));
        }
        let registry = Arc::new(self.registry.without(&positions)?);
        let scale = Complex64::new(1.0 / probability.sqrt(), 0.0);
        let conditional = QuantumState::collect(
            registry,
            matched.into_iter().map(|(occ, amp)| (occ, amp * scale)),
            self.eps,
        )?;
        Ok((probability, Some(conditional)))
    }

    /// Resolves mode names to registry positions, rejecting repeats.
    pub(crate) fn resolve_distinct(&self, modes: &[&str]) -> Result<Vec<usize>> {
        let mut positions = Vec::with_capacity(modes.len());
        for name in modes {
            let idx = self.registry.require(name)?;
            if positions.contains(&idx) {
                return Err(Error::Config(format!("mode `{name}` listed twice")));
            }
            positions.push(idx);
        }
        Ok(positions)
    }

    /// Same state expressed on a renamed registry (positions unchanged).
    pub fn with_renamed_modes(&self, rename: &BTreeMap<String, String>) -> Result<Self> {
        let registry = Arc::new(self.registry.renamed(rename)?);
        Ok(Self {
            registry,
            terms: self.terms.clone(),
            eps: self.eps,
        })
    }

    /// Serializes to the structured-text record used on disk: registry names
    /// plus one `{counts, re, im}` row per term. Doubles survive a round trip
    /// bit-identically.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&StateRecord::from(self)).expect("state serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let record: StateRecord = serde_json::from_str(text)
            .map_err(|e| Error::InvalidState(format!("unparseable state record: {e}")))?;
        record.into_state()
    }
}

impl fmt::Display for QuantumState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (occ, amp)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:+.6}{:+.6}i){}", amp.re, amp.im, occ)?;
        }
        Ok(())
    }
}

/// On-disk form of a state.
#[derive(Serialize, Deserialize)]
struct StateRecord {
    modes: Vec<String>,
    terms: Vec<TermRecord>,
}

#[derive(Serialize, Deserialize)]
struct TermRecord {
    counts: Vec<u32>,
    re: f64,
    im: f64,
}

impl From<&QuantumState> for StateRecord {
    fn from(state: &QuantumState) -> Self {
        Self {
            modes: state.registry.names().to_vec(),
            terms: state
                .terms()
                .map(|(occ, amp)| TermRecord {
                    counts: occ.counts().to_vec(),
                    re: amp.re,
                    im: amp.im,
                })
                .collect(),
        }
    }
}

impl StateRecord {
    fn into_state(self) -> Result<QuantumState> {
        let registry = Arc::new(ModeRegistry::from_names(self.modes)?);
        QuantumState::collect(
            registry,
            self.terms
                .into_iter()
                .map(|t| (Occupation::new(t.counts), Complex64::new(t.re, t.im))),
            DEFAULT_PRUNE_EPS,
        )
    }
}
