//! Ideal photon-number-resolving detection: exact enumeration of detector
//! outcome patterns with probabilities and conditional states, seeded
//! sampling from the exact distribution, and classification of per-pair
//! patterns into Bell readout outcomes.
//!
//! Detectors are ideal: unit efficiency, exact photon-number resolution up
//! to two, no dark counts. Outcomes with probability below 1e-12 are omitted
//! from distributions.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

use crate::bell::Parity;
use crate::error::{Error, Result};
use crate::modes::Occupation;
use crate::state::QuantumState;

/// Probability below which an outcome is treated as absent.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// Photon counts per detector id for one measurement event.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct DetectorPattern {
    counts: BTreeMap<String, u32>,
}

impl DetectorPattern {
    pub fn new() -> Self {
        Self {
            counts: BTreeMap::new(),
        }
    }

    pub fn with(mut self, detector: impl Into<String>, count: u32) -> Self {
        self.counts.insert(detector.into(), count);
        self
    }

    /// Count registered by a detector; detectors outside the pattern saw
    /// nothing.
    pub fn count(&self, detector: &str) -> u32 {
        self.counts.get(detector).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &BTreeMap<String, u32> {
        &self.counts
    }

    pub fn total(&self) -> u32 {
        self.counts.values().sum()
    }

    /// Pattern with detector ids rewritten through `rename` (ids without an
    /// entry are kept).
    pub fn renamed(&self, rename: &BTreeMap<String, String>) -> Self {
        Self {
            counts: self
                .counts
                .iter()
                .map(|(id, &c)| (rename.get(id).cloned().unwrap_or_else(|| id.clone()), c))
                .collect(),
        }
    }
}

impl Default for DetectorPattern {
    fn default() -> Self {
        Self::new()
    }
}

impl fmt::Display for DetectorPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (id, count)) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{id}:{count}")?;
        }
        Ok(())
    }
}

/// One enumerated outcome: the pattern, its exact probability, and the
/// renormalized conditional state on the unmeasured modes.
#[derive(Debug, Clone)]
pub struct OutcomeEntry {
    pub pattern: DetectorPattern,
    pub probability: f64,
    pub conditional: QuantumState,
}

/// Exhaustive outcome list for measuring a set of detector modes; entries are
/// ordered deterministically and probabilities sum to the squared norm of the
/// measured state.
#[derive(Debug, Clone)]
pub struct OutcomeDistribution {
    entries: Vec<OutcomeEntry>,
}

impl OutcomeDistribution {
    pub fn entries(&self) -> &[OutcomeEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_probability(&self) -> f64 {
        self.entries.iter().map(|e| e.probability).sum()
    }

    pub fn find(&self, pattern: &DetectorPattern) -> Option<&OutcomeEntry> {
        self.entries.iter().find(|e| &e.pattern == pattern)
    }

    /// Draws one outcome with its exact probability using a single uniform
    /// variate from `rng`; deterministic given the stream state.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &OutcomeEntry {
        &self.entries[self.sample_index(rng)]
    }

    /// Index form of [`OutcomeDistribution::sample`].
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = self.total_probability();
        let mut remaining = rng.random::<f64>() * total;
        for (index, entry) in self.entries.iter().enumerate() {
            remaining -= entry.probability;
            if remaining <= 0.0 {
                return index;
            }
        }
        self.entries.len() - 1
    }
}

/// Enumerates every detector pattern with probability above the floor.
///
/// Terms are grouped by their occupation restricted to the detector modes;
/// the group's squared amplitudes give the probability and the remaining
/// occupations, renormalized, give the conditional state.
pub fn outcome_distribution(
    state: &QuantumState,
    detector_modes: &[&str],
) -> Result<OutcomeDistribution> {
    let positions = state.resolve_distinct(detector_modes)?;
    let mut groups: BTreeMap<Occupation, (f64, Vec<(Occupation, Complex64)>)> = BTreeMap::new();
    for (occ, amp) in state.terms() {
        let seen = occ.select(&positions);
        let group = groups.entry(seen).or_insert_with(|| (0.0, Vec::new()));
        group.0 += amp.norm_sqr();
        group.1.push((occ.without(&positions), amp));
    }
    let remaining_registry = std::sync::Arc::new(state.registry().without(&positions)?);
    let mut entries = Vec::with_capacity(groups.len());
    for (seen, (probability, terms)) in groups {
        if probability < PROBABILITY_FLOOR {
            continue;
        }
        let scale = Complex64::new(1.0 / probability.sqrt(), 0.0);
        let conditional = QuantumState::collect(
            remaining_registry.clone(),
            terms.into_iter().map(|(occ, amp)| (occ, amp * scale)),
            state.prune_tolerance(),
        )?;
        let mut pattern = DetectorPattern::new();
        for (name, count) in detector_modes.iter().zip(seen.counts()) {
            pattern = pattern.with(*name, *count);
        }
        entries.push(OutcomeEntry {
            pattern,
            probability,
            conditional,
        });
    }
    Ok(OutcomeDistribution { entries })
}

/// Samples one detection event from the exact distribution.
pub fn sample_outcome<R: Rng + ?Sized>(
    state: &QuantumState,
    detector_modes: &[&str],
    rng: &mut R,
) -> Result<(DetectorPattern, QuantumState)> {
    let distribution = outcome_distribution(state, detector_modes)?;
    if distribution.is_empty() {
        return Err(Error::InvalidState(
            "cannot sample from an empty state".into(),
        ));
    }
    let entry = distribution.sample(rng);
    Ok((entry.pattern.clone(), entry.conditional.clone()))
}

/// Bell readout of one pair's detectors behind a calibrated splitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BellOutcome {
    /// Exactly one photon at the pair's first port.
    PsiPlus,
    /// Exactly one photon at the pair's second port.
    PsiMinus,
    /// Bunched or empty pattern; the four Φ products are indistinguishable.
    PhiAmbiguous,
}

impl BellOutcome {
    pub fn is_success(self) -> bool {
        !matches!(self, BellOutcome::PhiAmbiguous)
    }
}

impl fmt::Display for BellOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BellOutcome::PsiPlus => "psi+",
            BellOutcome::PsiMinus => "psi-",
            BellOutcome::PhiAmbiguous => "phi?",
        };
        write!(f, "{s}")
    }
}

/// Classifies the photon counts seen by one pair's two detectors.
///
/// `(1,0)` and `(0,1)` identify the two Ψ states; `(0,0)`, `(2,0)` and
/// `(0,2)` are the ambiguous Φ family. A coincidence `(1,1)` (or more than
/// two photons) cannot occur behind a calibrated splitter and is reported as
/// a convention-violation diagnostic.
pub fn classify_pair(port1: u32, port2: u32) -> Result<BellOutcome> {
    match (port1, port2) {
        (1, 0) => Ok(BellOutcome::PsiPlus),
        (0, 1) => Ok(BellOutcome::PsiMinus),
        (0, 0) | (2, 0) | (0, 2) => Ok(BellOutcome::PhiAmbiguous),
        (1, 1) => Err(Error::ConventionViolation(
            "single-photon coincidence on both ports of one pair".into(),
        )),
        _ => Err(Error::ConventionViolation(format!(
            "more than two photons on one pair's detectors ({port1},{port2})"
        ))),
    }
}

/// Parity of the Ψ⁻ count across per-pair outcomes; any Φ-ambiguous entry
/// makes the whole event unusable.
pub fn outcomes_parity(outcomes: &[BellOutcome]) -> Parity {
    if outcomes.iter().any(|o| !o.is_success()) {
        return Parity::Inapplicable;
    }
    let minus = outcomes
        .iter()
        .filter(|o| **o == BellOutcome::PsiMinus)
        .count();
    if minus % 2 == 0 {
        Parity::Even
    } else {
        Parity::Odd
    }
}

/// Serializable row of a classified distribution export.
#[derive(Debug, Clone, Serialize)]
pub struct DistributionRow {
    pub pattern: BTreeMap<String, u32>,
    pub probability: f64,
    pub bell_labels: Vec<String>,
    pub parity: String,
}

impl OutcomeDistribution {
    /// Renders the distribution as classified rows; `pairs` lists each pair's
    /// (port 1, port 2) detector ids.
    pub fn export_rows(&self, pairs: &[(String, String)]) -> Result<Vec<DistributionRow>> {
        self.entries
            .iter()
            .map(|entry| {
                let outcomes = pairs
                    .iter()
                    .map(|(p1, p2)| classify_pair(entry.pattern.count(p1), entry.pattern.count(p2)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(DistributionRow {
                    pattern: entry.pattern.counts().clone(),
                    probability: entry.probability,
                    bell_labels: outcomes.iter().map(ToString::to_string).collect(),
                    parity: outcomes_parity(&outcomes).to_string(),
                })
            })
            .collect()
    }
}
