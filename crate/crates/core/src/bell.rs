//! Bell-state definitions on mode pairs, decomposition of multi-mode states
//! into products of Bell states across designated pairs, and the Ψ⁻ parity
//! classification that drives the receiver's correction.
//!
//! The four Bell states of a rail pair are
//!
//! ```text
//!   Φ± = (|1,1⟩ ± |0,0⟩)/√2      Ψ± = (|1,0⟩ ± |0,1⟩)/√2
//! ```
//!
//! These span only the {0,1}² occupancy sector of the pair, so terms carrying
//! two photons in a measured pair are collected into a separate overflow
//! bucket rather than forced onto the basis. The decomposition is used on the
//! assembled state before any beam splitter, where that sector suffices.

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::modes::{ModeRegistry, Occupation};
use crate::state::QuantumState;

/// The four Bell states of a mode pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BellLabel {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PhiPlus,
        BellLabel::PhiMinus,
        BellLabel::PsiPlus,
        BellLabel::PsiMinus,
    ];

    pub fn is_phi(self) -> bool {
        matches!(self, BellLabel::PhiPlus | BellLabel::PhiMinus)
    }

    pub fn is_psi(self) -> bool {
        !self.is_phi()
    }

    /// The two pair occupations superposed by this Bell state, with signs.
    fn expansion(self) -> [((u32, u32), f64); 2] {
        let w = FRAC_1_SQRT_2;
        match self {
            BellLabel::PhiPlus => [((1, 1), w), ((0, 0), w)],
            BellLabel::PhiMinus => [((1, 1), w), ((0, 0), -w)],
            BellLabel::PsiPlus => [((1, 0), w), ((0, 1), w)],
            BellLabel::PsiMinus => [((1, 0), w), ((0, 1), -w)],
        }
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BellLabel::PhiPlus => "phi+",
            BellLabel::PhiMinus => "phi-",
            BellLabel::PsiPlus => "psi+",
            BellLabel::PsiMinus => "psi-",
        };
        write!(f, "{s}")
    }
}

/// Parity of the Ψ⁻ count across a list of Bell labels. `Inapplicable` marks
/// lists containing a Φ-type entry, which the linear-optics readout cannot
/// resolve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    Inapplicable,
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::Inapplicable => "inapplicable",
        };
        write!(f, "{s}")
    }
}

/// Builds the Bell state of one registry pair, vacuum elsewhere.
pub fn bell_state(
    registry: &Arc<ModeRegistry>,
    pair: (&str, &str),
    label: BellLabel,
) -> Result<QuantumState> {
    let first = registry.require(pair.0)?;
    let second = registry.require(pair.1)?;
    if first == second {
        return Err(Error::Config("bell state needs two distinct modes".into()));
    }
    let terms = label.expansion().map(|((n1, n2), coef)| {
        let mut occ = Occupation::vacuum(registry.len());
        occ.set(first, n1);
        occ.set(second, n2);
        (occ, Complex64::new(coef, 0.0))
    });
    QuantumState::collect(Arc::clone(registry), terms, 1e-12)
}

/// Result of expanding a state over Bell products of measured pairs: one
/// residual state per label assignment, scaled by its expansion coefficient,
/// plus the overflow carrying any ≥2-photon pair occupancies.
#[derive(Debug, Clone)]
pub struct BellProductCoefficients {
    registry: Arc<ModeRegistry>,
    pair_positions: Vec<(usize, usize)>,
    residual_positions: Vec<usize>,
    residual_registry: Arc<ModeRegistry>,
    entries: BTreeMap<Vec<BellLabel>, QuantumState>,
    overflow: Vec<(Occupation, Complex64)>,
}

impl BellProductCoefficients {
    /// Residual states keyed by their per-pair label assignment, in a
    /// deterministic order.
    pub fn entries(&self) -> impl Iterator<Item = (&Vec<BellLabel>, &QuantumState)> {
        self.entries.iter()
    }

    pub fn entry(&self, labels: &[BellLabel]) -> Option<&QuantumState> {
        self.entries.get(labels)
    }

    pub fn entry_count(&self) -> usize {
        self.entries.len()
    }

    pub fn residual_registry(&self) -> &Arc<ModeRegistry> {
        &self.residual_registry
    }

    /// Squared norm of the overflow bucket.
    pub fn overflow_norm_sqr(&self) -> f64 {
        self.overflow.iter().map(|(_, a)| a.norm_sqr()).sum()
    }

    pub fn overflow_is_empty(&self) -> bool {
        self.overflow.is_empty()
    }

    /// Sum of squared residual norms plus overflow; equals the squared norm
    /// of the decomposed state (completeness of the Bell product basis).
    pub fn total_norm_sqr(&self) -> f64 {
        self.entries
            .values()
            .map(QuantumState::norm_sqr)
            .sum::<f64>()
            + self.overflow_norm_sqr()
    }

    /// Reassembles Σ (Bell product ⊗ residual) + overflow on the original
    /// registry; reproduces the decomposed state termwise.
    pub fn reconstruct(&self) -> Result<QuantumState> {
        let mut terms: BTreeMap<Occupation, Complex64> = BTreeMap::new();
        for (occ, amp) in &self.overflow {
            *terms.entry(occ.clone()).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        for (labels, residual) in &self.entries {
            // Expand the Bell product into pair occupations with signs.
            let mut branches: Vec<(Vec<(u32, u32)>, f64)> = vec![(Vec::new(), 1.0)];
            for label in labels {
                let mut next = Vec::with_capacity(branches.len() * 2);
                for (pair_counts, coef) in &branches {
                    for (counts, sign) in label.expansion() {
                        let mut extended = pair_counts.clone();
                        extended.push(counts);
                        next.push((extended, coef * sign));
                    }
                }
                branches = next;
            }
            for (res_occ, res_amp) in residual.terms() {
                for (pair_counts, coef) in &branches {
                    let mut occ = Occupation::vacuum(self.registry.len());
                    for (&(i, j), &(n1, n2)) in self.pair_positions.iter().zip(pair_counts.iter()) {
                        occ.set(i, n1);
                        occ.set(j, n2);
                    }
                    for (&pos, &count) in self.residual_positions.iter().zip(res_occ.counts()) {
                        occ.set(pos, count);
                    }
                    *terms.entry(occ).or_insert(Complex64::new(0.0, 0.0)) +=
                        res_amp * Complex64::new(*coef, 0.0);
                }
            }
        }
        QuantumState::collect(Arc::clone(&self.registry), terms, 1e-12)
    }
}

/// Expands `state` over Bell products of the given disjoint mode pairs.
///
/// Inverting the per-pair expansion gives the basis-change coefficients:
/// |1,1⟩ = (Φ⁺+Φ⁻)/√2, |0,0⟩ = (Φ⁺−Φ⁻)/√2, |1,0⟩ = (Ψ⁺+Ψ⁻)/√2 and
/// |0,1⟩ = (Ψ⁺−Ψ⁻)/√2. Each input term splits into one contribution per label
/// assignment; terms with a two-photon pair occupancy go to the overflow.
pub fn bell_decompose(
    state: &QuantumState,
    pairs: &[(&str, &str)],
) -> Result<BellProductCoefficients> {
    let registry = state.registry();
    let mut pair_positions = Vec::with_capacity(pairs.len());
    let mut used = Vec::with_capacity(pairs.len() * 2);
    for (first, second) in pairs {
        let i = registry.require(first)?;
        let j = registry.require(second)?;
        if i == j || used.contains(&i) || used.contains(&j) {
            return Err(Error::Config(format!(
                "measured pairs must be disjoint (offending pair ({first}, {second}))"
            )));
        }
        used.push(i);
        used.push(j);
        pair_positions.push((i, j));
    }
    let residual_positions: Vec<usize> =
        (0..registry.len()).filter(|i| !used.contains(i)).collect();
    let residual_registry = Arc::new(registry.without(&used)?);

    let mut entry_terms: BTreeMap<Vec<BellLabel>, BTreeMap<Occupation, Complex64>> =
        BTreeMap::new();
    let mut overflow: Vec<(Occupation, Complex64)> = Vec::new();

    'terms: for (occ, amp) in state.terms() {
        let mut pair_counts = Vec::with_capacity(pair_positions.len());
        for &(i, j) in &pair_positions {
            let counts = (occ.count(i), occ.count(j));
            if counts.0 > 1 || counts.1 > 1 {
                overflow.push((occ.clone(), amp));
                continue 'terms;
            }
            pair_counts.push(counts);
        }
        // Every pair occupation expands over exactly two labels with
        // coefficients ±1/√2.
        let mut assignments: Vec<(Vec<BellLabel>, f64)> = vec![(Vec::new(), 1.0)];
        for &counts in &pair_counts {
            let options: [(BellLabel, f64); 2] = match counts {
                (1, 1) => [
                    (BellLabel::PhiPlus, FRAC_1_SQRT_2),
                    (BellLabel::PhiMinus, FRAC_1_SQRT_2),
                ],
                (0, 0) => [
                    (BellLabel::PhiPlus, FRAC_1_SQRT_2),
                    (BellLabel::PhiMinus, -FRAC_1_SQRT_2),
                ],
                (1, 0) => [
                    (BellLabel::PsiPlus, FRAC_1_SQRT_2),
                    (BellLabel::PsiMinus, FRAC_1_SQRT_2),
                ],
                (0, 1) => [
                    (BellLabel::PsiPlus, FRAC_1_SQRT_2),
                    (BellLabel::PsiMinus, -FRAC_1_SQRT_2),
                ],
                _ => unreachable!("filtered above"),
            };
            let mut next = Vec::with_capacity(assignments.len() * 2);
            for (labels, coef) in &assignments {
                for (label, weight) in options {
                    let mut extended = labels.clone();
                    extended.push(label);
                    next.push((extended, coef * weight));
                }
            }
            assignments = next;
        }
        let residual_occ = occ.select(&residual_positions);
        for (labels, coef) in assignments {
            *entry_terms
                .entry(labels)
                .or_default()
                .entry(residual_occ.clone())
                .or_insert(Complex64::new(0.0, 0.0)) += amp * Complex64::new(coef, 0.0);
        }
    }

    let mut entries = BTreeMap::new();
    for (labels, terms) in entry_terms {
        let residual = QuantumState::collect(Arc::clone(&residual_registry), terms, 1e-12)?;
        if !residual.is_empty() {
            entries.insert(labels, residual);
        }
    }

    Ok(BellProductCoefficients {
        registry: Arc::clone(registry),
        pair_positions,
        residual_positions,
        residual_registry,
        entries,
        overflow,
    })
}

/// Parity of the Ψ⁻ count; `Inapplicable` when any label is Φ-type.
pub fn psi_minus_parity(labels: &[BellLabel]) -> Parity {
    if labels.iter().any(|l| l.is_phi()) {
        return Parity::Inapplicable;
    }
    if labels.iter().filter(|l| **l == BellLabel::PsiMinus).count() % 2 == 0 {
        Parity::Even
    } else {
        Parity::Odd
    }
}
