//! Constructors for every prepared state the protocol uses: the unknown
//! dual-rail input, the down-conversion pair, its (N+1)-particle
//! generalization, and the dual-source arrangement behind the event-ready
//! variant.
//!
//! All states use occupation-number encoding: one logical particle occupies a
//! pair of rails as α|1,0⟩ + β|0,1⟩. An N-particle entangled input is the
//! two-branch state α|1,0⟩^⊗N + β|0,1⟩^⊗N over N rail pairs.

use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::modes::{ModeRegistry, Occupation};
use crate::optics::{apply_beam_splitter, BeamSplitterSpec};
use crate::state::QuantumState;

/// Unknown input parameters: the amplitude pair and the particle count.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct InputSpec {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub particles: u32,
}

impl InputSpec {
    /// Requires |alpha|² + |beta|² = 1 within 1e-9 and `particles ≥ 1`.
    pub fn new(alpha: Complex64, beta: Complex64, particles: u32) -> Result<Self> {
        if particles == 0 {
            return Err(Error::Config("particle count must be at least 1".into()));
        }
        let norm_sqr = alpha.norm_sqr() + beta.norm_sqr();
        if (norm_sqr - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "input amplitudes not normalized: |α|²+|β|² = {norm_sqr}"
            )));
        }
        Ok(Self {
            alpha,
            beta,
            particles,
        })
    }

    /// Rescales an arbitrary nonzero amplitude pair to unit norm.
    pub fn normalized(alpha: Complex64, beta: Complex64, particles: u32) -> Result<Self> {
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if norm < 1e-12 {
            return Err(Error::Config("input amplitudes are both zero".into()));
        }
        Self::new(alpha / norm, beta / norm, particles)
    }
}

/// The two-branch entangled input α|1,0,1,0,…⟩ + β|0,1,0,1,…⟩ over the listed
/// rail pairs (`rails` holds 2N names: pair k's rails at positions 2k, 2k+1).
pub fn input_entangled_state(
    registry: &Arc<ModeRegistry>,
    spec: &InputSpec,
    rails: &[&str],
) -> Result<QuantumState> {
    if rails.len() != 2 * spec.particles as usize {
        return Err(Error::Config(format!(
            "{} rails supplied for {} particles (need {})",
            rails.len(),
            spec.particles,
            2 * spec.particles
        )));
    }
    let (first, second) = branch_occupations(registry, rails)?;
    QuantumState::from_terms(
        Arc::clone(registry),
        [(first, spec.alpha), (second, spec.beta)],
    )
}

/// The (N+1)-particle channel (1/√2)(|1,0⟩^⊗(N+1) + |0,1⟩^⊗(N+1)) over the
/// listed rail pairs; for N = 1 this is the down-conversion pair itself and
/// for N = 2 a three-particle GHZ state.
pub fn channel_state(
    registry: &Arc<ModeRegistry>,
    particles: u32,
    rails: &[&str],
) -> Result<QuantumState> {
    if rails.len() != 2 * (particles as usize + 1) {
        return Err(Error::Config(format!(
            "{} rails supplied for an {}-particle channel (need {})",
            rails.len(),
            particles + 1,
            2 * (particles as usize + 1)
        )));
    }
    let (first, second) = branch_occupations(registry, rails)?;
    let w = Complex64::new(FRAC_1_SQRT_2, 0.0);
    QuantumState::from_terms(Arc::clone(registry), [(first, w), (second, w)])
}

/// The entangled photon pair emitted by the down-conversion source:
/// (1/√2)(|1,0,1,0⟩ + |0,1,0,1⟩) over two rail pairs.
pub fn pdc_pair_state(registry: &Arc<ModeRegistry>, rails: &[&str; 4]) -> Result<QuantumState> {
    channel_state(registry, 1, rails)
}

fn branch_occupations(
    registry: &Arc<ModeRegistry>,
    rails: &[&str],
) -> Result<(Occupation, Occupation)> {
    let mut seen = Vec::with_capacity(rails.len());
    let mut first = Occupation::vacuum(registry.len());
    let mut second = Occupation::vacuum(registry.len());
    for (pos, rail) in rails.iter().enumerate() {
        let idx = registry.require(rail)?;
        if seen.contains(&idx) {
            return Err(Error::Config(format!("rail `{rail}` listed twice")));
        }
        seen.push(idx);
        if pos % 2 == 0 {
            first.set(idx, 1);
        } else {
            second.set(idx, 1);
        }
    }
    Ok((first, second))
}

/// Physical preparation of a real-amplitude input: one photon incident on a
/// beam splitter with reflection `r` and transmission `t` leaves the rails in
/// r|1,0⟩ + t|0,1⟩.
pub fn input_state_via_beam_splitter(
    registry: &Arc<ModeRegistry>,
    rails: (&str, &str),
    r: f64,
    t: f64,
) -> Result<QuantumState> {
    if (r * r + t * t - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "reflection/transmission not normalized: r²+t² = {}",
            r * r + t * t
        )));
    }
    let mut counts = Occupation::vacuum(registry.len());
    counts.set(registry.require(rails.0)?, 1);
    let injected =
        QuantumState::from_terms(Arc::clone(registry), [(counts, Complex64::new(1.0, 0.0))])?;
    // The reflected branch keeps the photon in its original rail, so the
    // splitter's diagonal entry is r and the cross entry is t.
    let spec = BeamSplitterSpec::new(
        rails.0,
        rails.1,
        Complex64::new(r, 0.0),
        Complex64::new(t, 0.0),
    )?;
    apply_beam_splitter(&injected, &spec)
}

/// Product of the two independent pair sources feeding the event-ready setup:
/// (1/√2)(|1⟩A1|1⟩G1 + |1⟩B2|1⟩H2) ⊗ (1/√2)(|1⟩A2|1⟩G2 + |1⟩B1|1⟩H1),
/// a four-photon, four-term state with amplitudes 1/2.
pub fn event_ready_product(registry: &Arc<ModeRegistry>) -> Result<QuantumState> {
    let occupied = |modes: [&str; 4]| -> Result<Occupation> {
        let mut occ = Occupation::vacuum(registry.len());
        for mode in modes {
            occ.set(registry.require(mode)?, 1);
        }
        Ok(occ)
    };
    let half = Complex64::new(0.5, 0.0);
    QuantumState::from_terms(
        Arc::clone(registry),
        [
            (occupied(["A1", "G1", "A2", "G2"])?, half),
            (occupied(["A1", "G1", "B1", "H1"])?, half),
            (occupied(["B2", "H2", "A2", "G2"])?, half),
            (occupied(["B2", "H2", "B1", "H1"])?, half),
        ],
    )
}
