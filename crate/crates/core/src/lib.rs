//! Sparse multi-mode Fock-space simulation of direct teleportation for
//! dual-rail entangled photonic states.
//!
//! The library models an occupation-number encoded protocol in which an
//! unknown N-particle entangled state is transferred whole onto the
//! receiver's beams through an (N+1)-particle channel and N+1 linear-optics
//! Bell measurements. It provides:
//!
//! - [`modes`] / [`state`]: named optical modes and sparse photon-number
//!   states with tensor products, inner products, fidelity and projective
//!   collapse;
//! - [`optics`]: beam splitters, phase shifters and mode relabeling acting
//!   unitarily on those states;
//! - [`sources`]: constructors for the unknown input, the pair source, its
//!   multi-particle generalization and the dual-source event-ready setup;
//! - [`bell`]: Bell-basis definitions, product decomposition and the Ψ⁻
//!   parity rule;
//! - [`measurement`]: exact detector outcome enumeration, seeded sampling
//!   and Bell readout classification;
//! - [`protocol`]: end-to-end runs (exact, Monte Carlo, event-ready and the
//!   sequential-swap comparison) with serializable reports.
//!
//! ```
//! use telsim_core::{InputSpec, ProtocolConfig, run_exact};
//! use num_complex::Complex64;
//!
//! let input = InputSpec::new(
//!     Complex64::new(0.6, 0.0),
//!     Complex64::new(0.8, 0.0),
//!     1,
//! ).unwrap();
//! let report = run_exact(&ProtocolConfig::exact(input)).unwrap();
//! assert!((report.aggregates.success_probability - 0.5).abs() < 1e-12);
//! ```

pub mod bell;
pub mod error;
pub mod measurement;
pub mod modes;
pub mod optics;
pub mod protocol;
pub mod sources;
pub mod state;

pub use bell::{
    bell_decompose, bell_state, psi_minus_parity, BellLabel, BellProductCoefficients, Parity,
};
pub use error::{Error, Result};
pub use measurement::{
    classify_pair, outcome_distribution, outcomes_parity, sample_outcome, BellOutcome,
    DetectorPattern, OutcomeDistribution,
};
pub use modes::{ModeRegistry, Occupation};
pub use optics::{apply_beam_splitter, phase_shift, relabel_modes, BeamSplitterSpec};
pub use protocol::{
    alice_interfere, assemble, bob_correct, bob_target, run, run_event_ready, run_exact,
    run_sampled, run_sequential_swap, Aggregates, ClassicalMessage, Comparison, OutcomeRow,
    ProtocolConfig, RunMode, RunReport,
};
pub use sources::{
    channel_state, event_ready_product, input_entangled_state, input_state_via_beam_splitter,
    pdc_pair_state, InputSpec,
};
pub use state::{QuantumState, DEFAULT_PRUNE_EPS, NORM_TOLERANCE};
