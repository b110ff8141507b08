//! End-to-end teleportation runs: assemble the channel and input states,
//! apply the sender's array of Bell beam splitters, enumerate or sample the
//! detector outcomes, classify them, apply the receiver's parity correction,
//! and score fidelities against the transported input.
//!
//! The scheme teleports an N-particle dual-rail entangled state through an
//! (N+1)-particle channel with N+1 Bell measurements. Pair 0 interferes the
//! channel's first rail with the input's first rail, pair 1 the channel's
//! second rail with the input's second rail, and pair k ≥ 2 interferes the
//! two rails of input particle k−1 with each other. Every readout in which
//! all pairs resolve to a Ψ state succeeds; the receiver's correction depends
//! only on whether the number of Ψ⁻ readouts is even or odd. The four Φ
//! products are indistinguishable behind the splitters, which caps the
//! success probability at 50%.
//!
//! Mode names are canonical: channel rails `ch.k.1`/`ch.k.2` for k = 0..=N,
//! input rails `in.k.1`/`in.k.2` for k = 0..N, and detector ids `det.k.1`
//! (Ψ⁺ port) and `det.k.2` (Ψ⁻ port) per Bell pair k. Front ends may map
//! these back to conventional labels for display.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::bell::Parity;
use crate::error::{Error, Result};
use crate::measurement::{
    classify_pair, outcome_distribution, outcomes_parity, BellOutcome, DetectorPattern,
    OutcomeDistribution,
};
use crate::modes::ModeRegistry;
use crate::optics::{apply_beam_splitter, phase_shift, relabel_modes, BeamSplitterSpec};
use crate::sources::{channel_state, event_ready_product, input_entangled_state, InputSpec};
use crate::state::QuantumState;

/// How outcomes are produced: exact enumeration of the full distribution, or
/// seeded Monte Carlo draws from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    Exact,
    MonteCarlo { shots: u64 },
}

/// Optional side-by-side comparison embedded in a run's aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// Two independent pair sources and two successive single-pair Bell
    /// measurements instead of the direct scheme.
    SequentialSwap,
}

/// Full description of one protocol run.
#[derive(Debug, Clone, Serialize)]
pub struct ProtocolConfig {
    pub particles: u32,
    pub input: InputSpec,
    pub mode: RunMode,
    pub event_ready: bool,
    pub seed: u64,
    pub comparison: Option<Comparison>,
}

impl ProtocolConfig {
    /// Exact-enumeration run with defaults for everything but the input.
    pub fn exact(input: InputSpec) -> Self {
        Self {
            particles: input.particles,
            input,
            mode: RunMode::Exact,
            event_ready: false,
            seed: 1,
            comparison: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.particles == 0 {
            return Err(Error::Config("particle count must be at least 1".into()));
        }
        if self.particles != self.input.particles {
            return Err(Error::Config(format!(
                "config particle count {} disagrees with input spec {}",
                self.particles, self.input.particles
            )));
        }
        if let RunMode::MonteCarlo { shots } = self.mode {
            if shots == 0 {
                return Err(Error::Config(
                    "Monte Carlo runs need at least one shot".into(),
                ));
            }
        }
        if self.event_ready {
            if self.particles != 1 {
                return Err(Error::Config(
                    "the event-ready variant is defined for one particle only".into(),
                ));
            }
            if self.mode != RunMode::Exact {
                return Err(Error::Config(
                    "the event-ready analysis is exact; sampling is not supported".into(),
                ));
            }
        }
        Ok(())
    }
}

/// What the sender transmits over the classical channel after one event:
/// whether the readout succeeded, the parity driving the receiver's
/// correction, and the raw pattern for audit.
#[derive(Debug, Clone, Serialize)]
pub struct ClassicalMessage {
    pub success: bool,
    pub parity: Option<Parity>,
    pub pattern: DetectorPattern,
}

impl ClassicalMessage {
    pub fn from_outcomes(pattern: DetectorPattern, outcomes: &[BellOutcome]) -> Self {
        let parity = outcomes_parity(outcomes);
        match parity {
            Parity::Inapplicable => Self {
                success: false,
                parity: None,
                pattern,
            },
            p => Self {
                success: true,
                parity: Some(p),
                pattern,
            },
        }
    }
}

/// One classified outcome row of a run report. In exact runs `probability`
/// is the exact outcome probability; in sampled runs it is the empirical
/// frequency and `count`/`expected_probability` are filled in.
#[derive(Debug, Clone, Serialize)]
pub struct OutcomeRow {
    pub pattern: DetectorPattern,
    pub probability: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_probability: Option<f64>,
    pub labels: Vec<String>,
    pub parity: Option<Parity>,
    pub fidelity: Option<f64>,
    pub success: bool,
}

/// One heralding outcome of the event-ready source stage.
#[derive(Debug, Clone, Serialize)]
pub struct HeraldingRow {
    pub pattern: DetectorPattern,
    pub probability: f64,
    pub accepted: bool,
}

/// Aggregate figures for a run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Aggregates {
    pub success_probability: f64,
    pub failure_probability: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_success_fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heralding_probability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heralded_source_fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison_success_probability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub success_count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub success_standard_error: Option<f64>,
}

/// Complete result of one run: per-outcome rows, aggregates, configuration
/// echo and any warnings. Serialization is deterministic, so identical
/// configurations produce byte-identical reports.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: ProtocolConfig,
    pub rows: Vec<OutcomeRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heralding: Option<Vec<HeraldingRow>>,
    pub aggregates: Aggregates,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

// ---------------------------------------------------------------------------
// Canonical mode and detector layout
// ---------------------------------------------------------------------------

fn channel_rail(k: u32, rail: u32) -> String {
    format!("ch.{k}.{rail}")
}

fn input_rail(k: u32, rail: u32) -> String {
    format!("in.{k}.{rail}")
}

/// Detector id of Bell pair `k`: port 1 is the Ψ⁺ port, port 2 the Ψ⁻ port.
pub fn detector_id(pair: u32, port: u32) -> String {
    format!("det.{pair}.{port}")
}

/// Canonical registry for an N-particle run: all channel rails, then all
/// input rails.
pub fn standard_registry(particles: u32) -> Result<Arc<ModeRegistry>> {
    let mut names = Vec::with_capacity(4 * particles as usize + 2);
    for k in 0..=particles {
        names.push(channel_rail(k, 1));
        names.push(channel_rail(k, 2));
    }
    for k in 0..particles {
        names.push(input_rail(k, 1));
        names.push(input_rail(k, 2));
    }
    ModeRegistry::shared(names)
}

/// The N+1 mode pairs fed into the sender's Bell beam splitters.
pub fn bell_pairs(particles: u32) -> Vec<(String, String)> {
    let mut pairs = Vec::with_capacity(particles as usize + 1);
    pairs.push((channel_rail(0, 1), input_rail(0, 1)));
    pairs.push((channel_rail(0, 2), input_rail(0, 2)));
    for k in 2..=particles {
        pairs.push((input_rail(k - 1, 1), input_rail(k - 1, 2)));
    }
    pairs
}

/// Detector id pairs, index-aligned with [`bell_pairs`].
pub fn detector_ids(particles: u32) -> Vec<(String, String)> {
    (0..=particles)
        .map(|k| (detector_id(k, 1), detector_id(k, 2)))
        .collect()
}

fn detector_rename(pairs: &[(String, String)]) -> BTreeMap<String, String> {
    let mut map = BTreeMap::new();
    for (k, (port1, port2)) in pairs.iter().enumerate() {
        map.insert(port1.clone(), detector_id(k as u32, 1));
        map.insert(port2.clone(), detector_id(k as u32, 2));
    }
    map
}

/// The receiver's rails, in registry order (one consecutive pair per
/// transported particle).
pub fn bob_rails(particles: u32) -> Vec<String> {
    (1..=particles)
        .flat_map(|k| [channel_rail(k, 1), channel_rail(k, 2)])
        .collect()
}

// ---------------------------------------------------------------------------
// Protocol operations
// ---------------------------------------------------------------------------

/// Assembles the full pre-measurement photon field: channel ⊗ input. With
/// `event_ready` set, the channel factor is the dual-source product whose
/// heralded branch collapses to the plain pair source.
pub fn assemble(config: &ProtocolConfig) -> Result<QuantumState> {
    config.validate()?;
    let n = config.particles;
    if config.event_ready {
        let source_registry =
            ModeRegistry::shared(["A1", "A2", "B1", "B2", "G1", "G2", "H1", "H2"])?;
        let source = event_ready_product(&source_registry)?;
        let input_registry = ModeRegistry::shared(["a1", "a2"])?;
        let input = input_entangled_state(&input_registry, &config.input, &["a1", "a2"])?;
        return source.tensor(&input);
    }
    let channel_registry = ModeRegistry::shared(
        (0..=n)
            .flat_map(|k| [channel_rail(k, 1), channel_rail(k, 2)])
            .collect::<Vec<_>>(),
    )?;
    let channel_rails: Vec<String> = channel_registry.names().to_vec();
    let channel = channel_state(
        &channel_registry,
        n,
        &channel_rails.iter().map(String::as_str).collect::<Vec<_>>(),
    )?;
    let input_registry = ModeRegistry::shared(
        (0..n)
            .flat_map(|k| [input_rail(k, 1), input_rail(k, 2)])
            .collect::<Vec<_>>(),
    )?;
    let input_rails: Vec<String> = input_registry.names().to_vec();
    let input = input_entangled_state(
        &input_registry,
        &config.input,
        &input_rails.iter().map(String::as_str).collect::<Vec<_>>(),
    )?;
    channel.tensor(&input)
}

fn interfere_pairs(state: &QuantumState, pairs: &[(String, String)]) -> Result<QuantumState> {
    let mut current = state.clone();
    for (first, second) in pairs {
        current = apply_beam_splitter(&current, &BeamSplitterSpec::balanced(first, second))?;
    }
    Ok(current)
}

/// Applies the sender's N+1 balanced Bell beam splitters.
pub fn alice_interfere(state: &QuantumState, config: &ProtocolConfig) -> Result<QuantumState> {
    interfere_pairs(state, &bell_pairs(config.particles))
}

/// The receiver's correction for a successful readout.
///
/// The state must live on the receiver's rails, one consecutive pair per
/// particle. Even parity needs only the rail-role swap within every pair
/// (the first rail of each pair is the teleported image of the input's
/// second rail and vice versa); odd parity additionally flips the sign of
/// every first-rail-occupied branch via a π phase on the first rail before
/// the same swap.
pub fn bob_correct(state: &QuantumState, parity: Parity) -> Result<QuantumState> {
    let registry = state.registry();
    if registry.is_empty() || !registry.len().is_multiple_of(2) {
        return Err(Error::Contract(
            "receiver correction needs a state on whole rail pairs".into(),
        ));
    }
    let phased = match parity {
        Parity::Inapplicable => {
            return Err(Error::Contract(
                "no correction exists for an ambiguous readout; filter failures first".into(),
            ));
        }
        Parity::Even => state.clone(),
        Parity::Odd => phase_shift(state, registry.name(0), PI)?,
    };
    let mut swap = BTreeMap::new();
    for pair in 0..registry.len() / 2 {
        let first = registry.name(2 * pair).to_string();
        let second = registry.name(2 * pair + 1).to_string();
        swap.insert(first.clone(), second.clone());
        swap.insert(second, first);
    }
    relabel_modes(&phased, &swap)
}

/// The transported input pattern on the receiver's rails: the comparison
/// frame for all fidelity scores.
pub fn bob_target(input: &InputSpec, bob_registry: &Arc<ModeRegistry>) -> Result<QuantumState> {
    let rails: Vec<&str> = bob_registry.names().iter().map(String::as_str).collect();
    input_entangled_state(bob_registry, input, &rails)
}

// ---------------------------------------------------------------------------
// Shared run machinery
// ---------------------------------------------------------------------------

struct PreparedRun {
    distribution: OutcomeDistribution,
    detector_pairs: Vec<(String, String)>,
    target: QuantumState,
    correct: CorrectionStyle,
}

/// Which correction the receiver applies on success.
#[derive(Clone, Copy)]
enum CorrectionStyle {
    /// Rail swap within every pair, plus a π phase when parity is odd.
    SwapAndPhase,
    /// π phase only; used when each channel pair links one sender rail
    /// directly to the like-numbered receiver rail.
    PhaseOnly,
}

fn apply_correction(
    style: CorrectionStyle,
    conditional: &QuantumState,
    parity: Parity,
) -> Result<QuantumState> {
    match style {
        CorrectionStyle::SwapAndPhase => bob_correct(conditional, parity),
        CorrectionStyle::PhaseOnly => match parity {
            Parity::Inapplicable => Err(Error::Contract(
                "no correction exists for an ambiguous readout".into(),
            )),
            Parity::Even => Ok(conditional.clone()),
            Parity::Odd => phase_shift(conditional, conditional.registry().name(0), PI),
        },
    }
}

fn classify_event(
    pattern: &DetectorPattern,
    detector_pairs: &[(String, String)],
) -> Result<Vec<BellOutcome>> {
    detector_pairs
        .iter()
        .map(|(p1, p2)| classify_pair(pattern.count(p1), pattern.count(p2)))
        .collect()
}

/// Classifies one outcome and, on success, applies the correction and scores
/// the fidelity against the transported target.
fn evaluate_outcome(
    prepared: &PreparedRun,
    pattern: &DetectorPattern,
    probability: f64,
    conditional: &QuantumState,
) -> Result<OutcomeRow> {
    let outcomes = classify_event(pattern, &prepared.detector_pairs)?;
    let message = ClassicalMessage::from_outcomes(pattern.clone(), &outcomes);
    let fidelity = match message.parity {
        Some(parity) => {
            let corrected = apply_correction(prepared.correct, conditional, parity)?;
            Some(corrected.fidelity(&prepared.target)?)
        }
        None => None,
    };
    Ok(OutcomeRow {
        pattern: message.pattern,
        probability,
        count: None,
        expected_probability: None,
        labels: outcomes.iter().map(ToString::to_string).collect(),
        parity: message.parity,
        fidelity,
        success: message.success,
    })
}

fn prepare_standard(config: &ProtocolConfig) -> Result<PreparedRun> {
    let assembled = assemble(config)?;
    let interfered = alice_interfere(&assembled, config)?;
    let renamed = interfered.with_renamed_modes(&detector_rename(&bell_pairs(config.particles)))?;
    let detector_pairs = detector_ids(config.particles);
    let detector_modes: Vec<String> = detector_pairs
        .iter()
        .flat_map(|(a, b)| [a.clone(), b.clone()])
        .collect();
    let distribution = outcome_distribution(
        &renamed,
        &detector_modes
            .iter()
            .map(String::as_str)
            .collect::<Vec<_>>(),
    )?;
    let bob_registry = ModeRegistry::shared(bob_rails(config.particles))?;
    let target = bob_target(&config.input, &bob_registry)?;
    Ok(PreparedRun {
        distribution,
        detector_pairs,
        target,
        correct: CorrectionStyle::SwapAndPhase,
    })
}

fn exact_rows(prepared: &PreparedRun) -> Result<Vec<OutcomeRow>> {
    prepared
        .distribution
        .entries()
        .iter()
        .map(|e| evaluate_outcome(prepared, &e.pattern, e.probability, &e.conditional))
        .collect()
}

fn aggregate_exact(rows: &[OutcomeRow]) -> Aggregates {
    let success_probability: f64 = rows
        .iter()
        .filter(|r| r.success)
        .map(|r| r.probability)
        .sum();
    let failure_probability: f64 = rows
        .iter()
        .filter(|r| !r.success)
        .map(|r| r.probability)
        .sum();
    let mean_success_fidelity = if success_probability > 0.0 {
        Some(
            rows.iter()
                .filter(|r| r.success)
                .map(|r| r.probability * r.fidelity.unwrap_or(0.0))
                .sum::<f64>()
                / success_probability,
        )
    } else {
        None
    };
    Aggregates {
        success_probability,
        failure_probability,
        mean_success_fidelity,
        ..Aggregates::default()
    }
}

fn embedded_comparison(config: &ProtocolConfig) -> Result<Option<f64>> {
    match config.comparison {
        Some(Comparison::SequentialSwap) => {
            let mut sub = config.clone();
            sub.mode = RunMode::Exact;
            sub.comparison = None;
            sub.event_ready = false;
            let report = run_sequential_swap(&sub)?;
            Ok(Some(report.aggregates.success_probability))
        }
        None => Ok(None),
    }
}

/// One independent random stream per shot, derived from the master seed.
fn shot_stream(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

// ---------------------------------------------------------------------------
// Run modes
// ---------------------------------------------------------------------------

/// Exhaustive enumeration of the standard scheme.
pub fn run_exact(config: &ProtocolConfig) -> Result<RunReport> {
    config.validate()?;
    let prepared = prepare_standard(config)?;
    let rows = exact_rows(&prepared)?;
    let mut aggregates = aggregate_exact(&rows);
    aggregates.comparison_success_probability = embedded_comparison(config)?;
    Ok(RunReport {
        config: config.clone(),
        rows,
        heralding: None,
        aggregates,
        warnings: Vec::new(),
    })
}

/// Seeded Monte Carlo sampling of the standard scheme. Shot `i` draws from
/// stream `i` of the master seed, so reports are reproducible and independent
/// of execution order.
pub fn run_sampled(config: &ProtocolConfig) -> Result<RunReport> {
    config.validate()?;
    let RunMode::MonteCarlo { shots } = config.mode else {
        return Err(Error::Config("run_sampled needs a Monte Carlo mode".into()));
    };
    let prepared = prepare_standard(config)?;
    let classified = exact_rows(&prepared)?;

    let mut counts = vec![0u64; prepared.distribution.len()];
    for shot in 0..shots {
        let mut rng = shot_stream(config.seed, shot);
        counts[prepared.distribution.sample_index(&mut rng)] += 1;
    }

    let mut rows = Vec::new();
    let mut success_count = 0u64;
    let mut fidelity_sum = 0.0;
    for (row, &count) in classified.iter().zip(&counts) {
        if row.success {
            success_count += count;
            fidelity_sum += count as f64 * row.fidelity.unwrap_or(0.0);
        }
        if count == 0 {
            continue;
        }
        let mut sampled_row = row.clone();
        sampled_row.count = Some(count);
        sampled_row.expected_probability = Some(row.probability);
        sampled_row.probability = count as f64 / shots as f64;
        rows.push(sampled_row);
    }

    let success_rate = success_count as f64 / shots as f64;
    let aggregates = Aggregates {
        success_probability: success_rate,
        failure_probability: 1.0 - success_rate,
        mean_success_fidelity: (success_count > 0).then(|| fidelity_sum / success_count as f64),
        comparison_success_probability: embedded_comparison(config)?,
        shots: Some(shots),
        success_count: Some(success_count),
        success_standard_error: Some((success_rate * (1.0 - success_rate) / shots as f64).sqrt()),
        ..Aggregates::default()
    };
    Ok(RunReport {
        config: config.clone(),
        rows,
        heralding: None,
        aggregates,
        warnings: Vec::new(),
    })
}

/// The event-ready variant: the dual-source station interferes its auxiliary
/// beams on two balanced splitters and only runs the teleportation when one
/// photon lands on each station's like-numbered detector. The heralded
/// channel state equals the plain pair source exactly, so the downstream
/// statistics reproduce the standard run conditionally on heralding.
pub fn run_event_ready(config: &ProtocolConfig) -> Result<RunReport> {
    config.validate()?;
    if !config.event_ready {
        return Err(Error::Config(
            "run_event_ready needs the event_ready flag".into(),
        ));
    }

    let assembled = assemble(config)?;
    let heralded = interfere_pairs(
        &assembled,
        &[
            ("G1".to_string(), "G2".to_string()),
            ("H1".to_string(), "H2".to_string()),
        ],
    )?;
    let herald_rename = BTreeMap::from([
        ("G1".to_string(), "det.g.1".to_string()),
        ("G2".to_string(), "det.g.2".to_string()),
        ("H1".to_string(), "det.h.1".to_string()),
        ("H2".to_string(), "det.h.2".to_string()),
    ]);
    let heralded = heralded.with_renamed_modes(&herald_rename)?;
    let herald_modes = ["det.g.1", "det.g.2", "det.h.1", "det.h.2"];
    let herald_dist = outcome_distribution(&heralded, &herald_modes)?;

    let accepted_patterns = [
        DetectorPattern::new()
            .with("det.g.1", 1)
            .with("det.g.2", 0)
            .with("det.h.1", 1)
            .with("det.h.2", 0),
        DetectorPattern::new()
            .with("det.g.1", 0)
            .with("det.g.2", 1)
            .with("det.h.1", 0)
            .with("det.h.2", 1),
    ];

    // Reference for the heralded conditional: the plain pair source times the
    // untouched input, on the post-herald registry [A1,A2,B1,B2,a1,a2].
    let source_registry = ModeRegistry::shared(["A1", "A2", "B1", "B2"])?;
    let pair_source = channel_state(&source_registry, 1, &["A1", "A2", "B1", "B2"])?;
    let input_registry = ModeRegistry::shared(["a1", "a2"])?;
    let input = input_entangled_state(&input_registry, &config.input, &["a1", "a2"])?;
    let herald_reference = pair_source.tensor(&input)?;

    let mut heralding_rows = Vec::new();
    let mut heralding_probability = 0.0;
    let mut source_fidelity: Option<f64> = None;
    let mut branch_rows: Vec<Vec<OutcomeRow>> = Vec::new();

    let downstream_pairs = [
        ("A1".to_string(), "a1".to_string()),
        ("A2".to_string(), "a2".to_string()),
    ];
    let downstream_rename = detector_rename(&downstream_pairs);
    let detector_pairs = detector_ids(1);
    let bob_registry = ModeRegistry::shared(["B1", "B2"])?;
    let target = bob_target(&config.input, &bob_registry)?;

    for entry in herald_dist.entries() {
        let accepted = accepted_patterns.contains(&entry.pattern);
        heralding_rows.push(HeraldingRow {
            pattern: entry.pattern.clone(),
            probability: entry.probability,
            accepted,
        });
        if !accepted {
            continue;
        }
        heralding_probability += entry.probability;
        let fid = entry.conditional.fidelity(&herald_reference)?;
        source_fidelity = Some(source_fidelity.map_or(fid, |f: f64| f.min(fid)));

        let interfered = interfere_pairs(&entry.conditional, &downstream_pairs)?;
        let renamed = interfered.with_renamed_modes(&downstream_rename)?;
        let detector_modes: Vec<String> = detector_pairs
            .iter()
            .flat_map(|(a, b)| [a.clone(), b.clone()])
            .collect();
        let dist = outcome_distribution(
            &renamed,
            &detector_modes
                .iter()
                .map(String::as_str)
                .collect::<Vec<_>>(),
        )?;
        let prepared = PreparedRun {
            distribution: dist,
            detector_pairs: detector_pairs.clone(),
            target: target.clone(),
            correct: CorrectionStyle::SwapAndPhase,
        };
        branch_rows.push(exact_rows(&prepared)?);
    }

    // Both heralded branches collapse the source identically, so their
    // downstream statistics must agree row by row.
    if let [first, rest @ ..] = branch_rows.as_slice() {
        for other in rest {
            if first.len() != other.len() {
                return Err(Error::ConventionViolation(
                    "heralded branches disagree on the downstream outcome set".into(),
                ));
            }
            for (a, b) in first.iter().zip(other) {
                if a.pattern != b.pattern || (a.probability - b.probability).abs() > 1e-12 {
                    return Err(Error::ConventionViolation(
                        "heralded branches disagree on downstream statistics".into(),
                    ));
                }
            }
        }
    }

    let rows = branch_rows.into_iter().next().unwrap_or_default();
    let mut aggregates = aggregate_exact(&rows);
    aggregates.heralding_probability = Some(heralding_probability);
    aggregates.heralded_source_fidelity = source_fidelity;
    aggregates.comparison_success_probability = embedded_comparison(config)?;
    Ok(RunReport {
        config: config.clone(),
        rows,
        heralding: Some(heralding_rows),
        aggregates,
        warnings: Vec::new(),
    })
}

/// The sequential alternative: two independent single-photon pair sources
/// (A1,B1) and (A2,B2), and two successive single-pair Bell measurements at
/// the sender. Both must resolve to Ψ states, so the overall success
/// probability is 1/4; a failed first measurement short-circuits the event.
pub fn run_sequential_swap(config: &ProtocolConfig) -> Result<RunReport> {
    config.validate()?;
    if config.particles != 1 {
        return Err(Error::Config(
            "the sequential-swap comparison is defined for one particle only".into(),
        ));
    }

    let stage = prepare_sequential(config)?;

    match config.mode {
        RunMode::Exact => {
            let mut rows = Vec::new();
            for (idx1, e1) in stage.first.entries().iter().enumerate() {
                let outcome1 =
                    classify_pair(e1.pattern.count("det.0.1"), e1.pattern.count("det.0.2"))?;
                if !outcome1.is_success() {
                    rows.push(sequential_failure_row(
                        &e1.pattern,
                        e1.probability,
                        &[outcome1],
                    ));
                    continue;
                }
                for e2 in stage.second[idx1]
                    .as_ref()
                    .expect("stage 2 prepared")
                    .entries()
                {
                    let outcome2 =
                        classify_pair(e2.pattern.count("det.1.1"), e2.pattern.count("det.1.2"))?;
                    let pattern = merge_patterns(&e1.pattern, &e2.pattern);
                    let probability = e1.probability * e2.probability;
                    let outcomes = [outcome1, outcome2];
                    let row =
                        sequential_row(&stage, pattern, probability, &outcomes, &e2.conditional)?;
                    rows.push(row);
                }
            }
            let mut aggregates = aggregate_exact(&rows);
            aggregates.comparison_success_probability = None;
            Ok(RunReport {
                config: config.clone(),
                rows,
                heralding: None,
                aggregates,
                warnings: Vec::new(),
            })
        }
        RunMode::MonteCarlo { shots } => {
            // Pattern index → (count, template row).
            let mut tallies: BTreeMap<DetectorPattern, (u64, OutcomeRow)> = BTreeMap::new();
            let mut success_count = 0u64;
            for shot in 0..shots {
                let mut rng = shot_stream(config.seed, shot);
                let idx1 = stage.first.sample_index(&mut rng);
                let e1 = &stage.first.entries()[idx1];
                let outcome1 =
                    classify_pair(e1.pattern.count("det.0.1"), e1.pattern.count("det.0.2"))?;
                let (pattern, row) = if !outcome1.is_success() {
                    (
                        e1.pattern.clone(),
                        sequential_failure_row(&e1.pattern, e1.probability, &[outcome1]),
                    )
                } else {
                    let second = stage.second[idx1].as_ref().expect("stage 2 prepared");
                    let e2 = &second.entries()[second.sample_index(&mut rng)];
                    let outcome2 =
                        classify_pair(e2.pattern.count("det.1.1"), e2.pattern.count("det.1.2"))?;
                    let pattern = merge_patterns(&e1.pattern, &e2.pattern);
                    let probability = e1.probability * e2.probability;
                    let row = sequential_row(
                        &stage,
                        pattern.clone(),
                        probability,
                        &[outcome1, outcome2],
                        &e2.conditional,
                    )?;
                    (pattern, row)
                };
                if row.success {
                    success_count += 1;
                }
                tallies.entry(pattern).or_insert((0, row)).0 += 1;
            }
            let mut rows = Vec::new();
            for (_, (count, mut row)) in tallies {
                row.count = Some(count);
                row.expected_probability = Some(row.probability);
                row.probability = count as f64 / shots as f64;
                rows.push(row);
            }
            let success_rate = success_count as f64 / shots as f64;
            let aggregates = Aggregates {
                success_probability: success_rate,
                failure_probability: 1.0 - success_rate,
                mean_success_fidelity: (success_count > 0).then_some(1.0),
                shots: Some(shots),
                success_count: Some(success_count),
                success_standard_error: Some(
                    (success_rate * (1.0 - success_rate) / shots as f64).sqrt(),
                ),
                ..Aggregates::default()
            };
            Ok(RunReport {
                config: config.clone(),
                rows,
                heralding: None,
                aggregates,
                warnings: Vec::new(),
            })
        }
    }
}

struct SequentialStage {
    first: OutcomeDistribution,
    /// Stage-2 distribution per stage-1 entry (None for failed stage 1).
    second: Vec<Option<OutcomeDistribution>>,
    target: QuantumState,
}

fn prepare_sequential(config: &ProtocolConfig) -> Result<SequentialStage> {
    let pair1_registry = ModeRegistry::shared(["A1", "B1"])?;
    let pair1 = crate::bell::bell_state(
        &pair1_registry,
        ("A1", "B1"),
        crate::bell::BellLabel::PsiPlus,
    )?;
    let pair2_registry = ModeRegistry::shared(["A2", "B2"])?;
    let pair2 = crate::bell::bell_state(
        &pair2_registry,
        ("A2", "B2"),
        crate::bell::BellLabel::PsiPlus,
    )?;
    let input_registry = ModeRegistry::shared(["a1", "a2"])?;
    let input = input_entangled_state(&input_registry, &config.input, &["a1", "a2"])?;
    let full = pair1.tensor(&pair2)?.tensor(&input)?;

    let stage1 = apply_beam_splitter(&full, &BeamSplitterSpec::balanced("A1", "a1"))?;
    let stage1 = stage1.with_renamed_modes(&BTreeMap::from([
        ("A1".to_string(), "det.0.1".to_string()),
        ("a1".to_string(), "det.0.2".to_string()),
    ]))?;
    let first = outcome_distribution(&stage1, &["det.0.1", "det.0.2"])?;

    let mut second = Vec::with_capacity(first.len());
    for entry in first.entries() {
        let outcome = classify_pair(
            entry.pattern.count("det.0.1"),
            entry.pattern.count("det.0.2"),
        )?;
        if !outcome.is_success() {
            second.push(None);
            continue;
        }
        let stage2 =
            apply_beam_splitter(&entry.conditional, &BeamSplitterSpec::balanced("A2", "a2"))?;
        let stage2 = stage2.with_renamed_modes(&BTreeMap::from([
            ("A2".to_string(), "det.1.1".to_string()),
            ("a2".to_string(), "det.1.2".to_string()),
        ]))?;
        second.push(Some(outcome_distribution(
            &stage2,
            &["det.1.1", "det.1.2"],
        )?));
    }

    let bob_registry = ModeRegistry::shared(["B1", "B2"])?;
    let target = bob_target(&config.input, &bob_registry)?;
    Ok(SequentialStage {
        first,
        second,
        target,
    })
}

fn sequential_failure_row(
    pattern: &DetectorPattern,
    probability: f64,
    outcomes: &[BellOutcome],
) -> OutcomeRow {
    OutcomeRow {
        pattern: pattern.clone(),
        probability,
        count: None,
        expected_probability: None,
        labels: outcomes.iter().map(ToString::to_string).collect(),
        parity: None,
        fidelity: None,
        success: false,
    }
}

fn sequential_row(
    stage: &SequentialStage,
    pattern: DetectorPattern,
    probability: f64,
    outcomes: &[BellOutcome],
    conditional: &QuantumState,
) -> Result<OutcomeRow> {
    let message = ClassicalMessage::from_outcomes(pattern, outcomes);
    let fidelity = match message.parity {
        Some(parity) => {
            let corrected = apply_correction(CorrectionStyle::PhaseOnly, conditional, parity)?;
            Some(corrected.fidelity(&stage.target)?)
        }
        None => None,
    };
    Ok(OutcomeRow {
        pattern: message.pattern,
        probability,
        count: None,
        expected_probability: None,
        labels: outcomes.iter().map(ToString::to_string).collect(),
        parity: message.parity,
        fidelity,
        success: message.success,
    })
}

fn merge_patterns(a: &DetectorPattern, b: &DetectorPattern) -> DetectorPattern {
    let mut merged = DetectorPattern::new();
    for (id, &count) in a.counts().iter().chain(b.counts()) {
        merged = merged.with(id.clone(), count);
    }
    merged
}

/// Dispatches a configuration to the matching run mode.
pub fn run(config: &ProtocolConfig) -> Result<RunReport> {
    if config.event_ready {
        run_event_ready(config)
    } else {
        match config.mode {
            RunMode::Exact => run_exact(config),
            RunMode::MonteCarlo { .. } => run_sampled(config),
        }
    }
}
