//! Beam-splitter behavior checked against two independent oracles: the
//! per-photon routing expansion and the generator exponential on fixed
//! photon-number blocks.

mod common;

use common::{balanced_block_apply, random_amplitude_pair, route, route_once, RoutedSplitter};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;
use telsim_core::{apply_beam_splitter, BeamSplitterSpec, ModeRegistry, Occupation, QuantumState};

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn two_mode_state(terms: &[([u32; 2], Complex64)]) -> QuantumState {
    let reg = ModeRegistry::shared(["x", "y"]).unwrap();
    QuantumState::from_terms_normalized(
        reg,
        terms
            .iter()
            .map(|(occ, amp)| (Occupation::from(*occ), *amp)),
    )
    .unwrap()
}

fn as_term_map(state: &QuantumState) -> BTreeMap<Vec<u32>, Complex64> {
    state
        .terms()
        .map(|(occ, amp)| (occ.counts().to_vec(), amp))
        .collect()
}

fn assert_term_maps_close(
    actual: &BTreeMap<Vec<u32>, Complex64>,
    expected: &BTreeMap<Vec<u32>, Complex64>,
    tolerance: f64,
) {
    let keys: std::collections::BTreeSet<_> = actual.keys().chain(expected.keys()).collect();
    for key in keys {
        let a = actual.get(key).copied().unwrap_or(Complex64::new(0.0, 0.0));
        let e = expected
            .get(key)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0));
        assert!(
            (a - e).norm() < tolerance,
            "term {key:?}: implementation {a}, oracle {e}"
        );
    }
}

#[test]
fn routing_oracle_confirms_single_photon_split() {
    let state = two_mode_state(&[([1, 0], re(1.0))]);
    let out = apply_beam_splitter(&state, &BeamSplitterSpec::balanced("x", "y")).unwrap();
    let oracle = route_once(&as_term_map(&state), &RoutedSplitter::balanced(0, 1));
    assert_term_maps_close(&as_term_map(&out), &oracle, 1e-14);
    assert!((out.amplitude(&Occupation::from([1, 0])).re - FRAC_1_SQRT_2).abs() < 1e-15);
}

#[test]
fn routing_oracle_confirms_symmetric_routing() {
    let state = two_mode_state(&[([1, 0], re(FRAC_1_SQRT_2)), ([0, 1], re(FRAC_1_SQRT_2))]);
    let out = apply_beam_splitter(&state, &BeamSplitterSpec::balanced("x", "y")).unwrap();
    let oracle = route_once(&as_term_map(&state), &RoutedSplitter::balanced(0, 1));
    assert_term_maps_close(&as_term_map(&out), &oracle, 1e-14);
    // All weight on port 1.
    assert!((out.amplitude(&Occupation::from([1, 0])).norm() - 1.0).abs() < 1e-12);
    assert!(out.amplitude(&Occupation::from([0, 1])).norm() < 1e-12);
}

#[test]
fn both_oracles_confirm_two_photon_bunching() {
    let state = two_mode_state(&[([1, 1], re(1.0))]);
    let out = apply_beam_splitter(&state, &BeamSplitterSpec::balanced("x", "y")).unwrap();

    let routing = route_once(&as_term_map(&state), &RoutedSplitter::balanced(0, 1));
    assert_term_maps_close(&as_term_map(&out), &routing, 1e-14);

    // Generator-exponential route on the two-photon block (|2,0⟩,|1,1⟩,|0,2⟩).
    let block = balanced_block_apply(&[re(0.0), re(1.0), re(0.0)]);
    assert!((block[2].re - FRAC_1_SQRT_2).abs() < 1e-12, "|2,0⟩ weight");
    assert!(block[1].norm() < 1e-12, "no coincidence");
    assert!((block[0].re + FRAC_1_SQRT_2).abs() < 1e-12, "|0,2⟩ weight");

    assert!((out.amplitude(&Occupation::from([2, 0])).re - FRAC_1_SQRT_2).abs() < 1e-12);
    assert!((out.amplitude(&Occupation::from([0, 2])).re + FRAC_1_SQRT_2).abs() < 1e-12);
    assert!(out.amplitude(&Occupation::from([1, 1])).norm() < 1e-12);
}

#[test]
fn exponential_oracle_matches_implementation_on_random_blocks() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for photons in 1..=4usize {
        for _ in 0..10 {
            let mut terms = Vec::new();
            let mut coeffs = vec![Complex64::new(0.0, 0.0); photons + 1];
            for (k, coeff) in coeffs.iter_mut().enumerate() {
                let (a, _) = random_amplitude_pair(&mut rng);
                *coeff = a;
                terms.push(([k as u32, (photons - k) as u32], a));
            }
            let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            for coeff in &mut coeffs {
                *coeff /= norm;
            }

            let state = two_mode_state(&terms);
            let out = apply_beam_splitter(&state, &BeamSplitterSpec::balanced("x", "y")).unwrap();
            let block = balanced_block_apply(&coeffs);
            for (k, expected) in block.iter().enumerate() {
                let occ = Occupation::from([k as u32, (photons - k) as u32]);
                assert!(
                    (out.amplitude(&occ) - expected).norm() < 1e-12,
                    "photons={photons} k={k}"
                );
            }
        }
    }
}

#[test]
fn routing_oracle_matches_implementation_for_general_splitters() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..20 {
        let (t, r) = random_amplitude_pair(&mut rng);
        let spec = BeamSplitterSpec::new("x", "y", t, r).unwrap();
        let state = {
            let (a, b) = random_amplitude_pair(&mut rng);
            two_mode_state(&[([2, 0], a), ([1, 1], b), ([0, 2], re(0.25))])
        };
        let out = apply_beam_splitter(&state, &spec).unwrap();
        let oracle = route_once(&as_term_map(&state), &RoutedSplitter::general(0, 1, t, r));
        assert_term_maps_close(&as_term_map(&out), &oracle, 1e-12);
        assert!((out.norm() - 1.0).abs() < 1e-12);
        assert_eq!(out.total_photons(), Some(2));
    }
}

#[test]
fn cascaded_splitters_match_routing_oracle() {
    // Four modes, two splitters, as in one arm of the protocol.
    let reg = ModeRegistry::shared(["p", "q", "r", "s"]).unwrap();
    let state = QuantumState::from_terms_normalized(
        Arc::clone(&reg),
        [
            (Occupation::from([1, 0, 1, 0]), re(0.6)),
            (Occupation::from([0, 1, 0, 1]), Complex64::new(0.0, 0.8)),
        ],
    )
    .unwrap();
    let out = apply_beam_splitter(&state, &BeamSplitterSpec::balanced("p", "q")).unwrap();
    let out = apply_beam_splitter(&out, &BeamSplitterSpec::balanced("r", "s")).unwrap();

    let oracle = route(
        &as_term_map(&state),
        &[
            RoutedSplitter::balanced(0, 1),
            RoutedSplitter::balanced(2, 3),
        ],
    );
    assert_term_maps_close(&as_term_map(&out), &oracle, 1e-13);
}

#[test]
fn splitter_preparation_agrees_with_direct_construction_on_a_grid() {
    let reg = ModeRegistry::shared(["a1", "a2"]).unwrap();
    for k in 0..10 {
        let angle = (k as f64 + 0.5) * std::f64::consts::FRAC_PI_2 / 10.0;
        let (r, t) = (angle.cos(), angle.sin());
        let prepared =
            telsim_core::input_state_via_beam_splitter(&reg, ("a1", "a2"), r, t).unwrap();
        let spec = telsim_core::InputSpec::new(re(r), re(t), 1).unwrap();
        let direct = telsim_core::input_entangled_state(&reg, &spec, &["a1", "a2"]).unwrap();
        assert!(
            prepared.fidelity(&direct).unwrap() >= 1.0 - 1e-12,
            "grid point {k}"
        );
    }
}
