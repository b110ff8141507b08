//! Structure of the assembled channel ⊗ input state in the Bell product
//! basis. The expected coefficients below were derived by hand from the
//! per-pair basis change (|1,0⟩ = (Ψ⁺+Ψ⁻)/√2 and so on) and are frozen here:
//! every two-pair expansion of the one-particle run has eight entries of
//! magnitude 1/(2√2), Ψ-type entries carry (β, ±α) residuals and Φ-type
//! entries carry (α, ±β) residuals, and for more particles the all-Ψ entries
//! split by Ψ⁻ parity into (β, +α) and (β, −α) families.

mod common;

use common::{random_amplitude_pair, random_balanced_pair};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_1_SQRT_2;
use telsim_core::{
    assemble, bell_decompose, protocol::bell_pairs, psi_minus_parity, BellLabel, InputSpec,
    ModeRegistry, Occupation, Parity, ProtocolConfig, QuantumState,
};

/// 1/(2√2), the coefficient magnitude carried by every bracket of the
/// two-pair expansion.
const BRACKET: f64 = 0.5 * FRAC_1_SQRT_2;

fn config(alpha: Complex64, beta: Complex64, particles: u32) -> ProtocolConfig {
    ProtocolConfig::exact(InputSpec::new(alpha, beta, particles).unwrap())
}

fn pair_refs(pairs: &[(String, String)]) -> Vec<(&str, &str)> {
    pairs
        .iter()
        .map(|(a, b)| (a.as_str(), b.as_str()))
        .collect()
}

#[test]
fn one_particle_expansion_has_the_eight_bracket_structure() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..20 {
        let (alpha, beta) = random_amplitude_pair(&mut rng);
        let state = assemble(&config(alpha, beta, 1)).unwrap();
        let pairs = bell_pairs(1);
        let decomposition = bell_decompose(&state, &pair_refs(&pairs)).unwrap();

        assert_eq!(decomposition.entry_count(), 8, "trial {trial}");
        assert!(decomposition.overflow_is_empty());

        use BellLabel::*;
        // Expected residual amplitudes on (first, second) receiver rails,
        // each scaled by 1/(2√2).
        let golden: [([BellLabel; 2], Complex64, Complex64); 8] = [
            ([PsiPlus, PsiPlus], beta, alpha),
            ([PsiMinus, PsiMinus], -beta, -alpha),
            ([PsiMinus, PsiPlus], beta, -alpha),
            ([PsiPlus, PsiMinus], -beta, alpha),
            ([PhiPlus, PhiPlus], alpha, beta),
            ([PhiMinus, PhiMinus], -alpha, -beta),
            ([PhiMinus, PhiPlus], alpha, -beta),
            ([PhiPlus, PhiMinus], -alpha, beta),
        ];
        for (labels, first, second) in golden {
            let entry = decomposition
                .entry(&labels)
                .unwrap_or_else(|| panic!("missing entry {labels:?}"));
            assert!(
                (entry.norm() - BRACKET).abs() < 1e-12,
                "coefficient magnitude of {labels:?}"
            );
            let got_first = entry.amplitude(&Occupation::from([1, 0]));
            let got_second = entry.amplitude(&Occupation::from([0, 1]));
            assert!(
                (got_first - first * BRACKET).norm() < 1e-12,
                "{labels:?} first-rail amplitude"
            );
            assert!(
                (got_second - second * BRACKET).norm() < 1e-12,
                "{labels:?} second-rail amplitude"
            );
        }
    }
}

#[test]
fn expansion_reconstructs_the_input_termwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(5150);
    for particles in 1..=3u32 {
        let (alpha, beta) = random_amplitude_pair(&mut rng);
        let state = assemble(&config(alpha, beta, particles)).unwrap();
        let pairs = bell_pairs(particles);
        let decomposition = bell_decompose(&state, &pair_refs(&pairs)).unwrap();
        let rebuilt = decomposition.reconstruct().unwrap();

        for (occ, amp) in state.terms() {
            assert!(
                (rebuilt.amplitude(occ) - amp).norm() < 1e-12,
                "n={particles} term {occ}"
            );
        }
        for (occ, amp) in rebuilt.terms() {
            assert!(
                (state.amplitude(occ) - amp).norm() < 1e-12,
                "n={particles} spurious term {occ}"
            );
        }
        assert!((decomposition.total_norm_sqr() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn all_psi_entries_split_by_parity_for_two_and_three_particles() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for particles in 2..=3u32 {
        let (alpha, beta) = random_balanced_pair(&mut rng);
        let state = assemble(&config(alpha, beta, particles)).unwrap();
        let pairs = bell_pairs(particles);
        let decomposition = bell_decompose(&state, &pair_refs(&pairs)).unwrap();

        // Receiver-rail reference states β|1,0,…⟩ ± α|0,1,…⟩.
        let bob_registry =
            ModeRegistry::shared(telsim_core::protocol::bob_rails(particles)).unwrap();
        let width = bob_registry.len();
        let branch = |rail: usize| {
            let mut counts = vec![0u32; width];
            for pair in 0..width / 2 {
                counts[2 * pair + rail] = 1;
            }
            Occupation::new(counts)
        };
        let reference = |sign: f64| {
            QuantumState::from_terms(
                std::sync::Arc::clone(&bob_registry),
                [(branch(0), beta), (branch(1), alpha * sign)],
            )
            .unwrap()
        };
        let even_reference = reference(1.0);
        let odd_reference = reference(-1.0);

        let mut psi_entries = 0usize;
        let expected_norm_sqr = 0.5f64.powi(particles as i32 + 2);
        for (labels, residual) in decomposition.entries() {
            if labels.iter().any(|l| l.is_phi()) {
                continue;
            }
            psi_entries += 1;
            assert!(
                (residual.norm_sqr() - expected_norm_sqr).abs() < 1e-12,
                "n={particles} entry weight"
            );
            let normalized = residual.normalized().unwrap();
            let target = match psi_minus_parity(labels) {
                Parity::Even => &even_reference,
                Parity::Odd => &odd_reference,
                Parity::Inapplicable => unreachable!("all-Ψ entry"),
            };
            assert!(
                (normalized.fidelity(target).unwrap() - 1.0).abs() < 1e-9,
                "n={particles} labels {labels:?}"
            );
        }
        assert_eq!(psi_entries, 1 << (particles + 1), "n={particles}");

        // The all-Ψ family carries exactly half of the state.
        let psi_weight: f64 = decomposition
            .entries()
            .filter(|(labels, _)| labels.iter().all(|l| l.is_psi()))
            .map(|(_, residual)| residual.norm_sqr())
            .sum();
        assert!((psi_weight - 0.5).abs() < 1e-12);
    }
}

#[test]
fn rails_beyond_the_first_particle_never_reach_phi_entries() {
    // Pairs 2.. interfere one particle's own two rails, which hold exactly
    // one photon, so their label is always Ψ-type.
    let state = assemble(&config(
        Complex64::new(0.6, 0.0),
        Complex64::new(0.0, 0.8),
        3,
    ))
    .unwrap();
    let pairs = bell_pairs(3);
    let decomposition = bell_decompose(&state, &pair_refs(&pairs)).unwrap();
    for (labels, _) in decomposition.entries() {
        for label in &labels[2..] {
            assert!(label.is_psi(), "labels {labels:?}");
        }
    }
}
