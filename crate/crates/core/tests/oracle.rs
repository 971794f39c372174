mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tdepth_core::circuit::{Gate, LayeredCircuit};
use tdepth_core::compiler::{apply_circuit, compile_measure, to_unitary};
use tdepth_core::frame::tableau_from_stage;
use tdepth_core::sim::{execute, StateVector};

use common::*;

fn state(amps: Vec<num_complex::Complex64>) -> StateVector {
    StateVector::from_amplitudes(amps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn direct_simulation_matches_dense_unitary(seed in any::<u64>(), n in 1usize..=4, k in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_circuit(n, k, &mut rng);
        let psi = random_amplitudes(n, &mut rng);
        let got = apply_circuit(&c, &state(psi.clone())).unwrap();
        let want = circuit_unitary(&c).apply(&psi);
        prop_assert!(fidelity(got.amplitudes(), &want) > 1.0 - 1e-12);
    }

    #[test]
    fn stage_tableau_matches_matrix_conjugation(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_circuit(n, 1, &mut rng);
        let gates = &c.stages[0].clifford;
        let t = tableau_from_stage(gates, n).unwrap();
        let u = sequence_unitary(gates, n);
        for m in all_masks(n) {
            prop_assert_eq!(m.apply_tableau(&t).unwrap(), conjugated_mask(&u, &m).unwrap());
        }
    }

    #[test]
    fn sampled_runs_match_dense_unitary(seed in any::<u64>(), n in 1usize..=3, k in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_circuit(n, k, &mut rng);
        let psi = random_amplitudes(n, &mut rng);
        let want = circuit_unitary(&c).apply(&psi);
        let program = compile_measure(&c).unwrap().program;
        for p in [&program, &to_unitary(&program).unwrap()] {
            let b = execute(p, &state(psi.clone()), &mut rng).unwrap();
            prop_assert!(fidelity(b.state.amplitudes(), &want) > 1.0 - 1e-10);
        }
    }
}

#[test]
fn oracle_gates_are_unitary() {
    for g in [Gate::H(0), Gate::P(0), Gate::Pdg(0), Gate::X(0), Gate::Z(0), Gate::T(0), Gate::Cnot(0, 1)] {
        let u = gate_unitary(&g, 2);
        assert!(u.mul(&u.adjoint()).equal_up_to_phase(&Dense::identity(4), EPS), "{g}");
    }
}

#[test]
fn classical_generator_keeps_basis_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let c: LayeredCircuit = random_classical_circuit(3, 3, &mut rng);
        let u = circuit_unitary(&c);
        for col in 0..8 {
            let nonzero = (0..8).filter(|&r| u.at(r, col).norm() > 1e-9).count();
            assert_eq!(nonzero, 1, "{}", c.serialize());
        }
    }
}
