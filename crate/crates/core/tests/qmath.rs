mod common;

use std::f64::consts::LN_2;

use common::*;
use nlsim_core::channels::werner_state;
use nlsim_core::qmath::*;
use proptest::prelude::*;

#[test]
fn tensor_then_trace_recovers_left_factor() {
    let mut r = rng(10);
    let part = Bipartition::new(4, 4).unwrap();
    for _ in 0..100 {
        let a = random_density(4, &mut r);
        let b = random_density(4, &mut r);
        let prod = tensor_product(&a, &b).unwrap();
        let back = partial_trace(&prod, part, Side::Right).unwrap();
        assert!(back.matrix().max_abs_diff(a.matrix()) <= 1e-12);
        let back_b = partial_trace(&prod, part, Side::Left).unwrap();
        assert!(back_b.matrix().max_abs_diff(b.matrix()) <= 1e-12);
    }
}

#[test]
fn state_valued_outputs_stay_valid() {
    let mut r = rng(11);
    for i in 0..1000 {
        let a = random_density_rank(2, 1 + i % 2, &mut r);
        let b = random_density(2 + i % 3, &mut r);
        let prod = tensor_product(&a, &b).unwrap();
        assert_valid_state(&prod);
        let part = Bipartition::new(a.dim(), b.dim()).unwrap();
        assert_valid_state(&partial_trace(&prod, part, Side::Left).unwrap());
        let joint = random_density_rank(8, 1 + i % 8, &mut r);
        let split = Bipartition::new(2, 4).unwrap();
        let reduced = partial_trace(&joint, split, if i % 2 == 0 { Side::Left } else { Side::Right }).unwrap();
        assert_valid_state(&reduced);
        assert_valid_state(&permute_qubits(&joint, &[2, 0, 1]).unwrap());
    }
}

#[test]
fn partial_trace_preserves_unit_trace() {
    let mut r = rng(12);
    for _ in 0..200 {
        let rho = random_density(12, &mut r);
        for part in [Bipartition::new(3, 4).unwrap(), Bipartition::new(6, 2).unwrap()] {
            for side in [Side::Left, Side::Right] {
                let t = partial_trace(&rho, part, side).unwrap().matrix().trace();
                assert!((t.re - 1.0).abs() <= 1e-12 && t.im.abs() <= 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensor_product_is_associative(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b, c) = (random_density(2, &mut r), random_density(3, &mut r), random_density(2, &mut r));
        let left = tensor_product(&tensor_product(&a, &b).unwrap(), &c).unwrap();
        let right = tensor_product(&a, &tensor_product(&b, &c).unwrap()).unwrap();
        prop_assert!(left.matrix().max_abs_diff(right.matrix()) <= 1e-12);
    }

    #[test]
    fn entropy_is_unitarily_invariant(seed in any::<u64>(), d in 2usize..6) {
        let mut r = rng(seed);
        let rho = random_density(d, &mut r);
        let u = random_unitary(d, &mut r);
        let s = von_neumann_entropy(&rho);
        let s2 = von_neumann_entropy(&rho.evolve(&u).unwrap());
        prop_assert!((s - s2).abs() <= 1e-10);
        prop_assert!(s >= 0.0 && s <= (d as f64).ln() + 1e-15);
    }
}

#[test]
fn schmidt_symmetry_on_three_qubits() {
    let mut r = rng(13);
    for _ in 0..200 {
        let psi = random_pure(8, &mut r).to_density();
        for part in [Bipartition::new(2, 4).unwrap(), Bipartition::new(4, 2).unwrap()] {
            let left = entanglement_entropy_via(&psi, part, Side::Right).unwrap();
            let right = entanglement_entropy_via(&psi, part, Side::Left).unwrap();
            assert!((left - right).abs() <= 1e-10);
        }
        // Non-contiguous split {0, 2} | {1} through the permutation.
        let p = permute_qubits(&psi, &[0, 2, 1]).unwrap();
        let a = entanglement_entropy(&p, Bipartition::new(4, 2).unwrap()).unwrap();
        let b = entanglement_entropy_via(&p, Bipartition::new(4, 2).unwrap(), Side::Left).unwrap();
        assert!((a - b).abs() <= 1e-10);
    }
}

#[test]
fn reduced_bell_entropy_against_closed_form() {
    let bell = PureState::phi_plus().to_density();
    let red = partial_trace(&bell, Bipartition::new(2, 2).unwrap(), Side::Right).unwrap();
    let [l0, l1] = eig2(red.matrix());
    assert!((l0 - 0.5).abs() < 1e-15 && (l1 - 0.5).abs() < 1e-15);
    let oracle = -(l0 * l0.ln() + l1 * l1.ln());
    assert!((von_neumann_entropy(&red) - oracle).abs() <= 1e-12);
    assert!((von_neumann_entropy(&red) - LN_2).abs() <= 1e-12);
}

#[test]
fn ghz_single_qubit_cuts_against_closed_form() {
    let ghz = PureState::ghz(3).to_density();
    for q in 0..3u32 {
        let mut order = vec![q];
        order.extend((0..3).filter(|&k| k != q));
        let p = permute_qubits(&ghz, &order).unwrap();
        let red = partial_trace(&p, Bipartition::new(2, 4).unwrap(), Side::Right).unwrap();
        let [l0, l1] = eig2(red.matrix());
        assert!((l0 - 0.5).abs() < 1e-14 && (l1 - 0.5).abs() < 1e-14);
    }
    assert!((max_entanglement_entropy(&ghz).unwrap() - LN_2).abs() <= 1e-12);
}

#[test]
fn max_entropy_brute_force_over_splits() {
    // Max over the 2^(n-1) - 1 = 7 splits of a random 4-qubit state, recomputed
    // here by explicit bit masks.
    let mut r = rng(14);
    for _ in 0..20 {
        let psi = random_pure(16, &mut r).to_density();
        let mut best = 0.0f64;
        for mask in 1u32..15 {
            if mask & 0b1000 == 0 {
                continue;
            }
            let left: Vec<u32> = (0..4).filter(|q| mask >> (3 - q) & 1 == 1).collect();
            let mut order = left.clone();
            order.extend((0..4).filter(|q| !left.contains(q)));
            let p = permute_qubits(&psi, &order).unwrap();
            let part = Bipartition::qubits(left.len() as u32, 4).unwrap();
            best = best.max(entanglement_entropy(&p, part).unwrap());
        }
        assert!((max_entanglement_entropy(&psi).unwrap() - best).abs() <= 1e-12);
    }
}

#[test]
fn werner_ppt_threshold() {
    // Partial transpose of W(p) has eigenvalues (1+p)/4 (x3) and (1-3p)/4.
    for p in [0.2, 1.0 / 3.0 - 0.01, 1.0 / 3.0 + 0.01, 0.5] {
        let w = werner_state(p).unwrap();
        let min = partial_transpose(&w, Bipartition::new(2, 2).unwrap()).unwrap().eigvalsh()[0];
        assert!((min - (1.0 - 3.0 * p) / 4.0).abs() < 1e-14);
        assert_eq!(is_entangled_2q(&w).unwrap(), p > 1.0 / 3.0, "p = {p}");
    }
}

#[test]
fn product_states_have_no_entanglement() {
    let mut r = rng(15);
    for _ in 0..50 {
        let psi = random_pure(2, &mut r).tensor(&random_pure(4, &mut r)).to_density();
        assert!(entanglement_entropy(&psi, Bipartition::new(2, 4).unwrap()).unwrap() < 1e-10);
        assert!(max_entanglement_entropy(&random_pure(2, &mut r).tensor(&random_pure(2, &mut r)).to_density()).unwrap() < 1e-10);
    }
}

#[test]
fn maximally_mixed_dump_golden() {
    let expected = "# complex-matrix 2 2\n\
5.0000000000000000e-1+0.0000000000000000e0i 0.0000000000000000e0+0.0000000000000000e0i\n\
0.0000000000000000e0+0.0000000000000000e0i 5.0000000000000000e-1+0.0000000000000000e0i\n";
    assert_eq!(dump_matrix(DensityMatrix::maximally_mixed(2).matrix()), expected);
}
