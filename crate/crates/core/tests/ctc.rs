mod common;

use common::*;
use nlsim_core::ctc::{
    circuit_output, induced_map, parse_circuit_file, solve_fixed_point, solve_fixed_point_with, CtcCircuit,
    FixedPointMethod, SolverOptions,
};
use nlsim_core::qmath::{gates, ComplexMatrix, DensityMatrix};
use nlsim_core::Error;

fn random_circuit(seed: u64) -> (CtcCircuit, DensityMatrix) {
    let mut r = rng(seed);
    let dim_ch = 1 + (seed as usize % 4);
    let dim_tv = 2 + (seed as usize / 4 % 3);
    let u = random_unitary(dim_ch * dim_tv, &mut r);
    (CtcCircuit::new(dim_ch, dim_tv, u).unwrap(), random_density(dim_ch, &mut r))
}

/// `Tr_ch[U (ρ_in ⊗ ρ) U†]` evaluated densely.
fn dense_map(c: &CtcCircuit, rho_in: &DensityMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    let joint = rho_in.matrix().kron(rho);
    let evolved = c.unitary().conjugate(&joint);
    trace_out_left(&evolved, c.dim_ch(), c.dim_tv())
}

#[test]
fn identity_circuit_induces_identity() {
    let c = CtcCircuit::new(2, 2, ComplexMatrix::identity(4)).unwrap();
    let mut r = rng(1);
    let map = induced_map(&c, &random_density(2, &mut r)).unwrap();
    let rho = random_density(2, &mut r);
    assert!(map.apply(&rho).unwrap().matrix().max_abs_diff(rho.matrix()) < 1e-14);
}

#[test]
fn no_chronology_factor_is_plain_conjugation() {
    let map = induced_map(&CtcCircuit::grandfather(), &DensityMatrix::basis(1, 0)).unwrap();
    let rho = random_density(2, &mut rng(2));
    let x = gates::pauli_x();
    let expected = x.conjugate(rho.matrix());
    assert!(map.apply(&rho).unwrap().matrix().max_abs_diff(&expected) < 1e-15);
}

#[test]
fn kraus_map_matches_dense_evaluation() {
    for seed in 0..100 {
        let (c, rho_in) = random_circuit(seed);
        let map = induced_map(&c, &rho_in).unwrap();
        let rho = random_density(c.dim_tv(), &mut rng(1000 + seed));
        let via_kraus = map.apply_matrix(rho.matrix());
        let dense = dense_map(&c, &rho_in, rho.matrix());
        assert!(via_kraus.max_abs_diff(&dense) <= 1e-12, "seed {seed}");
    }
}

#[test]
fn induced_maps_are_cptp() {
    for seed in 0..100 {
        let (c, rho_in) = random_circuit(seed);
        let map = induced_map(&c, &rho_in).unwrap();
        assert!(map.trace_preservation_defect() <= 1e-10);
        assert!(map.choi_matrix().eigvalsh()[0] >= -1e-10, "seed {seed}");
    }
}

#[test]
fn grandfather_paradox_resolves_to_maximally_mixed() {
    let c = CtcCircuit::grandfather();
    let fp = solve_fixed_point(&c, &DensityMatrix::basis(1, 0)).unwrap();
    assert!(fp.rho.matrix().max_abs_diff(DensityMatrix::maximally_mixed(2).matrix()) < 1e-15);
    assert!(fp.residual <= 1e-12);
    // X-conjugation fixes span{I, X}: the eigenvalue-1 space is two-dimensional.
    assert_eq!(fp.fixed_subspace_dim, 2);
    assert_eq!(fp.method, FixedPointMethod::CesaroIteration);
}

#[test]
fn identity_and_phase_circuits() {
    let id = CtcCircuit::new(1, 2, ComplexMatrix::identity(2)).unwrap();
    let fp = solve_fixed_point(&id, &DensityMatrix::basis(1, 0)).unwrap();
    assert_eq!(fp.rho, DensityMatrix::maximally_mixed(2));
    assert_eq!(fp.fixed_subspace_dim, 4);

    let z = CtcCircuit::new(1, 2, gates::pauli_z()).unwrap();
    let fp = solve_fixed_point(&z, &DensityMatrix::basis(1, 0)).unwrap();
    assert!(fp.rho.matrix().max_abs_diff(DensityMatrix::maximally_mixed(2).matrix()) < 1e-15);
    assert_eq!(fp.residual, 0.0);
    assert_eq!(fp.fixed_subspace_dim, 2);
}

#[test]
fn controlled_not_examples() {
    let c = CtcCircuit::controlled_not();
    let one = DensityMatrix::basis(2, 1);
    // Control |1⟩: Tr_ch[CNOT(|1⟩⟨1| ⊗ ρ)CNOT] = XρX.
    let map = induced_map(&c, &one).unwrap();
    let rho = random_density(2, &mut rng(5));
    assert!(map.apply_matrix(rho.matrix()).max_abs_diff(&gates::pauli_x().conjugate(rho.matrix())) < 1e-15);
    let fp = solve_fixed_point(&c, &one).unwrap();
    assert!(fp.rho.matrix().max_abs_diff(DensityMatrix::maximally_mixed(2).matrix()) < 1e-15);
    let out = circuit_output(&c, &one, &fp).unwrap();
    assert!(out.matrix().max_abs_diff(one.matrix()) < 1e-15);

    let zero = DensityMatrix::basis(2, 0);
    let fp = solve_fixed_point(&c, &zero).unwrap();
    assert!(fp.rho.matrix().max_abs_diff(DensityMatrix::maximally_mixed(2).matrix()) < 1e-15);
    assert_eq!(fp.fixed_subspace_dim, 4);
    assert!(circuit_output(&c, &zero, &fp).unwrap().matrix().max_abs_diff(zero.matrix()) < 1e-15);
}

#[test]
fn swap_forces_fixed_point_equal_to_input() {
    for seed in 0..10 {
        let rho_in = random_density(2, &mut rng(seed));
        let c = CtcCircuit::swap();
        let fp = solve_fixed_point(&c, &rho_in).unwrap();
        assert!(fp.rho.trace_distance(&rho_in) <= 1e-10);
        assert_eq!(fp.fixed_subspace_dim, 1);
        let out = circuit_output(&c, &rho_in, &fp).unwrap();
        assert!(out.trace_distance(&rho_in) <= 1e-10);
    }
}

#[test]
fn random_circuits_converge_and_methods_agree() {
    let opts = SolverOptions::default();
    let mut unique = 0;
    for seed in 0..100 {
        let (c, rho_in) = random_circuit(seed);
        let fp = solve_fixed_point(&c, &rho_in).unwrap();
        assert!(fp.residual <= 1e-10, "seed {seed}: residual {}", fp.residual);
        let out = circuit_output(&c, &rho_in, &fp).unwrap();
        assert_valid_state(&out);
        if fp.fixed_subspace_dim == 1 {
            unique += 1;
            let ces = solve_fixed_point_with(&c, &rho_in, FixedPointMethod::CesaroIteration, &opts).unwrap();
            let eig = solve_fixed_point_with(&c, &rho_in, FixedPointMethod::EigenProjection, &opts).unwrap();
            let td = ces.rho.trace_distance(&eig.rho);
            assert!(td <= 1e-8, "seed {seed}: trace distance {td}");
        }
    }
    assert!(unique > 50, "only {unique} unique-fixed-point circuits");
}

#[test]
fn basis_change_on_ctc_factor_rotates_fixed_point() {
    for seed in 0..20 {
        let (c, rho_in) = random_circuit(seed);
        let fp = solve_fixed_point(&c, &rho_in).unwrap();
        if fp.fixed_subspace_dim != 1 {
            continue;
        }
        let v = random_unitary(c.dim_tv(), &mut rng(500 + seed));
        let rotated = c.conjugate_tv(&v).unwrap();
        let fp2 = solve_fixed_point(&rotated, &rho_in).unwrap();
        let expected = v.adjoint().conjugate(fp.rho.matrix());
        let expected = DensityMatrix::from_hermitian_part(expected).unwrap();
        assert!(fp2.rho.trace_distance(&expected) <= 1e-8, "seed {seed}");
    }
}

#[test]
fn error_paths() {
    let c = CtcCircuit::controlled_not();
    assert!(matches!(
        induced_map(&c, &DensityMatrix::maximally_mixed(3)),
        Err(Error::DimensionMismatch(_))
    ));
    assert!(matches!(
        CtcCircuit::new(2, 2, ComplexMatrix::identity(4).scale_real(1.1)),
        Err(Error::NonUnitary { .. })
    ));
    assert!(CtcCircuit::new(2, 1, ComplexMatrix::identity(2)).is_err());
    assert!(matches!(
        CtcCircuit::new(16, 32, ComplexMatrix::identity(512)),
        Err(Error::SizeLimit { .. })
    ));
    let (c, rho_in) = random_circuit(7);
    let starved = SolverOptions {
        max_iterations: 1,
        residual_target: 1e-15,
        ..SolverOptions::default()
    };
    match solve_fixed_point_with(&c, &rho_in, FixedPointMethod::CesaroIteration, &starved) {
        Err(Error::Convergence { best_residual }) => assert!(best_residual > 1e-15),
        other => panic!("expected convergence failure, got {other:?}"),
    }
}

#[test]
fn grandfather_file_solves() {
    let text = include_str!("../../../examples-data/grandfather.txt");
    let f = parse_circuit_file(text).unwrap();
    let fp = solve_fixed_point(&f.circuit, &f.rho_in).unwrap();
    assert!(fp.residual <= 1e-10);
}
