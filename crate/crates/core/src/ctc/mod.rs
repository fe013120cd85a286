//! Deutsch closed-timelike-curve model.
//!
//! A circuit `U` acts on chronology-respecting qubits (`ch`) and qubits
//! travelling the curve (`tv`). A consistent CTC state is a fixed point of
//! the induced channel `Φ(ρ) = Tr_ch[U (ρ_in ⊗ ρ) U†]`, and the circuit's
//! output is `Tr_tv[U (ρ_in ⊗ ρ) U†]`.
//!
//! When the fixed point is not unique the solver returns the one reached
//! from the maximally mixed seed and reports the multiplicity of eigenvalue 1
//! so callers can tell.

mod circuit;
mod format;
mod solver;

pub use circuit::{induced_map, CtcCircuit, MAX_TOTAL_DIM, MAX_TV_DIM, UNITARITY_TOL};
pub use format::{parse_circuit_file, write_circuit_file, CircuitFile};
pub use solver::{
    circuit_output, fixed_point_residual, solve_fixed_point, solve_fixed_point_opts, solve_fixed_point_with,
    FixedPointMethod, FixedPointResult, SolverOptions,
};
