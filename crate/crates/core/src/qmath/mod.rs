//! Dense complex linear algebra and finite-dimensional quantum states.
//!
//! Conventions: tensor products put the left operand on the slow index, and
//! qubit 0 is the most significant bit of a basis index. Entropies are in
//! nats.

mod dump;
mod entropy;
mod matrix;
mod state;

pub use dump::{dump_matrix, dump_rows, format_entry, parse_complex, parse_matrix, parse_rows};
pub use entropy::{
    entanglement_entropy, entanglement_entropy_via, max_entanglement_entropy,
    max_entanglement_split, von_neumann_entropy, SplitEntropy, PURITY_TOL,
};
pub use matrix::{gates, ComplexMatrix, C64};
pub use state::{
    is_entangled_2q, partial_trace, partial_trace_matrix, partial_transpose, permute_qubits,
    tensor_product, tensor_product_within, Bipartition, DensityMatrix, PureState, RegisterLimits,
    Side, EIGEN_CLIP, HERMITIAN_TOL, NORM_TOL, TRACE_TOL,
};
