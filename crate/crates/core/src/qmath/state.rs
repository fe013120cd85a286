use std::f64::consts::FRAC_1_SQRT_2;

use super::matrix::{ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Hermiticity tolerance for density matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-12;
/// Eigenvalues in `[-EIGEN_CLIP, 0)` are read as zero; anything lower is invalid.
pub const EIGEN_CLIP: f64 = 1e-10;
/// Normalisation tolerance for pure states.
pub const NORM_TOL: f64 = 1e-12;

/// Upper bound on register sizes accepted by composition operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegisterLimits {
    pub max_qubits: u32,
}

impl RegisterLimits {
    pub const DEFAULT_MAX_QUBITS: u32 = 12;

    pub fn max_dim(&self) -> usize {
        1usize << self.max_qubits
    }

    pub fn check(&self, dim: usize) -> Result<()> {
        if dim > self.max_dim() {
            Err(Error::SizeLimit {
                dim,
                max: self.max_dim(),
            })
        } else {
            Ok(())
        }
    }
}

impl Default for RegisterLimits {
    fn default() -> Self {
        Self {
            max_qubits: Self::DEFAULT_MAX_QUBITS,
        }
    }
}

/// A normalised state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidState("empty state vector".into()));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "state vector norm {norm} is not 1"
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales an arbitrary nonzero vector to unit norm.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalise a zero vector".into()));
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Self::new(amplitudes)
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index out of range");
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Self { amplitudes }
    }

    /// (|00⟩ + |11⟩)/√2.
    pub fn phi_plus() -> Self {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        Self {
            amplitudes: vec![h, ZERO, ZERO, h],
        }
    }

    /// (|0…0⟩ + |1…1⟩)/√2 on `n` qubits.
    pub fn ghz(n: u32) -> Self {
        assert!(n >= 1, "GHZ state needs at least one qubit");
        let dim = 1usize << n;
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[0] = h;
        amplitudes[dim - 1] = h;
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Self { amplitudes }
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: ComplexMatrix::outer(&self.amplitudes, &self.amplitudes),
        }
    }
}

/// Positive, unit-trace operator on a finite register.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates `matrix` against the density-matrix invariants.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidState(format!(
                "matrix is {}x{}, not square",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let defect = matrix.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "Hermitian defect {defect:e} exceeds {HERMITIAN_TOL:e}"
            )));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "trace {} + {}i is not 1",
                tr.re, tr.im
            )));
        }
        let min_eig = matrix.eigvalsh().first().copied().unwrap_or(0.0);
        if min_eig < -EIGEN_CLIP {
            return Err(Error::InvalidState(format!(
                "smallest eigenvalue {min_eig:e} is negative"
            )));
        }
        Ok(Self { matrix })
    }

    /// Symmetrises `matrix` before validating. Used for outputs whose only
    /// Hermitian defect is floating-point round-off.
    pub fn from_hermitian_part(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidState("matrix is not square".into()));
        }
        Self::new(matrix.hermitian_part())
    }

    /// Projects a Hermitian PSD matrix of positive trace onto a valid state by
    /// clipping negative eigenvalues and renormalising.
    pub fn renormalized(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidState("matrix is not square".into()));
        }
        let (vals, vecs) = matrix.eigh();
        if vals[0] < -EIGEN_CLIP * vals.last().copied().unwrap_or(1.0).abs().max(1.0) {
            return Err(Error::InvalidState(format!(
                "smallest eigenvalue {:e} is negative",
                vals[0]
            )));
        }
        let total: f64 = vals.iter().map(|v| v.max(0.0)).sum();
        if total <= 0.0 {
            return Err(Error::InvalidState("matrix has zero trace".into()));
        }
        let n = matrix.rows();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, v) in vals.iter().enumerate() {
            let w = v.max(0.0) / total;
            if w == 0.0 {
                continue;
            }
            let col = vecs.column(k);
            for r in 0..n {
                for c in 0..n {
                    let cur = out.get(r, c);
                    out.set(r, c, cur + col[r] * col[c].conj() * w);
                }
            }
        }
        Self::from_hermitian_part(out)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    /// |k⟩⟨k| in a `dim`-dimensional register.
    pub fn basis(dim: usize, index: usize) -> Self {
        PureState::basis(dim, index).to_density()
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Number of qubits, if the dimension is a power of two.
    pub fn n_qubits(&self) -> Option<u32> {
        let d = self.dim();
        d.is_power_of_two().then(|| d.trailing_zeros())
    }

    pub fn purity(&self) -> f64 {
        let m = &self.matrix;
        m.as_slice().iter().map(|x| x.norm_sqr()).sum()
    }

    /// Ascending eigenvalues with the zero-clip applied.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.matrix
            .eigvalsh()
            .into_iter()
            .map(|v| if v < 0.0 { 0.0 } else { v })
            .collect()
    }

    /// Real part of Tr(ρ·O).
    pub fn expectation(&self, observable: &ComplexMatrix) -> f64 {
        let n = self.dim();
        assert_eq!(observable.rows(), n, "observable dimension mismatch");
        let mut acc = ZERO;
        for r in 0..n {
            for c in 0..n {
                acc += self.matrix.get(r, c) * observable.get(c, r);
            }
        }
        acc.re
    }

    /// `U ρ U†`, re-validated.
    pub fn evolve(&self, unitary: &ComplexMatrix) -> Result<Self> {
        if unitary.rows() != self.dim() || !unitary.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "unitary is {}x{}, state has dimension {}",
                unitary.rows(),
                unitary.cols(),
                self.dim()
            )));
        }
        Self::from_hermitian_part(unitary.conjugate(&self.matrix))
    }

    /// Trace distance ½‖ρ − σ‖₁.
    pub fn trace_distance(&self, other: &Self) -> f64 {
        0.5 * (&self.matrix - &other.matrix).trace_norm_hermitian()
    }

    /// Mixture `Σ wᵢ ρᵢ`.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidState("empty mixture".into()))?;
        let dim = first.1.dim();
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for (w, rho) in parts {
            if rho.dim() != dim {
                return Err(Error::DimensionMismatch("mixture components differ in dimension".into()));
            }
            if *w < 0.0 {
                return Err(Error::InvalidState("negative mixture weight".into()));
            }
            acc = &acc + &rho.matrix.scale_real(*w);
        }
        Self::from_hermitian_part(acc)
    }
}

/// Split of a register into a left (slow) and right (fast) tensor factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bipartition {
    dim_left: usize,
    dim_right: usize,
}

impl Bipartition {
    pub fn new(dim_left: usize, dim_right: usize) -> Result<Self> {
        if dim_left == 0 || dim_right == 0 {
            return Err(Error::DimensionMismatch("bipartition factors must be nonzero".into()));
        }
        Ok(Self {
            dim_left,
            dim_right,
        })
    }

    /// Qubit split: the first `left_qubits` of an `n`-qubit register on the left.
    pub fn qubits(left_qubits: u32, n: u32) -> Result<Self> {
        if left_qubits > n {
            return Err(Error::DimensionMismatch(format!(
                "cannot put {left_qubits} of {n} qubits on the left"
            )));
        }
        Self::new(1 << left_qubits, 1 << (n - left_qubits))
    }

    pub fn dim_left(&self) -> usize {
        self.dim_left
    }

    pub fn dim_right(&self) -> usize {
        self.dim_right
    }

    pub fn dim(&self) -> usize {
        self.dim_left * self.dim_right
    }

    pub fn is_nontrivial(&self) -> bool {
        self.dim_left >= 2 && self.dim_right >= 2
    }

    fn check(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            Err(Error::DimensionMismatch(format!(
                "bipartition {}x{} does not match dimension {dim}",
                self.dim_left, self.dim_right
            )))
        } else {
            Ok(())
        }
    }
}

/// Which tensor factor an operation discards.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// `a ⊗ b` with `a` as the slow factor, bounded by the default register limit.
pub fn tensor_product(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    tensor_product_within(a, b, &RegisterLimits::default())
}

pub fn tensor_product_within(
    a: &DensityMatrix,
    b: &DensityMatrix,
    limits: &RegisterLimits,
) -> Result<DensityMatrix> {
    let dim = a
        .dim()
        .checked_mul(b.dim())
        .ok_or(Error::SizeLimit {
            dim: usize::MAX,
            max: limits.max_dim(),
        })?;
    limits.check(dim)?;
    DensityMatrix::from_hermitian_part(a.matrix.kron(&b.matrix))
}

/// Traces out `side` of `state`, keeping the other factor.
pub fn partial_trace(state: &DensityMatrix, part: Bipartition, side: Side) -> Result<DensityMatrix> {
    let reduced = partial_trace_matrix(&state.matrix, part, side)?;
    DensityMatrix::from_hermitian_part(reduced)
}

/// Partial trace of an arbitrary square operator.
pub fn partial_trace_matrix(m: &ComplexMatrix, part: Bipartition, side: Side) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("partial trace of non-square matrix".into()));
    }
    part.check(m.rows())?;
    let (l, r) = (part.dim_left, part.dim_right);
    let out = match side {
        Side::Right => ComplexMatrix::from_fn(l, l, |i, j| {
            (0..r).map(|k| m.get(i * r + k, j * r + k)).sum()
        }),
        Side::Left => ComplexMatrix::from_fn(r, r, |a, b| {
            (0..l).map(|k| m.get(k * r + a, k * r + b)).sum()
        }),
    };
    Ok(out)
}

/// Reorders qubits so that output qubit `i` is input qubit `order[i]`.
/// Qubit 0 is the most significant index bit.
pub fn permute_qubits(state: &DensityMatrix, order: &[u32]) -> Result<DensityMatrix> {
    let n = state
        .n_qubits()
        .ok_or(Error::UnsupportedDimension {
            dim: state.dim(),
            reason: "qubit permutation needs a power-of-two register",
        })?;
    let map = qubit_index_map(n, order)?;
    let d = state.dim();
    let m = &state.matrix;
    let out = ComplexMatrix::from_fn(d, d, |r, c| m.get(map[r], map[c]));
    DensityMatrix::new(out)
}

/// For each output index, the input index it reads from.
fn qubit_index_map(n: u32, order: &[u32]) -> Result<Vec<usize>> {
    if order.len() != n as usize {
        return Err(Error::DimensionMismatch(format!(
            "permutation of length {} for {n} qubits",
            order.len()
        )));
    }
    let mut seen = vec![false; n as usize];
    for &q in order {
        if q >= n || std::mem::replace(&mut seen[q as usize], true) {
            return Err(Error::DimensionMismatch(format!(
                "{order:?} is not a permutation of 0..{n}"
            )));
        }
    }
    let d = 1usize << n;
    Ok((0..d)
        .map(|out| {
            let mut src = 0usize;
            for (i, &q) in order.iter().enumerate() {
                let bit = (out >> (n as usize - 1 - i)) & 1;
                src |= bit << (n - 1 - q);
            }
            src
        })
        .collect())
}

/// Partial transpose on the right factor.
pub fn partial_transpose(state: &DensityMatrix, part: Bipartition) -> Result<ComplexMatrix> {
    part.check(state.dim())?;
    let r = part.dim_right;
    let d = state.dim();
    let m = &state.matrix;
    Ok(ComplexMatrix::from_fn(d, d, |row, col| {
        let (a, b) = (row / r, row % r);
        let (a2, b2) = (col / r, col % r);
        m.get(a * r + b2, a2 * r + b)
    }))
}

/// PPT test on a two-qubit state; exact for 2⊗2.
pub fn is_entangled_2q(state: &DensityMatrix) -> Result<bool> {
    if state.dim() != 4 {
        return Err(Error::UnsupportedDimension {
            dim: state.dim(),
            reason: "the PPT test is only exact for two qubits",
        });
    }
    let pt = partial_transpose(state, Bipartition::new(2, 2)?)?;
    Ok(pt.eigvalsh()[0] < -EIGEN_CLIP)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn maximally_mixed_product_is_maximally_mixed() {
        let half = DensityMatrix::maximally_mixed(2);
        let prod = tensor_product(&half, &half).unwrap();
        assert!(prod.matrix().max_abs_diff(&DensityMatrix::maximally_mixed(4).into_matrix()) < 1e-15);
    }

    #[test]
    fn basis_bookkeeping() {
        let prod = tensor_product(&DensityMatrix::basis(2, 0), &DensityMatrix::basis(2, 1)).unwrap();
        let expected = ComplexMatrix::diagonal(&[c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert_eq!(prod.matrix(), &expected);
    }

    #[test]
    fn bell_reduction_by_hand() {
        // |Φ+⟩⟨Φ+| has 1/2 at the four corners (00,00),(00,11),(11,00),(11,11).
        // Tracing the right qubit: ρ_A[0,0] = M[00,00] + M[01,01] = 1/2,
        // ρ_A[0,1] = M[00,10] + M[01,11] = 0, ρ_A[1,1] = M[10,10] + M[11,11] = 1/2.
        let bell = PureState::phi_plus().to_density();
        let red = partial_trace(&bell, Bipartition::new(2, 2).unwrap(), Side::Right).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[&[0.5, 0.0], &[0.0, 0.5]]);
        assert!(red.matrix().max_abs_diff(&expected) < 1e-15);
        let left = partial_trace(&bell, Bipartition::new(2, 2).unwrap(), Side::Left).unwrap();
        assert!(left.matrix().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn product_state_reduces_to_factor() {
        let a = PureState::normalized(vec![c(1.0), C64::new(0.3, 0.4)]).unwrap().to_density();
        let b = DensityMatrix::basis(3, 2);
        let prod = tensor_product(&a, &b).unwrap();
        let part = Bipartition::new(2, 3).unwrap();
        let ra = partial_trace(&prod, part, Side::Right).unwrap();
        let rb = partial_trace(&prod, part, Side::Left).unwrap();
        assert!(ra.matrix().max_abs_diff(a.matrix()) < 1e-15);
        assert!(rb.matrix().max_abs_diff(b.matrix()) < 1e-15);
    }

    #[test]
    fn inconsistent_bipartition_is_rejected() {
        let bell = PureState::phi_plus().to_density();
        let err = partial_trace(&bell, Bipartition::new(2, 3).unwrap(), Side::Right).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    #[test]
    fn register_limit_is_enforced() {
        let big = DensityMatrix::maximally_mixed(64);
        let limits = RegisterLimits { max_qubits: 10 };
        let err = tensor_product_within(&big, &DensityMatrix::maximally_mixed(32), &limits).unwrap_err();
        assert_eq!(err, Error::SizeLimit { dim: 2048, max: 1024 });
    }

    #[test]
    fn invalid_matrices_are_rejected() {
        let not_unit = ComplexMatrix::identity(2);
        assert!(DensityMatrix::new(not_unit).is_err());
        let negative = ComplexMatrix::from_real_rows(&[&[1.5, 0.0], &[0.0, -0.5]]);
        assert!(DensityMatrix::new(negative).is_err());
        let non_herm = ComplexMatrix::from_real_rows(&[&[0.5, 0.1], &[0.0, 0.5]]);
        assert!(DensityMatrix::new(non_herm).is_err());
    }

    #[test]
    fn permutation_swaps_qubits() {
        let s = tensor_product(&DensityMatrix::basis(2, 0), &DensityMatrix::basis(2, 1)).unwrap();
        let swapped = permute_qubits(&s, &[1, 0]).unwrap();
        let expected = tensor_product(&DensityMatrix::basis(2, 1), &DensityMatrix::basis(2, 0)).unwrap();
        assert_eq!(swapped, expected);
        assert!(permute_qubits(&s, &[0, 0]).is_err());
    }

    #[test]
    fn ppt_on_reference_states() {
        assert!(is_entangled_2q(&PureState::phi_plus().to_density()).unwrap());
        assert!(!is_entangled_2q(&DensityMatrix::maximally_mixed(4)).unwrap());
        assert!(is_entangled_2q(&DensityMatrix::maximally_mixed(2)).is_err());
    }

    #[test]
    fn bell_partial_transpose_has_eigenvalue_minus_half() {
        let pt = partial_transpose(&PureState::phi_plus().to_density(), Bipartition::new(2, 2).unwrap()).unwrap();
        // Φ+^{T_B} = SWAP/2: eigenvalues {−1/2, 1/2, 1/2, 1/2}.
        assert!(pt.max_abs_diff(&super::super::matrix::gates::swap().scale_real(0.5)) < 1e-15);
        assert!((pt.eigvalsh()[0] + 0.5).abs() < 1e-14);
    }
}
