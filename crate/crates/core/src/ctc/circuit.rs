use crate::channels::QuantumChannel;
use crate::error::{Error, Result};
use crate::qmath::{gates, ComplexMatrix, DensityMatrix, C64};

/// Unitary tolerance ‖U†U − I‖ for circuits.
pub const UNITARITY_TOL: f64 = 1e-10;
/// Largest total dimension `dim_ch · dim_tv`.
pub const MAX_TOTAL_DIM: usize = 256;
/// Largest CTC-traversing dimension; the solver vectorises a `dim_tv² × dim_tv²` map.
pub const MAX_TV_DIM: usize = 16;

/// Unitary on `H_ch ⊗ H_tv`, chronology-respecting factor on the slow index.
#[derive(Debug, Clone, PartialEq)]
pub struct CtcCircuit {
    dim_ch: usize,
    dim_tv: usize,
    unitary: ComplexMatrix,
}

impl CtcCircuit {
    pub fn new(dim_ch: usize, dim_tv: usize, unitary: ComplexMatrix) -> Result<Self> {
        if dim_ch < 1 || dim_tv < 2 {
            return Err(Error::DimensionMismatch(format!(
                "need dim_ch >= 1 and dim_tv >= 2, got {dim_ch} and {dim_tv}"
            )));
        }
        let total = dim_ch * dim_tv;
        if total > MAX_TOTAL_DIM {
            return Err(Error::SizeLimit {
                dim: total,
                max: MAX_TOTAL_DIM,
            });
        }
        if dim_tv > MAX_TV_DIM {
            return Err(Error::SizeLimit {
                dim: dim_tv,
                max: MAX_TV_DIM,
            });
        }
        if unitary.rows() != total || unitary.cols() != total {
            return Err(Error::DimensionMismatch(format!(
                "unitary is {}x{}, expected {total}x{total}",
                unitary.rows(),
                unitary.cols()
            )));
        }
        let defect = unitary.unitarity_defect();
        if defect > UNITARITY_TOL {
            return Err(Error::NonUnitary { defect });
        }
        Ok(Self {
            dim_ch,
            dim_tv,
            unitary,
        })
    }

    /// One CTC qubit, no chronology-respecting qubits, `U = X`.
    pub fn grandfather() -> Self {
        Self::new(1, 2, gates::pauli_x()).unwrap()
    }

    /// CNOT with the chronology qubit as control and the CTC qubit as target.
    pub fn controlled_not() -> Self {
        Self::new(2, 2, gates::cnot()).unwrap()
    }

    pub fn swap() -> Self {
        Self::new(2, 2, gates::swap()).unwrap()
    }

    pub fn dim_ch(&self) -> usize {
        self.dim_ch
    }

    pub fn dim_tv(&self) -> usize {
        self.dim_tv
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }

    /// Circuit with the CTC factor re-expressed in a rotated basis:
    /// `(I ⊗ V†) U (I ⊗ V)`. Its fixed points are `V† ρ V`.
    pub fn conjugate_tv(&self, v: &ComplexMatrix) -> Result<Self> {
        if v.rows() != self.dim_tv || v.unitarity_defect() > UNITARITY_TOL {
            return Err(Error::NonUnitary {
                defect: v.unitarity_defect(),
            });
        }
        let id = ComplexMatrix::identity(self.dim_ch);
        let lift = id.kron(v);
        let u = &(&lift.adjoint() * &self.unitary) * &lift;
        Self::new(self.dim_ch, self.dim_tv, u)
    }

    fn check_input(&self, rho_in: &DensityMatrix) -> Result<()> {
        if rho_in.dim() != self.dim_ch {
            return Err(Error::DimensionMismatch(format!(
                "input state has dimension {}, circuit expects {}",
                rho_in.dim(),
                self.dim_ch
            )));
        }
        Ok(())
    }
}

/// The map `ρ ↦ Tr_ch[U (ρ_in ⊗ ρ) U†]` on the CTC factor.
///
/// With `ρ_in = Σ λᵢ |vᵢ⟩⟨vᵢ|` its Kraus operators are
/// `K_ij = √λᵢ (⟨e_j| ⊗ I) U (|vᵢ⟩ ⊗ I)`.
pub fn induced_map(circuit: &CtcCircuit, rho_in: &DensityMatrix) -> Result<QuantumChannel> {
    circuit.check_input(rho_in)?;
    let (dc, dt) = (circuit.dim_ch, circuit.dim_tv);
    let u = &circuit.unitary;
    let (vals, vecs) = rho_in.matrix().eigh();
    let mut kraus = Vec::new();
    for (i, &lambda) in vals.iter().enumerate() {
        if lambda <= 0.0 {
            continue;
        }
        let w = lambda.sqrt();
        let v = vecs.column(i);
        for j in 0..dc {
            let k = ComplexMatrix::from_fn(dt, dt, |a, b| {
                let s: C64 = (0..dc).map(|c| u.get(j * dt + a, c * dt + b) * v[c]).sum();
                s * w
            });
            kraus.push(k);
        }
    }
    QuantumChannel::new(kraus)
}
