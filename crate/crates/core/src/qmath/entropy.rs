//! Entropies in nats. Every logarithm here is natural; divide by `ln 2`
//! for bits.

use super::state::{
    partial_trace, permute_qubits, Bipartition, DensityMatrix, RegisterLimits, Side,
};
use crate::error::{Error, Result};

/// Purity gate for entanglement entropy: Tr(ρ²) ≥ 1 − PURITY_TOL.
pub const PURITY_TOL: f64 = 1e-10;

/// −Tr(ρ ln ρ), with `0 ln 0 = 0`.
pub fn von_neumann_entropy(state: &DensityMatrix) -> f64 {
    let s: f64 = state
        .eigenvalues()
        .into_iter()
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.ln())
        .sum();
    s.clamp(0.0, (state.dim() as f64).ln())
}

fn require_pure(state: &DensityMatrix) -> Result<()> {
    let purity = state.purity();
    if purity < 1.0 - PURITY_TOL {
        return Err(Error::Precondition(format!(
            "entanglement entropy needs a pure state; Tr(rho^2) = {purity} falls short of 1 by {:e}",
            1.0 - purity
        )));
    }
    Ok(())
}

/// Entropy of the left reduction of a pure joint state.
pub fn entanglement_entropy(state: &DensityMatrix, part: Bipartition) -> Result<f64> {
    entanglement_entropy_via(state, part, Side::Right)
}

/// Entropy of the reduction obtained by tracing out `traced`. For pure states
/// both sides agree (Schmidt symmetry).
pub fn entanglement_entropy_via(state: &DensityMatrix, part: Bipartition, traced: Side) -> Result<f64> {
    require_pure(state)?;
    let reduced = partial_trace(state, part, traced)?;
    Ok(von_neumann_entropy(&reduced))
}

/// A qubit-subset bipartition and its entanglement entropy.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitEntropy {
    /// Qubits on the side containing qubit 0, ascending.
    pub subset: Vec<u32>,
    pub entropy: f64,
}

/// Maximum entanglement entropy over every qubit-subset bipartition of a pure
/// register. Non-qubit-aligned factorisations are not searched.
pub fn max_entanglement_entropy(state: &DensityMatrix) -> Result<f64> {
    Ok(max_entanglement_split(state)?.map_or(0.0, |s| s.entropy))
}

/// Maximising split, or `None` for a single qubit (no nontrivial split).
pub fn max_entanglement_split(state: &DensityMatrix) -> Result<Option<SplitEntropy>> {
    let n = state.n_qubits().ok_or(Error::UnsupportedDimension {
        dim: state.dim(),
        reason: "qubit bipartitions need a power-of-two register",
    })?;
    RegisterLimits::default().check(state.dim())?;
    require_pure(state)?;

    let mut best: Option<SplitEntropy> = None;
    // Subsets that contain qubit 0 and are proper: 2^(n-1) - 1 of them.
    for rest in 0..(1u64 << (n - 1)) {
        let subset: Vec<u32> = std::iter::once(0)
            .chain((1..n).filter(|q| rest >> (q - 1) & 1 == 1))
            .collect();
        if subset.len() == n as usize {
            continue;
        }
        let complement = (0..n).filter(|q| !subset.contains(q));
        let order: Vec<u32> = subset.iter().copied().chain(complement).collect();
        let permuted = permute_qubits(state, &order)?;
        let part = Bipartition::qubits(subset.len() as u32, n)?;
        let entropy = entanglement_entropy(&permuted, part)?;
        if best.as_ref().is_none_or(|b| entropy > b.entropy) {
            best = Some(SplitEntropy { subset, entropy });
        }
    }
    Ok(best)
}
