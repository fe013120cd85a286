use nalgebra::DMatrix;

use super::circuit::{induced_map, CtcCircuit};
use crate::channels::QuantumChannel;
use crate::error::{Error, Result};
use crate::qmath::{partial_trace, tensor_product_within, Bipartition, ComplexMatrix, DensityMatrix, RegisterLimits, Side, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedPointMethod {
    CesaroIteration,
    EigenProjection,
}

impl FixedPointMethod {
    pub fn name(&self) -> &'static str {
        match self {
            FixedPointMethod::CesaroIteration => "cesaro",
            FixedPointMethod::EigenProjection => "eigen",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Target for ‖Φ(ρ) − ρ‖₁.
    pub residual_target: f64,
    pub max_iterations: usize,
    /// Singular values of `S − I` below this count toward the fixed subspace.
    pub multiplicity_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            residual_target: 1e-10,
            max_iterations: 100_000,
            multiplicity_tol: 1e-8,
        }
    }
}

/// A causally consistent CTC state.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointResult {
    pub rho: DensityMatrix,
    /// ‖Φ(ρ) − ρ‖₁.
    pub residual: f64,
    /// Multiplicity of eigenvalue 1 of the induced map.
    pub fixed_subspace_dim: usize,
    pub method: FixedPointMethod,
    pub iterations: usize,
}

pub fn fixed_point_residual(map: &QuantumChannel, rho: &ComplexMatrix) -> f64 {
    (&map.apply_matrix(rho) - rho).trace_norm_hermitian()
}

/// Solves `ρ = Tr_ch[U (ρ_in ⊗ ρ) U†]`: Cesàro iteration from the maximally
/// mixed state first, eigenspace projection as the fallback.
pub fn solve_fixed_point(circuit: &CtcCircuit, rho_in: &DensityMatrix) -> Result<FixedPointResult> {
    solve_fixed_point_opts(circuit, rho_in, &SolverOptions::default())
}

pub fn solve_fixed_point_opts(
    circuit: &CtcCircuit,
    rho_in: &DensityMatrix,
    opts: &SolverOptions,
) -> Result<FixedPointResult> {
    let map = induced_map(circuit, rho_in)?;
    let (fixed_dim, spaces) = fixed_spaces(&map, opts.multiplicity_tol);
    let cesaro = cesaro(&map, opts);
    let best_cesaro = match cesaro {
        Ok((rho, residual, iterations)) if residual <= opts.residual_target => {
            return Ok(FixedPointResult {
                rho,
                residual,
                fixed_subspace_dim: fixed_dim,
                method: FixedPointMethod::CesaroIteration,
                iterations,
            })
        }
        Ok((_, residual, _)) => residual,
        Err(_) => f64::INFINITY,
    };
    match eigen_projection(&map, &spaces) {
        Ok((rho, residual)) if residual <= opts.residual_target => Ok(FixedPointResult {
            rho,
            residual,
            fixed_subspace_dim: fixed_dim,
            method: FixedPointMethod::EigenProjection,
            iterations: 0,
        }),
        Ok((_, residual)) => Err(Error::Convergence {
            best_residual: residual.min(best_cesaro),
        }),
        Err(_) => Err(Error::Convergence {
            best_residual: best_cesaro,
        }),
    }
}

/// Runs one method only, without fallback.
pub fn solve_fixed_point_with(
    circuit: &CtcCircuit,
    rho_in: &DensityMatrix,
    method: FixedPointMethod,
    opts: &SolverOptions,
) -> Result<FixedPointResult> {
    let map = induced_map(circuit, rho_in)?;
    let (fixed_dim, spaces) = fixed_spaces(&map, opts.multiplicity_tol);
    let (rho, residual, iterations) = match method {
        FixedPointMethod::CesaroIteration => cesaro(&map, opts)?,
        FixedPointMethod::EigenProjection => {
            let (rho, residual) = eigen_projection(&map, &spaces)?;
            (rho, residual, 0)
        }
    };
    if residual > opts.residual_target {
        return Err(Error::Convergence {
            best_residual: residual,
        });
    }
    Ok(FixedPointResult {
        rho,
        residual,
        fixed_subspace_dim: fixed_dim,
        method,
        iterations,
    })
}

/// Iterates `x_{k+1} = Φ(x_k)` from `I/d`. Both the iterate and the Cesàro
/// mean `A_N = (1/N) Σ_{k<N} x_k` are monitored; the convergence test uses
/// `Φ(A_N) − A_N = (x_N − x_0)/N`, so the mean costs nothing extra. Either
/// limit is the projection of `I/d` onto the fixed space along the rest of
/// the spectrum.
fn cesaro(map: &QuantumChannel, opts: &SolverOptions) -> Result<(DensityMatrix, f64, usize)> {
    let d = map.dim_in();
    let x0 = ComplexMatrix::identity(d).scale_real(1.0 / d as f64);
    let bound = (d as f64).sqrt();
    let mut sum = x0.clone();
    let mut prev = x0.clone();
    let mut best = (x0.clone(), f64::INFINITY);
    for n in 1..=opts.max_iterations {
        let next = map.apply_matrix(&prev);
        let step = (&next - &prev).frobenius_norm();
        let drift = (&next - &x0).frobenius_norm() / n as f64;
        // Cheap Frobenius screen (‖M‖₁ ≤ √d ‖M‖_F) before the exact residual.
        let candidate = if bound * step <= opts.residual_target {
            Some(prev.clone())
        } else if bound * drift <= opts.residual_target {
            Some(sum.scale_real(1.0 / n as f64))
        } else {
            None
        };
        if let Some(c) = candidate {
            let residual = fixed_point_residual(map, &c);
            if residual <= opts.residual_target {
                let rho = DensityMatrix::renormalized(c)?;
                let residual = fixed_point_residual(map, rho.matrix());
                return Ok((rho, residual, n));
            }
            if residual < best.1 {
                best = (c, residual);
            }
        }
        sum = &sum + &next;
        prev = next;
    }
    let mean = sum.scale_real(1.0 / (opts.max_iterations + 1) as f64);
    let residual = fixed_point_residual(map, &mean);
    let c = if residual < best.1 { mean } else { best.0 };
    let rho = DensityMatrix::renormalized(c)?;
    let residual = fixed_point_residual(map, rho.matrix());
    Ok((rho, residual, opts.max_iterations))
}

/// Right and left eigenvalue-1 spaces of the vectorised map.
struct FixedSpaces {
    right: DMatrix<C64>,
    left: DMatrix<C64>,
}

fn fixed_spaces(map: &QuantumChannel, tol: f64) -> (usize, FixedSpaces) {
    let s = map.superoperator().to_dmatrix();
    let n = s.nrows();
    let m = &s - DMatrix::<C64>::identity(n, n);
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^H");
    let null: Vec<usize> = (0..n).filter(|&k| svd.singular_values[k] <= tol).collect();
    let right = DMatrix::from_fn(n, null.len(), |r, c| vt[(null[c], r)].conj());
    let left = DMatrix::from_fn(n, null.len(), |r, c| u[(r, null[c])]);
    (null.len().max(1), FixedSpaces { right, left })
}

/// Spectral projection of `vec(I/d)` onto the eigenvalue-1 space:
/// `P = R (L† R)⁻¹ L†`, which coincides with the Cesàro limit.
fn eigen_projection(map: &QuantumChannel, spaces: &FixedSpaces) -> Result<(DensityMatrix, f64)> {
    let d = map.dim_in();
    if spaces.right.ncols() == 0 {
        return Err(Error::Convergence {
            best_residual: f64::INFINITY,
        });
    }
    let seed = DMatrix::from_fn(d * d, 1, |r, _| {
        if r / d == r % d {
            C64::new(1.0 / d as f64, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let gram = spaces.left.adjoint() * &spaces.right;
    let coeffs = gram
        .lu()
        .solve(&(spaces.left.adjoint() * &seed))
        .ok_or(Error::Convergence {
            best_residual: f64::INFINITY,
        })?;
    let v = &spaces.right * coeffs;
    let m = ComplexMatrix::from_fn(d, d, |r, c| v[(r * d + c, 0)]);
    let tr = m.trace();
    if tr.norm() < 1e-300 {
        return Err(Error::Convergence {
            best_residual: f64::INFINITY,
        });
    }
    let rho = DensityMatrix::renormalized(m.scale(tr.inv()).hermitian_part())?;
    let residual = fixed_point_residual(map, rho.matrix());
    Ok((rho, residual))
}

/// `ρ_out = Tr_tv[U (ρ_in ⊗ ρ) U†]` for a solved circuit.
pub fn circuit_output(circuit: &CtcCircuit, rho_in: &DensityMatrix, fp: &FixedPointResult) -> Result<DensityMatrix> {
    if rho_in.dim() != circuit.dim_ch() || fp.rho.dim() != circuit.dim_tv() {
        return Err(Error::DimensionMismatch(format!(
            "circuit is {}x{}, states are {} and {}",
            circuit.dim_ch(),
            circuit.dim_tv(),
            rho_in.dim(),
            fp.rho.dim()
        )));
    }
    let joint = tensor_product_within(rho_in, &fp.rho, &RegisterLimits::default())?;
    let evolved = joint.evolve(circuit.unitary())?;
    partial_trace(&evolved, Bipartition::new(circuit.dim_ch(), circuit.dim_tv())?, Side::Right)
}
