#![allow(dead_code)]

use nlsim_core::qmath::{ComplexMatrix, DensityMatrix, PureState, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian via Box–Muller.
pub fn gaussian(rng: &mut impl Rng) -> C64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    let r = (-2.0 * u1.ln()).sqrt();
    let t = std::f64::consts::TAU * u2;
    C64::new(r * t.cos(), r * t.sin()) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_pure(d: usize, rng: &mut impl Rng) -> PureState {
    PureState::normalized((0..d).map(|_| gaussian(rng)).collect()).unwrap()
}

/// G G† / Tr, with G a `d × rank` Gaussian matrix.
pub fn random_density_rank(d: usize, rank: usize, rng: &mut impl Rng) -> DensityMatrix {
    let g = ComplexMatrix::from_fn(d, rank, |_, _| gaussian(rng));
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::from_hermitian_part(m.scale_real(1.0 / tr)).unwrap()
}

pub fn random_density(d: usize, rng: &mut impl Rng) -> DensityMatrix {
    random_density_rank(d, d, rng)
}

/// Haar-ish unitary by modified Gram–Schmidt on Gaussian columns.
pub fn random_unitary(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v: Vec<C64> = (0..d).map(|_| gaussian(rng)).collect();
        for _ in 0..2 {
            for u in &cols {
                let dot: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= dot * y;
                }
            }
        }
        let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if n < 1e-8 {
            continue;
        }
        cols.push(v.into_iter().map(|x| x / n).collect());
    }
    ComplexMatrix::from_fn(d, d, |r, c| cols[c][r])
}

pub fn assert_valid_state(rho: &DensityMatrix) {
    let m = rho.matrix();
    assert!(m.hermitian_defect() <= 1e-12, "Hermitian defect {}", m.hermitian_defect());
    assert!((m.trace().re - 1.0).abs() <= 1e-12 && m.trace().im.abs() <= 1e-12, "trace {}", m.trace());
    assert!(m.eigvalsh()[0] >= -1e-10, "min eigenvalue {}", m.eigvalsh()[0]);
}

/// Partial trace of a square operator over the slow factor, written out
/// index by index.
pub fn trace_out_left(m: &ComplexMatrix, left: usize, right: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(right, right);
    for a in 0..right {
        for b in 0..right {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..left {
                s += m.get(k * right + a, k * right + b);
            }
            out.set(a, b, s);
        }
    }
    out
}

/// Eigenvalues of a 2×2 Hermitian matrix in closed form, ascending.
pub fn eig2(m: &ComplexMatrix) -> [f64; 2] {
    let a = m.get(0, 0).re;
    let d = m.get(1, 1).re;
    let b = m.get(0, 1).norm();
    let mid = 0.5 * (a + d);
    let rad = (0.25 * (a - d).powi(2) + b * b).sqrt();
    [mid - rad, mid + rad]
}
