//! Quantum channels in Kraus form, the dephasing model of the verifier's
//! decohering switch, and Werner states.

use crate::error::{Error, Result};
use crate::qmath::{ComplexMatrix, DensityMatrix, PureState, C64};

/// Tolerance on ‖Σ K†K − I‖ over entries.
pub const TRACE_PRESERVATION_TOL: f64 = 1e-10;

/// CPTP map `ρ ↦ Σ K ρ K†`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::DimensionMismatch("channel needs at least one Kraus operator".into()))?;
        let (dim_out, dim_in) = (first.rows(), first.cols());
        if kraus.iter().any(|k| k.rows() != dim_out || k.cols() != dim_in) {
            return Err(Error::DimensionMismatch(
                "Kraus operators must share one shape".into(),
            ));
        }
        let ch = Self {
            dim_in,
            dim_out,
            kraus,
        };
        let defect = ch.trace_preservation_defect();
        if defect > TRACE_PRESERVATION_TOL {
            return Err(Error::NotTracePreserving { defect });
        }
        Ok(ch)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim_in: dim,
            dim_out: dim,
            kraus: vec![ComplexMatrix::identity(dim)],
        }
    }

    /// Conjugation by a single unitary.
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn trace_preservation_defect(&self) -> f64 {
        let mut acc = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            acc = &acc + &(&k.adjoint() * k);
        }
        acc.max_abs_diff(&ComplexMatrix::identity(self.dim_in))
    }

    pub fn apply(&self, state: &DensityMatrix) -> Result<DensityMatrix> {
        if state.dim() != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "channel expects dimension {}, state has {}",
                self.dim_in,
                state.dim()
            )));
        }
        DensityMatrix::from_hermitian_part(self.apply_matrix(state.matrix()))
    }

    /// Applies the map to an arbitrary operator. Panics on shape mismatch.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            acc = &acc + &k.conjugate(m);
        }
        acc
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &QuantumChannel) -> Result<Self> {
        if first.dim_out != self.dim_in {
            return Err(Error::DimensionMismatch("channels do not compose".into()));
        }
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| first.kraus.iter().map(move |b| a * b))
            .collect();
        Self::new(kraus)
    }

    /// `self ⊗ id_rest`, acting on the slow factor of a larger register.
    pub fn on_left_of(&self, rest: usize) -> Self {
        let id = ComplexMatrix::identity(rest);
        Self {
            dim_in: self.dim_in * rest,
            dim_out: self.dim_out * rest,
            kraus: self.kraus.iter().map(|k| k.kron(&id)).collect(),
        }
    }

    /// Matrix `S` with `vec(Φ(ρ)) = S·vec(ρ)` under row-major vectorisation.
    pub fn superoperator(&self) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim_out * self.dim_out, self.dim_in * self.dim_in);
        for k in &self.kraus {
            let conj = ComplexMatrix::from_fn(k.rows(), k.cols(), |r, c| k.get(r, c).conj());
            acc = &acc + &k.kron(&conj);
        }
        acc
    }

    /// Choi matrix `Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)`; PSD iff the map is completely positive.
    pub fn choi_matrix(&self) -> ComplexMatrix {
        let d = self.dim_in;
        let mut choi = ComplexMatrix::zeros(d * self.dim_out, d * self.dim_out);
        for i in 0..d {
            for j in 0..d {
                let mut unit = ComplexMatrix::zeros(d, d);
                unit.set(i, j, C64::new(1.0, 0.0));
                let block = self.apply_matrix(&unit);
                let mut e = ComplexMatrix::zeros(d, d);
                e.set(i, j, C64::new(1.0, 0.0));
                choi = &choi + &e.kron(&block);
            }
        }
        choi
    }
}

/// The verifier's decohering switch. The strength scale is a modelling
/// choice: `1` fully dephases, intermediate values interpolate linearly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoherenceSwitch {
    on: bool,
    strength: f64,
}

impl DecoherenceSwitch {
    pub fn new(on: bool, strength: f64) -> Result<Self> {
        check_unit("strength", strength)?;
        Ok(Self { on, strength })
    }

    pub fn off() -> Self {
        Self {
            on: false,
            strength: 1.0,
        }
    }

    pub fn full() -> Self {
        Self {
            on: true,
            strength: 1.0,
        }
    }

    pub fn is_on(&self) -> bool {
        self.on
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    /// Effective dephasing strength: zero when the switch is off.
    pub fn effective_strength(&self) -> f64 {
        if self.on {
            self.strength
        } else {
            0.0
        }
    }

    pub fn channel(&self, n_qubits: u32) -> QuantumChannel {
        dephasing_channel(n_qubits, self.effective_strength()).expect("strength validated on construction")
    }
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            range: "[0, 1]",
        })
    }
}

/// Computational-basis dephasing on `n_qubits`: every off-diagonal entry is
/// scaled by `1 − strength`.
pub fn dephasing_channel(n_qubits: u32, strength: f64) -> Result<QuantumChannel> {
    check_unit("strength", strength)?;
    let d = 1usize << n_qubits;
    if strength == 0.0 {
        return Ok(QuantumChannel::identity(d));
    }
    let mut kraus = Vec::with_capacity(d + 1);
    if strength < 1.0 {
        kraus.push(ComplexMatrix::identity(d).scale_real((1.0 - strength).sqrt()));
    }
    let w = strength.sqrt();
    for i in 0..d {
        let mut p = ComplexMatrix::zeros(d, d);
        p.set(i, i, C64::new(w, 0.0));
        kraus.push(p);
    }
    QuantumChannel::new(kraus)
}

/// `p·|Φ+⟩⟨Φ+| + (1 − p)·I/4`.
pub fn werner_state(p: f64) -> Result<DensityMatrix> {
    check_unit("p", p)?;
    let bell = PureState::phi_plus().to_density();
    let mixed = DensityMatrix::maximally_mixed(4);
    DensityMatrix::mixture(&[(p, &bell), (1.0 - p, &mixed)])
}
