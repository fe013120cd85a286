use crate::error::{Error, Result};
use crate::games::{
    joint_outcome_distribution, DeterministicStrategy, DichotomicObservable, JointDistribution, Outcome,
};
use crate::qmath::{partial_trace, partial_trace_matrix, Bipartition, ComplexMatrix, DensityMatrix, PureState, Side, C64};

/// Device under test, as seen from its internal description.
///
/// All quantum kinds run on the same in-process Born-rule engine; the
/// difference between them is only in how an answer pair is sampled.
#[derive(Debug, Clone, PartialEq)]
pub enum MachineSpec {
    /// Two provers each holding one qubit of `shared`, answering locally.
    SeparableProvers { shared: DensityMatrix },
    /// One device holding `global`, whose two slowest qubits are the
    /// measured pair, answering from the joint distribution.
    Monolithic { global: DensityMatrix },
    /// Shared randomness over deterministic answer tables.
    ClassicalCorrelated { mixture: Vec<(f64, DeterministicStrategy)> },
}

/// The kind of a [`MachineSpec`], without its data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MachineKind {
    SeparableProvers,
    Monolithic,
    ClassicalCorrelated,
}

impl MachineKind {
    pub fn name(&self) -> &'static str {
        match self {
            MachineKind::SeparableProvers => "separable",
            MachineKind::Monolithic => "monolithic",
            MachineKind::ClassicalCorrelated => "classical",
        }
    }
}

impl MachineSpec {
    pub fn separable(shared: DensityMatrix) -> Result<Self> {
        require_pair(&shared)?;
        Ok(Self::SeparableProvers { shared })
    }

    pub fn monolithic(state: DensityMatrix) -> Result<Self> {
        require_pair(&state)?;
        Ok(Self::Monolithic { global: state })
    }

    /// Monolithic device holding a global state on `4·k` dimensions whose
    /// reduction to the two slowest qubits is the measured pair.
    pub fn monolithic_global(global: DensityMatrix) -> Result<Self> {
        if !global.dim().is_multiple_of(4) {
            return Err(Error::InvalidMachine(format!(
                "global state of dimension {} has no two-qubit slow factor",
                global.dim()
            )));
        }
        Ok(Self::Monolithic { global })
    }

    /// Monolithic device holding a pure purification of `pair`, so the
    /// measured pair is one component of a globally entangled state.
    pub fn monolithic_purified(pair: &DensityMatrix) -> Result<Self> {
        require_pair(pair)?;
        Self::monolithic_global(purify(pair)?.to_density())
    }

    pub fn classical(mixture: Vec<(f64, DeterministicStrategy)>) -> Result<Self> {
        if mixture.is_empty() {
            return Err(Error::InvalidMachine("empty strategy mixture".into()));
        }
        if mixture.iter().any(|(w, _)| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidMachine("strategy weights must be nonnegative".into()));
        }
        let total: f64 = mixture.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMachine(format!("strategy weights sum to {total}, not 1")));
        }
        Ok(Self::ClassicalCorrelated { mixture })
    }

    pub fn deterministic(strategy: DeterministicStrategy) -> Self {
        Self::ClassicalCorrelated {
            mixture: vec![(1.0, strategy)],
        }
    }

    pub fn kind(&self) -> MachineKind {
        match self {
            MachineSpec::SeparableProvers { .. } => MachineKind::SeparableProvers,
            MachineSpec::Monolithic { .. } => MachineKind::Monolithic,
            MachineSpec::ClassicalCorrelated { .. } => MachineKind::ClassicalCorrelated,
        }
    }

    /// Two-qubit state of the measured pair (quantum kinds only).
    pub fn pair_state(&self) -> Result<DensityMatrix> {
        match self {
            MachineSpec::SeparableProvers { shared } => Ok(shared.clone()),
            MachineSpec::Monolithic { global } if global.dim() == 4 => Ok(global.clone()),
            MachineSpec::Monolithic { global } => {
                partial_trace(global, Bipartition::new(4, global.dim() / 4)?, Side::Right)
            }
            MachineSpec::ClassicalCorrelated { .. } => Err(Error::InvalidMachine(
                "a classical machine has no quantum state".into(),
            )),
        }
    }
}

fn require_pair(state: &DensityMatrix) -> Result<()> {
    if state.dim() != 4 {
        return Err(Error::InvalidMachine(format!(
            "provers share a two-qubit state; got dimension {}",
            state.dim()
        )));
    }
    Ok(())
}

/// `Σ √λᵢ |vᵢ⟩|i⟩` on `dim ⊗ dim`.
pub fn purify(state: &DensityMatrix) -> Result<PureState> {
    let d = state.dim();
    let (vals, vecs) = state.matrix().eigh();
    let mut amps = vec![C64::new(0.0, 0.0); d * d];
    for (i, &l) in vals.iter().enumerate() {
        if l <= 0.0 {
            continue;
        }
        let w = l.sqrt();
        for r in 0..d {
            amps[r * d + i] = vecs.get(r, i) * w;
        }
    }
    PureState::normalized(amps)
}

/// Sampling law of one quantum setting pair under the local (separable)
/// path: A measures its qubit, then B measures its post-collapse qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalSampler {
    /// p_A(x).
    pub a_marginal: [f64; 2],
    /// p(y | x), indexed `[x][y]`.
    pub b_conditional: [[f64; 2]; 2],
}

impl LocalSampler {
    pub fn new(pair: &DensityMatrix, a: DichotomicObservable, b: DichotomicObservable) -> Result<Self> {
        require_pair(pair)?;
        let id = ComplexMatrix::identity(2);
        let part = Bipartition::new(2, 2)?;
        let mut a_marginal = [0.0; 2];
        let mut b_conditional = [[0.5; 2]; 2];
        for x in Outcome::BOTH {
            let pa = a.projector(x).kron(&id);
            // A's outcome depends only on A's reduced qubit.
            let px = pair.expectation(&pa).max(0.0);
            a_marginal[x.index()] = px;
            if px <= 0.0 {
                continue;
            }
            let collapsed = pa.conjugate(pair.matrix());
            let b_state = partial_trace_matrix(&collapsed, part, Side::Left)?.scale_real(1.0 / px);
            for y in Outcome::BOTH {
                let pb = b.projector(y);
                let mut acc = C64::new(0.0, 0.0);
                for r in 0..2 {
                    for c in 0..2 {
                        acc += b_state.get(r, c) * pb.get(c, r);
                    }
                }
                b_conditional[x.index()][y.index()] = acc.re.max(0.0);
            }
        }
        Ok(Self {
            a_marginal,
            b_conditional,
        })
    }

    /// Implied joint distribution `p_A(x)·p(y|x)`.
    pub fn joint(&self) -> Result<JointDistribution> {
        let p = std::array::from_fn(|x| std::array::from_fn(|y| self.a_marginal[x] * self.b_conditional[x][y]));
        JointDistribution::from_table(p)
    }
}

/// Joint law under the monolithic path: `Tr[ρ (P_x ⊗ P_y ⊗ I)]` on the
/// global state.
pub fn monolithic_distribution(
    global: &DensityMatrix,
    a: DichotomicObservable,
    b: DichotomicObservable,
) -> Result<JointDistribution> {
    if global.dim() == 4 {
        return joint_outcome_distribution(global, a, b);
    }
    if !global.dim().is_multiple_of(4) {
        return Err(Error::InvalidMachine("global state has no two-qubit slow factor".into()));
    }
    let rest = ComplexMatrix::identity(global.dim() / 4);
    let mut p = [[0.0; 2]; 2];
    for x in Outcome::BOTH {
        for y in Outcome::BOTH {
            let op = a.projector(x).kron(&b.projector(y)).kron(&rest);
            p[x.index()][y.index()] = global.expectation(&op);
        }
    }
    JointDistribution::from_table(p)
}
