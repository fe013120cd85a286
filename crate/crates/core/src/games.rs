//! Dichotomic observables, Born-rule sampling and CHSH statistics.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rand::Rng;

use crate::error::{Error, Result};
use crate::qmath::{gates, ComplexMatrix, DensityMatrix};
use crate::rng::{map_blocks, Execution, SeedStream};

/// Single-qubit observable `cos θ·Z + sin θ·X` with eigenvalues ±1.
///
/// Restricting to the Z–X plane is enough to reach both the classical and
/// the Tsirelson bound for the states used here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DichotomicObservable {
    angle: f64,
}

impl DichotomicObservable {
    pub fn new(angle: f64) -> Self {
        Self { angle }
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let (s, c) = self.angle.sin_cos();
        &gates::pauli_z().scale_real(c) + &gates::pauli_x().scale_real(s)
    }

    /// Spectral projector `(I ± O)/2` for `outcome`.
    pub fn projector(&self, outcome: Outcome) -> ComplexMatrix {
        let o = self.matrix().scale_real(f64::from(outcome.value()));
        (&ComplexMatrix::identity(2) + &o).scale_real(0.5)
    }
}

/// A ±1 measurement result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn value(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn from_value(v: i8) -> Option<Self> {
        match v {
            1 => Some(Outcome::Plus),
            -1 => Some(Outcome::Minus),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
        }
    }
}

/// Probability table `p(x, y)` over `{+1, −1}²`, indexed `[x][y]` with
/// index 0 for `+1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointDistribution {
    p: [[f64; 2]; 2],
}

impl JointDistribution {
    /// Tolerance on negative cells before they are clipped to zero.
    pub const CLIP: f64 = 1e-12;

    pub fn from_table(p: [[f64; 2]; 2]) -> Result<Self> {
        let mut p = p;
        for v in p.iter_mut().flatten() {
            if *v < -Self::CLIP || !v.is_finite() {
                return Err(Error::InvalidState(format!("negative outcome probability {v:e}")));
            }
            *v = v.max(0.0);
        }
        let total: f64 = p.iter().flatten().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("probabilities sum to {total}")));
        }
        Ok(Self { p })
    }

    pub fn prob(&self, x: Outcome, y: Outcome) -> f64 {
        self.p[x.index()][y.index()]
    }

    pub fn table(&self) -> [[f64; 2]; 2] {
        self.p
    }

    pub fn marginal_a(&self, x: Outcome) -> f64 {
        self.p[x.index()].iter().sum()
    }

    pub fn marginal_b(&self, y: Outcome) -> f64 {
        self.p[0][y.index()] + self.p[1][y.index()]
    }

    /// `E[x·y]`.
    pub fn correlation(&self) -> f64 {
        self.p[0][0] + self.p[1][1] - self.p[0][1] - self.p[1][0]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.p
            .iter()
            .flatten()
            .zip(other.p.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Inverse-CDF draw over cells in the order (+,+), (+,−), (−,+), (−,−).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (Outcome, Outcome) {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last = (Outcome::Plus, Outcome::Plus);
        for x in Outcome::BOTH {
            for y in Outcome::BOTH {
                let p = self.prob(x, y);
                if p == 0.0 {
                    continue;
                }
                acc += p;
                last = (x, y);
                if u < acc {
                    return (x, y);
                }
            }
        }
        last
    }
}

fn require_two_qubits(state: &DensityMatrix) -> Result<()> {
    if state.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "expected a two-qubit state, got dimension {}",
            state.dim()
        )));
    }
    Ok(())
}

/// `p(x, y) = Tr[ρ (P_x ⊗ P_y)]`.
pub fn joint_outcome_distribution(
    state: &DensityMatrix,
    a: DichotomicObservable,
    b: DichotomicObservable,
) -> Result<JointDistribution> {
    require_two_qubits(state)?;
    let mut p = [[0.0; 2]; 2];
    for x in Outcome::BOTH {
        let pa = a.projector(x);
        for y in Outcome::BOTH {
            p[x.index()][y.index()] = state.expectation(&pa.kron(&b.projector(y)));
        }
    }
    JointDistribution::from_table(p)
}

/// One joint measurement round drawn from the Born-rule distribution.
pub fn sample_round<R: Rng + ?Sized>(
    state: &DensityMatrix,
    a: DichotomicObservable,
    b: DichotomicObservable,
    rng: &mut R,
) -> Result<(Outcome, Outcome)> {
    Ok(joint_outcome_distribution(state, a, b)?.sample(rng))
}

/// Index pair into the two settings of each party, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SettingPair {
    a_index: u8,
    b_index: u8,
}

impl SettingPair {
    /// Canonical cycling order (1,1), (1,2), (2,1), (2,2).
    pub const ALL: [SettingPair; 4] = [
        SettingPair { a_index: 1, b_index: 1 },
        SettingPair { a_index: 1, b_index: 2 },
        SettingPair { a_index: 2, b_index: 1 },
        SettingPair { a_index: 2, b_index: 2 },
    ];

    pub fn new(a_index: u8, b_index: u8) -> Result<Self> {
        if !(1..=2).contains(&a_index) || !(1..=2).contains(&b_index) {
            return Err(Error::OutOfRange {
                name: "setting index",
                value: f64::from(a_index.max(b_index)),
                range: "{1, 2}",
            });
        }
        Ok(Self { a_index, b_index })
    }

    pub fn a_index(&self) -> u8 {
        self.a_index
    }

    pub fn b_index(&self) -> u8 {
        self.b_index
    }

    /// Position in [`SettingPair::ALL`].
    pub fn ordinal(&self) -> usize {
        usize::from((self.a_index - 1) * 2 + (self.b_index - 1))
    }

    /// Sign of this term in the CHSH sum.
    pub fn sign(&self) -> f64 {
        if self.a_index == 2 && self.b_index == 2 {
            -1.0
        } else {
            1.0
        }
    }
}

/// Two observables per party.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshSettings {
    pub a: [DichotomicObservable; 2],
    pub b: [DichotomicObservable; 2],
}

impl ChshSettings {
    pub fn from_angles(a: [f64; 2], b: [f64; 2]) -> Self {
        Self {
            a: a.map(DichotomicObservable::new),
            b: b.map(DichotomicObservable::new),
        }
    }

    /// θ_A ∈ {0, π/2}, θ_B ∈ {π/4, −π/4}: saturates 2√2 on |Φ+⟩.
    pub fn canonical() -> Self {
        Self::from_angles([0.0, FRAC_PI_2], [FRAC_PI_4, -FRAC_PI_4])
    }

    pub fn angles_a(&self) -> [f64; 2] {
        self.a.map(|o| o.angle())
    }

    pub fn angles_b(&self) -> [f64; 2] {
        self.b.map(|o| o.angle())
    }

    pub fn observables(&self, pair: SettingPair) -> (DichotomicObservable, DichotomicObservable) {
        (
            self.a[usize::from(pair.a_index - 1)],
            self.b[usize::from(pair.b_index - 1)],
        )
    }

    /// Bell operator `A₁⊗B₁ + A₁⊗B₂ + A₂⊗B₁ − A₂⊗B₂`.
    pub fn bell_operator(&self) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(4, 4);
        for pair in SettingPair::ALL {
            let (a, b) = self.observables(pair);
            acc = &acc + &a.matrix().kron(&b.matrix()).scale_real(pair.sign());
        }
        acc
    }
}

/// Running sum of `x·y` products for one setting pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PairTally {
    pub rounds: u64,
    /// Σ x·y.
    pub product_sum: i64,
}

impl PairTally {
    pub fn record(&mut self, x: Outcome, y: Outcome) {
        self.rounds += 1;
        self.product_sum += i64::from(x.value() * y.value());
    }

    pub fn mean(&self) -> f64 {
        if self.rounds == 0 {
            0.0
        } else {
            self.product_sum as f64 / self.rounds as f64
        }
    }

    /// Unbiased sample variance of `x·y`. Since `(x·y)² = 1` this is
    /// `n/(n−1)·(1 − mean²)`.
    pub fn sample_variance(&self) -> f64 {
        if self.rounds < 2 {
            return 0.0;
        }
        let n = self.rounds as f64;
        let m = self.mean();
        (n / (n - 1.0) * (1.0 - m * m)).max(0.0)
    }
}

/// Monte Carlo CHSH estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshEstimate {
    pub exp: f64,
    pub stderr: f64,
    pub counts_per_pair: [u64; 4],
    pub per_pair_means: [f64; 4],
}

impl ChshEstimate {
    /// Builds an estimate from per-pair tallies in [`SettingPair::ALL`] order.
    /// The standard error combines per-pair standard errors in quadrature.
    pub fn from_tallies(tallies: &[PairTally; 4]) -> Self {
        let per_pair_means = tallies.map(|t| t.mean());
        let counts_per_pair = tallies.map(|t| t.rounds);
        let exp = chsh_combination(&per_pair_means);
        let var: f64 = tallies
            .iter()
            .filter(|t| t.rounds > 0)
            .map(|t| t.sample_variance() / t.rounds as f64)
            .sum();
        Self {
            exp,
            stderr: var.sqrt(),
            counts_per_pair,
            per_pair_means,
        }
    }

    pub fn violates_classical_bound(&self, sigmas: f64) -> bool {
        self.exp - sigmas * self.stderr > CLASSICAL_BOUND
    }
}

/// `|m₁₁ + m₁₂ + m₂₁ − m₂₂|`.
pub fn chsh_combination(means: &[f64; 4]) -> f64 {
    SettingPair::ALL
        .iter()
        .map(|p| p.sign() * means[p.ordinal()])
        .sum::<f64>()
        .abs()
}

pub const CLASSICAL_BOUND: f64 = 2.0;
pub const TSIRELSON_BOUND: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Samples `rounds_per_pair` joint rounds for every setting pair. Pair `k`
/// block `b` draws from substream `(k, b)`.
pub fn estimate_chsh(
    state: &DensityMatrix,
    settings: &ChshSettings,
    rounds_per_pair: usize,
    seeds: &SeedStream,
    exec: Execution,
) -> Result<ChshEstimate> {
    if rounds_per_pair == 0 {
        return Err(Error::Precondition("rounds per pair must be at least 1".into()));
    }
    let mut tallies = [PairTally::default(); 4];
    for pair in SettingPair::ALL {
        let (a, b) = settings.observables(pair);
        let dist = joint_outcome_distribution(state, a, b)?;
        let group = pair.ordinal() as u32;
        let partial = map_blocks(rounds_per_pair, exec, |block, _, len| {
            let mut rng = seeds.block(group, block);
            let mut t = PairTally::default();
            for _ in 0..len {
                let (x, y) = dist.sample(&mut rng);
                t.record(x, y);
            }
            vec![t]
        });
        let t = &mut tallies[pair.ordinal()];
        for p in partial {
            t.rounds += p.rounds;
            t.product_sum += p.product_sum;
        }
    }
    Ok(ChshEstimate::from_tallies(&tallies))
}

/// `Tr[ρ (A ⊗ B)]`.
pub fn exact_correlation(state: &DensityMatrix, a: DichotomicObservable, b: DichotomicObservable) -> Result<f64> {
    require_two_qubits(state)?;
    Ok(state.expectation(&a.matrix().kron(&b.matrix())))
}

/// Analytic CHSH value `|Σ ± Tr[ρ(A_i ⊗ B_j)]|`.
pub fn exact_chsh(state: &DensityMatrix, settings: &ChshSettings) -> Result<f64> {
    let mut means = [0.0; 4];
    for pair in SettingPair::ALL {
        let (a, b) = settings.observables(pair);
        means[pair.ordinal()] = exact_correlation(state, a, b)?;
    }
    Ok(chsh_combination(&means))
}

/// Deterministic local answers `(a₁, a₂, b₁, b₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DeterministicStrategy {
    pub a: [Outcome; 2],
    pub b: [Outcome; 2],
}

impl DeterministicStrategy {
    pub fn from_signs(signs: [i8; 4]) -> Result<Self> {
        let o = |v: i8| {
            Outcome::from_value(v).ok_or(Error::OutOfRange {
                name: "strategy answer",
                value: f64::from(v),
                range: "{+1, -1}",
            })
        };
        Ok(Self {
            a: [o(signs[0])?, o(signs[1])?],
            b: [o(signs[2])?, o(signs[3])?],
        })
    }

    pub fn signs(&self) -> [i8; 4] {
        [self.a[0].value(), self.a[1].value(), self.b[0].value(), self.b[1].value()]
    }

    pub fn answers(&self, pair: SettingPair) -> (Outcome, Outcome) {
        (self.a[usize::from(pair.a_index - 1)], self.b[usize::from(pair.b_index - 1)])
    }

    /// Signed CHSH sum, before the absolute value.
    pub fn chsh_sum(&self) -> f64 {
        SettingPair::ALL
            .iter()
            .map(|&p| {
                let (x, y) = self.answers(p);
                p.sign() * f64::from(x.value() * y.value())
            })
            .sum()
    }

    pub fn chsh_value(&self) -> f64 {
        self.chsh_sum().abs()
    }

    /// All 16 assignments.
    pub fn all() -> Vec<Self> {
        (0..16u8)
            .map(|bits| {
                let s = |k: u8| if bits >> k & 1 == 0 { 1 } else { -1 };
                Self::from_signs([s(3), s(2), s(1), s(0)]).unwrap()
            })
            .collect()
    }
}

/// Strategies that attain [`classical_strategy_max`].
pub fn classical_maximizers() -> Vec<DeterministicStrategy> {
    let best = classical_strategy_max();
    DeterministicStrategy::all()
        .into_iter()
        .filter(|s| s.chsh_value() == best)
        .collect()
}

/// Maximum CHSH value over deterministic local strategies, by enumeration.
pub fn classical_strategy_max() -> f64 {
    DeterministicStrategy::all()
        .iter()
        .map(DeterministicStrategy::chsh_value)
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{tensor_product, PureState, C64};

    #[test]
    fn observables_square_to_identity() {
        for angle in [0.0, 0.3, -1.2, 2.5] {
            let o = DichotomicObservable::new(angle).matrix();
            assert!((&o * &o).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
            assert!(o.hermitian_defect() == 0.0);
        }
    }

    #[test]
    fn bell_zz_distribution_by_hand() {
        let z = DichotomicObservable::new(0.0);
        let d = joint_outcome_distribution(&PureState::phi_plus().to_density(), z, z).unwrap();
        let expected = [[0.5, 0.0], [0.0, 0.5]];
        for (row, exp) in d.table().iter().zip(expected) {
            for (v, e) in row.iter().zip(exp) {
                assert!((v - e).abs() < 1e-12);
            }
        }
        assert_eq!(d.prob(Outcome::Plus, Outcome::Minus), 0.0);
        assert_eq!(d.prob(Outcome::Minus, Outcome::Plus), 0.0);
    }

    #[test]
    fn product_distribution_factorises() {
        let ra = PureState::normalized(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap().to_density();
        let rb = PureState::normalized(vec![C64::new(1.0, 0.0), C64::new(0.5, -0.5)]).unwrap().to_density();
        let prod = tensor_product(&ra, &rb).unwrap();
        let (a, b) = (DichotomicObservable::new(0.4), DichotomicObservable::new(-1.1));
        let d = joint_outcome_distribution(&prod, a, b).unwrap();
        for x in Outcome::BOTH {
            for y in Outcome::BOTH {
                let pa = ra.expectation(&a.projector(x));
                let pb = rb.expectation(&b.projector(y));
                assert!((d.prob(x, y) - pa * pb).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn maximally_mixed_is_uniform() {
        let d = joint_outcome_distribution(
            &DensityMatrix::maximally_mixed(4),
            DichotomicObservable::new(0.7),
            DichotomicObservable::new(2.0),
        )
        .unwrap();
        for v in d.table().iter().flatten() {
            assert!((v - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn wrong_dimension_is_rejected() {
        let z = DichotomicObservable::new(0.0);
        assert!(matches!(
            joint_outcome_distribution(&DensityMatrix::maximally_mixed(2), z, z),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(exact_chsh(&DensityMatrix::maximally_mixed(8), &ChshSettings::canonical()).is_err());
    }

    #[test]
    fn bell_zz_sampling_never_anticorrelates() {
        let z = DichotomicObservable::new(0.0);
        let bell = PureState::phi_plus().to_density();
        let mut rng = SeedStream::new(11).substream(0);
        for _ in 0..10_000 {
            let (x, y) = sample_round(&bell, z, z, &mut rng).unwrap();
            assert_eq!(x, y);
        }
    }

    #[test]
    fn seed_replay_is_identical() {
        let bell = PureState::phi_plus().to_density();
        let (a, b) = (DichotomicObservable::new(0.0), DichotomicObservable::new(FRAC_PI_4));
        let draw = |seed| {
            let mut rng = SeedStream::new(seed).substream(3);
            (0..1000).map(|_| sample_round(&bell, a, b, &mut rng).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(draw(5), draw(5));
        assert_ne!(draw(5), draw(6));
    }

    #[test]
    fn enumeration_gives_two() {
        assert_eq!(classical_strategy_max(), 2.0);
        let maxers = classical_maximizers();
        assert!(!maxers.is_empty());
        assert!(maxers.iter().all(|s| s.chsh_value() == 2.0));
        // Every deterministic strategy gives ±2: the four products multiply to −1.
        assert_eq!(maxers.len(), 16);
        let all_plus = DeterministicStrategy::from_signs([1, 1, 1, 1]).unwrap();
        assert!(maxers.contains(&all_plus));
    }

    #[test]
    fn estimate_invariant_recomputes_exp() {
        let est = estimate_chsh(
            &PureState::phi_plus().to_density(),
            &ChshSettings::canonical(),
            2000,
            &SeedStream::new(1),
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(est.exp, chsh_combination(&est.per_pair_means));
        assert!(est.per_pair_means.iter().all(|m| (-1.0..=1.0).contains(m)));
        assert_eq!(est.counts_per_pair, [2000; 4]);
    }

    #[test]
    fn zero_rounds_rejected() {
        let err = estimate_chsh(
            &DensityMatrix::maximally_mixed(4),
            &ChshSettings::canonical(),
            0,
            &SeedStream::new(1),
            Execution::Sequential,
        );
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn mixed_state_has_zero_chsh() {
        assert!(exact_chsh(&DensityMatrix::maximally_mixed(4), &ChshSettings::canonical()).unwrap() < 1e-15);
    }
}
