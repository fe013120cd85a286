use rand::Rng;

use super::machine::{monolithic_distribution, LocalSampler, MachineKind, MachineSpec};
use super::transcript::{MachineLabel, RoundRecord, Transcript};
use crate::channels::DecoherenceSwitch;
use crate::error::{Error, Result};
use crate::games::{ChshSettings, DeterministicStrategy, JointDistribution, Outcome, SettingPair};
use crate::qmath::DensityMatrix;
use crate::rng::{map_blocks, Execution, SeedStream};

/// How each setting pair's answers are drawn for a prepared machine.
enum Sampler {
    Local([LocalSampler; 4]),
    Joint([JointDistribution; 4]),
    Classical(Vec<(f64, DeterministicStrategy)>),
}

fn per_pair<T>(f: impl Fn(SettingPair) -> Result<T>) -> Result<[T; 4]> {
    let [p0, p1, p2, p3] = SettingPair::ALL;
    Ok([f(p0)?, f(p1)?, f(p2)?, f(p3)?])
}

fn draw_outcome<R: Rng + ?Sized>(p_plus: f64, rng: &mut R) -> Outcome {
    let u: f64 = rng.random();
    if u < p_plus {
        Outcome::Plus
    } else {
        Outcome::Minus
    }
}

impl Sampler {
    fn prepare(machine: &MachineSpec, switch: DecoherenceSwitch, settings: &ChshSettings) -> Result<Self> {
        match machine {
            MachineSpec::SeparableProvers { shared } => {
                let shared = switch.channel(2).apply(shared)?;
                Ok(Sampler::Local(per_pair(|p| {
                    let (a, b) = settings.observables(p);
                    LocalSampler::new(&shared, a, b)
                })?))
            }
            MachineSpec::Monolithic { global } => {
                let global = switch
                    .channel(2)
                    .on_left_of(global.dim() / 4)
                    .apply(global)?;
                Ok(Sampler::Joint(per_pair(|p| {
                    let (a, b) = settings.observables(p);
                    monolithic_distribution(&global, a, b)
                })?))
            }
            MachineSpec::ClassicalCorrelated { mixture } => Ok(Sampler::Classical(mixture.clone())),
        }
    }

    fn answer<R: Rng + ?Sized>(&self, pair: SettingPair, rng: &mut R) -> (Outcome, Outcome) {
        let k = pair.ordinal();
        match self {
            Sampler::Local(s) => {
                let s = &s[k];
                let x = draw_outcome(s.a_marginal[0], rng);
                let y = draw_outcome(s.b_conditional[x.index()][0], rng);
                (x, y)
            }
            Sampler::Joint(d) => d[k].sample(rng),
            Sampler::Classical(mixture) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut chosen = &mixture[mixture.len() - 1].1;
                for (w, s) in mixture {
                    acc += w;
                    if u < acc {
                        chosen = s;
                        break;
                    }
                }
                chosen.answers(pair)
            }
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Label derived from seed and kind; stable, but not readable as a kind.
pub fn opaque_label(seed: u64, kind: MachineKind) -> MachineLabel {
    let salt = match kind {
        MachineKind::SeparableProvers => 0x5e9a_ab1e,
        MachineKind::Monolithic => 0x3010_1171,
        MachineKind::ClassicalCorrelated => 0xc1a5_51ca,
    };
    MachineLabel(format!("{:016x}", splitmix64(seed ^ splitmix64(salt))))
}

/// Runs `rounds` verifier rounds, cycling the four setting pairs in
/// [`SettingPair::ALL`] order. Block `b` of rounds draws from substream `(0, b)`.
pub fn run_protocol(
    machine: &MachineSpec,
    switch: DecoherenceSwitch,
    settings: &ChshSettings,
    rounds: usize,
    seeds: &SeedStream,
    exec: Execution,
) -> Result<Transcript> {
    if rounds == 0 {
        return Err(Error::Precondition("a protocol run needs at least one round".into()));
    }
    let sampler = Sampler::prepare(machine, switch, settings)?;
    let hdec_on = switch.is_on();
    let records = map_blocks(rounds, exec, |block, start, len| {
        let mut rng = seeds.block(0, block);
        (start..start + len)
            .map(|i| {
                let question = SettingPair::ALL[i % 4];
                let (answer_a, answer_b) = sampler.answer(question, &mut rng);
                RoundRecord {
                    round_index: i as u64,
                    question,
                    answer_a,
                    answer_b,
                    hdec_on,
                }
            })
            .collect()
    });
    Transcript::new(
        opaque_label(seeds.master(), machine.kind()),
        records,
        seeds.master(),
        *settings,
        switch.strength(),
    )
}

/// Largest cell difference, over all setting pairs, between the exact answer
/// distribution of the local sampling path and of the joint (monolithic)
/// sampling path on the same measured pair.
pub fn marginal_equivalence_check(spec: &MachineSpec, settings: &ChshSettings) -> Result<f64> {
    let (pair, global): (DensityMatrix, DensityMatrix) = match spec {
        MachineSpec::SeparableProvers { shared } => (shared.clone(), shared.clone()),
        MachineSpec::Monolithic { global } => (spec.pair_state()?, global.clone()),
        MachineSpec::ClassicalCorrelated { .. } => {
            return Err(Error::InvalidMachine(
                "marginal equivalence is defined for quantum machines".into(),
            ))
        }
    };
    let mut worst = 0.0f64;
    for p in SettingPair::ALL {
        let (a, b) = settings.observables(p);
        let local = LocalSampler::new(&pair, a, b)?.joint()?;
        let joint = monolithic_distribution(&global, a, b)?;
        worst = worst.max(local.max_abs_diff(&joint));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::werner_state;
    use crate::qmath::PureState;

    #[test]
    fn canonical_equivalence_is_exact() {
        let bell = MachineSpec::separable(PureState::phi_plus().to_density()).unwrap();
        assert!(marginal_equivalence_check(&bell, &ChshSettings::canonical()).unwrap() <= 1e-12);
        let w = MachineSpec::separable(werner_state(0.8).unwrap()).unwrap();
        assert!(marginal_equivalence_check(&w, &ChshSettings::canonical()).unwrap() <= 1e-12);
        let purified = MachineSpec::monolithic_purified(&werner_state(0.8).unwrap()).unwrap();
        assert!(marginal_equivalence_check(&purified, &ChshSettings::canonical()).unwrap() <= 1e-12);
    }

    #[test]
    fn classical_machine_has_no_equivalence_check() {
        let s = DeterministicStrategy::from_signs([1, 1, 1, 1]).unwrap();
        assert!(marginal_equivalence_check(&MachineSpec::deterministic(s), &ChshSettings::canonical()).is_err());
    }

    #[test]
    fn labels_differ_by_kind() {
        let a = opaque_label(1, MachineKind::SeparableProvers);
        let b = opaque_label(1, MachineKind::Monolithic);
        assert_ne!(a, b);
        assert_eq!(a.0.len(), 16);
    }

    #[test]
    fn zero_rounds_rejected() {
        let m = MachineSpec::separable(PureState::phi_plus().to_density()).unwrap();
        let r = run_protocol(&m, DecoherenceSwitch::off(), &ChshSettings::canonical(), 0, &SeedStream::new(0), Execution::Sequential);
        assert!(r.is_err());
    }
}
