//! Dispatch from a resolved config to the simulator.

use std::fmt;
use std::str::FromStr;

use nlsim_core::channels::DecoherenceSwitch;
use nlsim_core::ctc::{parse_circuit_file, solve_fixed_point};
use nlsim_core::games::{estimate_chsh, exact_chsh, CLASSICAL_BOUND};
use nlsim_core::protocol::{
    claim_from_estimate, discriminate, run_protocol, verifier_separability_claim, Decision, MachineSpec,
    SeparabilityClaim,
};
use nlsim_core::qmath::{dump_matrix, is_entangled_2q, max_entanglement_entropy, DensityMatrix};
use nlsim_core::{Execution, SeedStream};
use rand::Rng;

use crate::config::{parse_f64, Experiment, ExperimentConfig, Opponent, StatePreset};
use crate::error::{CliError, Result};
use crate::results::{Metrics, ResultRow, ResultTable};

/// Exact CHSH values within this of the classical bound do not count as violations.
pub const VIOLATION_TOL: f64 = 1e-12;

/// Entanglement entropy (nats) above which a pure state counts as entangled.
pub const ENTROPY_TOL: f64 = 1e-10;

/// A file written next to the results table, named `<stem>.<suffix>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub suffix: &'static str,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub row: ResultRow,
    pub artifacts: Vec<Artifact>,
}

pub fn run(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let (metrics, artifacts) = match config.experiment {
        Experiment::Chsh => (run_chsh(config)?, Vec::new()),
        Experiment::Discriminate => run_discriminate(config)?,
        Experiment::Ctc => run_ctc(config)?,
        Experiment::Entropy => (run_entropy(config)?, Vec::new()),
    };
    Ok(Report {
        row: ResultRow {
            config: config.clone(),
            metrics,
        },
        artifacts,
    })
}

fn pair_state(config: &ExperimentConfig) -> Result<DensityMatrix> {
    let rho = config.state.load()?;
    if rho.dim() != 4 {
        return Err(CliError::config(format!(
            "{} needs a two-qubit state, `{}` has dimension {}",
            config.experiment,
            config.state,
            rho.dim()
        )));
    }
    Ok(rho)
}

fn switch(config: &ExperimentConfig) -> Result<DecoherenceSwitch> {
    Ok(DecoherenceSwitch::new(config.switch_on, config.strength)?)
}

fn run_chsh(config: &ExperimentConfig) -> Result<Metrics> {
    let measured = switch(config)?.channel(2).apply(&pair_state(config)?)?;
    let settings = config.settings();
    let est = estimate_chsh(
        &measured,
        &settings,
        config.rounds as usize,
        &SeedStream::new(config.seed),
        Execution::Parallel,
    )?;
    let exact = exact_chsh(&measured, &settings)?;
    Ok(Metrics {
        exp: Some(est.exp),
        stderr: Some(est.stderr),
        exact_exp: Some(exact),
        entangled: Some(is_entangled_2q(&measured)?),
        violates: Some(exact > CLASSICAL_BOUND + VIOLATION_TOL),
        certified: Some(claim_from_estimate(&est) == SeparabilityClaim::ChannelCertified),
        ..Metrics::default()
    })
}

fn run_discriminate(config: &ExperimentConfig) -> Result<(Metrics, Vec<Artifact>)> {
    let rho = pair_state(config)?;
    let first = MachineSpec::separable(rho.clone())?;
    let second = match config.against {
        Opponent::Monolithic => MachineSpec::monolithic(rho.clone())?,
        Opponent::MonolithicPurified => MachineSpec::monolithic_purified(&rho)?,
        Opponent::Classical(s) => MachineSpec::deterministic(s),
    };
    let sw = switch(config)?;
    let settings = config.settings();
    let master = SeedStream::new(config.seed);
    let total = config.rounds as usize * 4;
    let transcript = |machine: &MachineSpec, stream: u64| {
        let seed = master.substream(stream).random::<u64>();
        run_protocol(machine, sw, &settings, total, &SeedStream::new(seed), Execution::Parallel)
    };
    let t1 = transcript(&first, 1)?;
    let t2 = transcript(&second, 2)?;
    let verdict = discriminate(&t1, &t2, config.alpha)?;
    let est = t1.chsh_estimate();
    let measured = sw.channel(2).apply(&rho)?;
    let exact = exact_chsh(&measured, &settings)?;
    let metrics = Metrics {
        exp: Some(est.exp),
        stderr: Some(est.stderr),
        exact_exp: Some(exact),
        entangled: Some(is_entangled_2q(&measured)?),
        violates: Some(exact > CLASSICAL_BOUND + VIOLATION_TOL),
        certified: Some(verifier_separability_claim(&t1) == SeparabilityClaim::ChannelCertified),
        p_value: Some(verdict.p_value),
        chi_square: Some(verdict.chi_square),
        dof: Some(verdict.degrees_of_freedom),
        distinguished: Some(verdict.decision == Decision::Distinguished),
        ..Metrics::default()
    };
    let artifacts = vec![
        Artifact {
            suffix: "t1.transcript",
            contents: t1.to_text(),
        },
        Artifact {
            suffix: "t2.transcript",
            contents: t2.to_text(),
        },
    ];
    Ok((metrics, artifacts))
}

fn run_ctc(config: &ExperimentConfig) -> Result<(Metrics, Vec<Artifact>)> {
    let path = config.circuit.as_ref().ok_or_else(|| CliError::config("ctc needs --circuit"))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let file = parse_circuit_file(&text)?;
    let fp = solve_fixed_point(&file.circuit, &file.rho_in)?;
    let metrics = Metrics {
        residual: Some(fp.residual),
        fixed_dim: Some(fp.fixed_subspace_dim),
        method: Some(fp.method.name().to_string()),
        ..Metrics::default()
    };
    let rho = Artifact {
        suffix: "rho.txt",
        contents: dump_matrix(fp.rho.matrix()),
    };
    Ok((metrics, vec![rho]))
}

fn run_entropy(config: &ExperimentConfig) -> Result<Metrics> {
    let rho = config.state.load()?;
    let entropy = max_entanglement_entropy(&rho)?;
    Ok(Metrics {
        entangled: Some(entropy > ENTROPY_TOL),
        entropy: Some(entropy),
        ..Metrics::default()
    })
}

/// Numeric fields a sweep may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// Werner mixing parameter; replaces the state preset.
    P,
    Strength,
    Rounds,
    Alpha,
    Seed,
    AngleA1,
    AngleA2,
    AngleB1,
    AngleB2,
}

impl SweepParam {
    pub const ALL: [SweepParam; 9] = [
        Self::P,
        Self::Strength,
        Self::Rounds,
        Self::Alpha,
        Self::Seed,
        Self::AngleA1,
        Self::AngleA2,
        Self::AngleB1,
        Self::AngleB2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::P => "p",
            Self::Strength => "strength",
            Self::Rounds => "rounds",
            Self::Alpha => "alpha",
            Self::Seed => "seed",
            Self::AngleA1 => "angle-a1",
            Self::AngleA2 => "angle-a2",
            Self::AngleB1 => "angle-b1",
            Self::AngleB2 => "angle-b2",
        }
    }

    /// Returns a copy of `base` with this field set to `value`.
    pub fn apply(&self, base: &ExperimentConfig, value: &str) -> Result<ExperimentConfig> {
        let mut c = base.clone();
        let real = || parse_f64(self.name(), value);
        let int = || {
            value
                .trim()
                .parse::<u64>()
                .map_err(|_| CliError::config(format!("{}: `{value}` is not a non-negative integer", self.name())))
        };
        match self {
            Self::P => c.state = StatePreset::Werner(real()?),
            Self::Strength => c.strength = real()?,
            Self::Rounds => c.rounds = int()?,
            Self::Alpha => c.alpha = real()?,
            Self::Seed => c.seed = int()?,
            Self::AngleA1 => c.angles_a[0] = real()?,
            Self::AngleA2 => c.angles_a[1] = real()?,
            Self::AngleB1 => c.angles_b[0] = real()?,
            Self::AngleB2 => c.angles_b[1] = real()?,
        }
        c.validate()?;
        Ok(c)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let known: Vec<_> = Self::ALL.iter().map(|p| p.name()).collect();
            CliError::config(format!("unknown sweep parameter `{s}` (expected one of {})", known.join(", ")))
        })
    }
}

/// One row per value, in the order given. All values are checked before
/// anything runs. Per-row artifacts are not written.
pub fn sweep(base: &ExperimentConfig, param: SweepParam, values: &[String]) -> Result<ResultTable> {
    let configs = values
        .iter()
        .map(|v| param.apply(base, v))
        .collect::<Result<Vec<_>>>()?;
    let rows = configs
        .iter()
        .map(|c| run(c).map(|r| r.row))
        .collect::<Result<_>>()?;
    Ok(ResultTable { rows })
}
