//! Experiment configuration: a TOML file overlaid by command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use nlsim_core::games::{ChshSettings, DeterministicStrategy};
use nlsim_core::qmath::{parse_matrix, DensityMatrix, PureState, RegisterLimits};
use serde::Deserialize;

use crate::error::{CliError, Result};

pub const DEFAULT_ROUNDS: u64 = 100_000;
pub const MAX_ROUNDS: u64 = 100_000_000;
pub const DEFAULT_ALPHA: f64 = 0.01;
pub const OUTPUT_DIR_ENV: &str = "NLSIM_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Chsh,
    Discriminate,
    Ctc,
    Entropy,
}

impl Experiment {
    pub const ALL: [Experiment; 4] = [Self::Chsh, Self::Discriminate, Self::Ctc, Self::Entropy];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Chsh => "chsh",
            Self::Discriminate => "discriminate",
            Self::Ctc => "ctc",
            Self::Entropy => "entropy",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| CliError::config(format!("unknown experiment `{s}`")))
    }
}

/// Shared two-qubit (or register) state the experiment runs on.
#[derive(Debug, Clone, PartialEq)]
pub enum StatePreset {
    Bell,
    Werner(f64),
    /// `|00⟩`.
    Product,
    Ghz(u32),
    File(PathBuf),
}

impl StatePreset {
    pub fn load(&self) -> Result<DensityMatrix> {
        Ok(match self {
            Self::Bell => PureState::phi_plus().to_density(),
            Self::Werner(p) => nlsim_core::channels::werner_state(*p)?,
            Self::Product => DensityMatrix::basis(4, 0),
            Self::Ghz(n) => PureState::ghz(*n).to_density(),
            Self::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                let m = parse_matrix(&text)?;
                RegisterLimits::default().check(m.rows())?;
                DensityMatrix::new(m)?
            }
        })
    }

    fn validate(&self) -> Result<()> {
        match self {
            Self::Werner(p) if !(0.0..=1.0).contains(p) => {
                Err(CliError::config(format!("werner parameter {p} outside [0, 1]")))
            }
            Self::Ghz(n) if *n < 2 || *n > RegisterLimits::default().max_qubits => Err(CliError::config(format!(
                "ghz register of {n} qubits outside 2..={}",
                RegisterLimits::default().max_qubits
            ))),
            Self::File(p) => check_path("state file", p),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for StatePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Bell => f.write_str("bell"),
            Self::Werner(p) => write!(f, "werner:{p}"),
            Self::Product => f.write_str("product"),
            Self::Ghz(n) => write!(f, "ghz:{n}"),
            Self::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl FromStr for StatePreset {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "bell" => Self::Bell,
            "product" => Self::Product,
            _ => {
                if let Some(p) = s.strip_prefix("werner:") {
                    Self::Werner(parse_f64("werner parameter", p)?)
                } else if let Some(n) = s.strip_prefix("ghz:") {
                    Self::Ghz(n.parse().map_err(|_| CliError::config(format!("bad ghz size `{n}`")))?)
                } else if let Some(p) = s.strip_prefix("file:") {
                    Self::File(PathBuf::from(p))
                } else if s.is_empty() {
                    return Err(CliError::config("empty state preset"));
                } else {
                    Self::File(PathBuf::from(s))
                }
            }
        })
    }
}

/// Second machine for `discriminate`; the first is always the separable pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Opponent {
    Monolithic,
    MonolithicPurified,
    Classical(DeterministicStrategy),
}

impl fmt::Display for Opponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Monolithic => f.write_str("monolithic"),
            Self::MonolithicPurified => f.write_str("monolithic-purified"),
            Self::Classical(s) => {
                f.write_str("classical:")?;
                for v in s.signs() {
                    f.write_str(if v > 0 { "+" } else { "-" })?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Opponent {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "monolithic" => Ok(Self::Monolithic),
            "monolithic-purified" => Ok(Self::MonolithicPurified),
            _ => {
                let bad = || CliError::config(format!("unknown opponent `{s}`"));
                let signs = s.strip_prefix("classical:").ok_or_else(bad)?;
                let v: Vec<i8> = signs
                    .chars()
                    .map(|c| match c {
                        '+' => Ok(1),
                        '-' => Ok(-1),
                        _ => Err(bad()),
                    })
                    .collect::<Result<_>>()?;
                let v: [i8; 4] = v.try_into().map_err(|_| bad())?;
                Ok(Self::Classical(DeterministicStrategy::from_signs(v)?))
            }
        }
    }
}

/// `[sweep]` table of a config file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub param: Option<String>,
    #[serde(default)]
    pub values: Option<Vec<toml::Value>>,
}

/// Raw settings. The same struct backs the config file and the flags; a
/// resolved [`ExperimentConfig`] is built from the overlay of the two.
#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Settings {
    #[arg(skip)]
    pub experiment: Option<String>,
    /// Master seed; drawn from OS entropy when omitted
    #[arg(long)]
    pub seed: Option<u64>,
    /// Rounds per setting pair
    #[arg(long)]
    pub rounds: Option<u64>,
    /// Significance level for discrimination
    #[arg(long)]
    pub alpha: Option<f64>,
    /// bell | werner:<p> | product | ghz:<n> | <matrix file>
    #[arg(long)]
    pub state: Option<String>,
    /// Decohering switch: on | off
    #[arg(long)]
    pub switch: Option<String>,
    /// Dephasing strength in [0, 1] when the switch is on
    #[arg(long)]
    pub strength: Option<f64>,
    /// Alice's two measurement angles, comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub angles_a: Option<Vec<f64>>,
    /// Bob's two measurement angles, comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub angles_b: Option<Vec<f64>>,
    /// monolithic | monolithic-purified | classical:<4 signs>
    #[arg(long)]
    pub against: Option<String>,
    /// Circuit file for `ctc`
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    /// Results file
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Worker threads for sampling
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(skip)]
    pub sweep: Option<SweepSection>,
}

impl Settings {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::config(format!("config file: {}", e.message())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Fields set in `self` win over `base`.
    pub fn overlay(self, base: Settings) -> Settings {
        Settings {
            experiment: self.experiment.or(base.experiment),
            seed: self.seed.or(base.seed),
            rounds: self.rounds.or(base.rounds),
            alpha: self.alpha.or(base.alpha),
            state: self.state.or(base.state),
            switch: self.switch.or(base.switch),
            strength: self.strength.or(base.strength),
            angles_a: self.angles_a.or(base.angles_a),
            angles_b: self.angles_b.or(base.angles_b),
            against: self.against.or(base.against),
            circuit: self.circuit.or(base.circuit),
            output: self.output.or(base.output),
            threads: self.threads.or(base.threads),
            sweep: self.sweep.or(base.sweep),
        }
    }
}

/// Everything that determines an experiment's result. The seed is always
/// concrete here, so echoing this struct is enough to re-run exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub rounds: u64,
    pub alpha: f64,
    pub state: StatePreset,
    pub switch_on: bool,
    pub strength: f64,
    pub angles_a: [f64; 2],
    pub angles_b: [f64; 2],
    pub against: Opponent,
    pub circuit: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, seed: u64) -> Self {
        let canonical = ChshSettings::canonical();
        Self {
            experiment,
            seed,
            rounds: DEFAULT_ROUNDS,
            alpha: DEFAULT_ALPHA,
            state: StatePreset::Bell,
            switch_on: false,
            strength: 1.0,
            angles_a: canonical.angles_a(),
            angles_b: canonical.angles_b(),
            against: Opponent::MonolithicPurified,
            circuit: None,
        }
    }

    /// Builds a validated config. A missing seed is drawn from OS entropy.
    pub fn from_settings(experiment: Experiment, s: &Settings) -> Result<Self> {
        let mut c = Self::new(experiment, s.seed.unwrap_or_else(rand::random));
        if let Some(r) = s.rounds {
            c.rounds = r;
        }
        if let Some(a) = s.alpha {
            c.alpha = a;
        }
        if let Some(st) = &s.state {
            c.state = st.parse()?;
        }
        if let Some(sw) = &s.switch {
            c.switch_on = parse_switch(sw)?;
        }
        if let Some(x) = s.strength {
            c.strength = x;
        }
        if let Some(a) = &s.angles_a {
            c.angles_a = angle_pair("angles-a", a)?;
        }
        if let Some(b) = &s.angles_b {
            c.angles_b = angle_pair("angles-b", b)?;
        }
        if let Some(o) = &s.against {
            c.against = o.parse()?;
        }
        c.circuit = s.circuit.clone();
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 || self.rounds > MAX_ROUNDS {
            return Err(CliError::config(format!("rounds {} outside 1..={MAX_ROUNDS}", self.rounds)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CliError::config(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.strength) {
            return Err(CliError::config(format!("strength {} outside [0, 1]", self.strength)));
        }
        if self.angles_a.iter().chain(&self.angles_b).any(|a| !a.is_finite()) {
            return Err(CliError::config("angles must be finite"));
        }
        self.state.validate()?;
        if let Some(p) = &self.circuit {
            check_path("circuit", p)?;
        }
        if self.experiment == Experiment::Ctc && self.circuit.is_none() {
            return Err(CliError::config("ctc needs --circuit"));
        }
        Ok(())
    }

    pub fn settings(&self) -> ChshSettings {
        ChshSettings::from_angles(self.angles_a, self.angles_b)
    }
}

pub fn parse_switch(s: &str) -> Result<bool> {
    match s {
        "on" => Ok(true),
        "off" => Ok(false),
        _ => Err(CliError::config(format!("switch must be `on` or `off`, got `{s}`"))),
    }
}

pub fn parse_f64(name: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::config(format!("{name}: `{s}` is not a finite number")))
}

fn angle_pair(name: &str, v: &[f64]) -> Result<[f64; 2]> {
    v.try_into()
        .map_err(|_| CliError::config(format!("{name} needs exactly two angles, got {}", v.len())))
}

fn check_path(name: &str, p: &Path) -> Result<()> {
    let s = p.to_string_lossy();
    if s.is_empty() || s.contains(['\t', '\n', '\r']) {
        return Err(CliError::config(format!("{name} path `{s}` is empty or has control characters")));
    }
    Ok(())
}

/// Where results go when `--output` is absent: `$NLSIM_OUTPUT_DIR` or the
/// working directory.
pub fn default_output(dir: Option<&Path>, stem: &str) -> PathBuf {
    dir.unwrap_or(Path::new(".")).join(format!("{stem}.tsv"))
}
