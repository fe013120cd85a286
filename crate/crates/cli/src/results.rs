//! Results table: tab-separated text with a versioned header.
//!
//! The first line is `# nlsim-results v1`, the second the tab-separated
//! column names in [`COLUMNS`]. Each row starts with the full config echo, followed by the metric
//! columns. A metric that does not apply to the row's experiment is an
//! empty field. Reals are written with Rust's shortest round-trip format.

use std::fmt::Display;
use std::path::PathBuf;
use std::str::FromStr;

use crate::config::{parse_switch, Experiment, ExperimentConfig};
use crate::error::{CliError, Result};

pub const RESULTS_MAGIC: &str = "# nlsim-results v1";

pub const COLUMNS: [&str; 25] = [
    "experiment",
    "seed",
    "rounds",
    "alpha",
    "state",
    "switch",
    "strength",
    "angles_a",
    "angles_b",
    "against",
    "circuit",
    "exp",
    "stderr",
    "exact_exp",
    "entangled",
    "violates",
    "certified",
    "p_value",
    "chi_square",
    "dof",
    "distinguished",
    "residual",
    "fixed_dim",
    "method",
    "entropy",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metrics {
    pub exp: Option<f64>,
    pub stderr: Option<f64>,
    pub exact_exp: Option<f64>,
    pub entangled: Option<bool>,
    /// Exact CHSH value of the measured state exceeds the classical bound.
    pub violates: Option<bool>,
    /// The estimate clears the classical bound by the certification margin.
    pub certified: Option<bool>,
    pub p_value: Option<f64>,
    pub chi_square: Option<f64>,
    pub dof: Option<usize>,
    pub distinguished: Option<bool>,
    pub residual: Option<f64>,
    pub fixed_dim: Option<usize>,
    pub method: Option<String>,
    pub entropy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub config: ExperimentConfig,
    pub metrics: Metrics,
}

fn opt<T: Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

fn pair(v: [f64; 2]) -> String {
    format!("{},{}", v[0], v[1])
}

impl ResultRow {
    pub fn fields(&self) -> Vec<String> {
        let c = &self.config;
        let m = &self.metrics;
        vec![
            c.experiment.to_string(),
            c.seed.to_string(),
            c.rounds.to_string(),
            c.alpha.to_string(),
            c.state.to_string(),
            if c.switch_on { "on" } else { "off" }.to_string(),
            c.strength.to_string(),
            pair(c.angles_a),
            pair(c.angles_b),
            c.against.to_string(),
            c.circuit.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
            opt(&m.exp),
            opt(&m.stderr),
            opt(&m.exact_exp),
            opt(&m.entangled),
            opt(&m.violates),
            opt(&m.certified),
            opt(&m.p_value),
            opt(&m.chi_square),
            opt(&m.dof),
            opt(&m.distinguished),
            opt(&m.residual),
            opt(&m.fixed_dim),
            opt(&m.method),
            opt(&m.entropy),
        ]
    }

    pub fn to_line(&self) -> String {
        self.fields().join("\t")
    }

    pub fn parse_line(line: &str) -> Result<Self> {
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != COLUMNS.len() {
            return Err(CliError::config(format!(
                "results row has {} fields, expected {}",
                f.len(),
                COLUMNS.len()
            )));
        }
        let experiment: Experiment = f[0].parse()?;
        let mut c = ExperimentConfig::new(experiment, field(f[1], "seed")?);
        c.rounds = field(f[2], "rounds")?;
        c.alpha = field(f[3], "alpha")?;
        c.state = f[4].parse()?;
        c.switch_on = parse_switch(f[5])?;
        c.strength = field(f[6], "strength")?;
        c.angles_a = parse_pair(f[7])?;
        c.angles_b = parse_pair(f[8])?;
        c.against = f[9].parse()?;
        c.circuit = (!f[10].is_empty()).then(|| PathBuf::from(f[10]));
        let metrics = Metrics {
            exp: opt_field(f[11], "exp")?,
            stderr: opt_field(f[12], "stderr")?,
            exact_exp: opt_field(f[13], "exact_exp")?,
            entangled: opt_field(f[14], "entangled")?,
            violates: opt_field(f[15], "violates")?,
            certified: opt_field(f[16], "certified")?,
            p_value: opt_field(f[17], "p_value")?,
            chi_square: opt_field(f[18], "chi_square")?,
            dof: opt_field(f[19], "dof")?,
            distinguished: opt_field(f[20], "distinguished")?,
            residual: opt_field(f[21], "residual")?,
            fixed_dim: opt_field(f[22], "fixed_dim")?,
            method: (!f[23].is_empty()).then(|| f[23].to_string()),
            entropy: opt_field(f[24], "entropy")?,
        };
        Ok(Self { config: c, metrics })
    }
}

fn field<T: FromStr>(s: &str, name: &str) -> Result<T> {
    s.parse()
        .map_err(|_| CliError::config(format!("results column {name}: cannot parse `{s}`")))
}

fn opt_field<T: FromStr>(s: &str, name: &str) -> Result<Option<T>> {
    if s.is_empty() {
        Ok(None)
    } else {
        field(s, name).map(Some)
    }
}

fn parse_pair(s: &str) -> Result<[f64; 2]> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| CliError::config(format!("angle pair `{s}` needs two values")))?;
    Ok([field(a, "angle")?, field(b, "angle")?])
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(RESULTS_MAGIC);
        out.push('\n');
        out.push_str(&COLUMNS.join("\t"));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.to_line());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(RESULTS_MAGIC) {
            return Err(CliError::config("results file lacks the version header"));
        }
        let header = lines.next().unwrap_or_default();
        if header.split('\t').ne(COLUMNS) {
            return Err(CliError::config("results file column header does not match"));
        }
        let rows = lines
            .filter(|l| !l.is_empty())
            .map(ResultRow::parse_line)
            .collect::<Result<_>>()?;
        Ok(Self { rows })
    }
}
