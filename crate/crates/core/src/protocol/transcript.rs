//! The verifier's record of a run and its text serialisation.
//!
//! ```text
//! # nlsim-transcript v1
//! # machine 3f2a9c0d1b7e4a65
//! # seed 42
//! # angles-a 0 1.5707963267948966
//! # angles-b 0.7853981633974483 -0.7853981633974483
//! # hdec-strength 1
//! round,qa,qb,a,b,hdec
//! 0,1,1,1,1,0
//! 1,1,2,-1,1,0
//! ```
//!
//! Angles are written with the shortest representation that parses back to
//! the same `f64`, so a transcript round-trips bit-exactly.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::games::{ChshEstimate, ChshSettings, Outcome, PairTally, SettingPair};

pub const TRANSCRIPT_MAGIC: &str = "# nlsim-transcript v1";
const COLUMNS: &str = "round,qa,qb,a,b,hdec";

/// One question/answer exchange.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundRecord {
    pub round_index: u64,
    pub question: SettingPair,
    pub answer_a: Outcome,
    pub answer_b: Outcome,
    pub hdec_on: bool,
}

/// Label that does not reveal the machine kind.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MachineLabel(pub String);

/// Everything the verifier observes in one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    machine_label: MachineLabel,
    rounds: Vec<RoundRecord>,
    master_seed: u64,
    settings: ChshSettings,
    hdec_strength: f64,
}

impl Transcript {
    pub fn new(
        machine_label: MachineLabel,
        rounds: Vec<RoundRecord>,
        master_seed: u64,
        settings: ChshSettings,
        hdec_strength: f64,
    ) -> Result<Self> {
        if rounds.is_empty() {
            return Err(Error::Precondition("a transcript needs at least one round".into()));
        }
        if rounds.windows(2).any(|w| w[1].round_index <= w[0].round_index) {
            return Err(Error::Precondition("round indices must strictly increase".into()));
        }
        Ok(Self {
            machine_label,
            rounds,
            master_seed,
            settings,
            hdec_strength,
        })
    }

    pub fn machine_label(&self) -> &MachineLabel {
        &self.machine_label
    }

    pub fn rounds(&self) -> &[RoundRecord] {
        &self.rounds
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn settings(&self) -> &ChshSettings {
        &self.settings
    }

    pub fn hdec_strength(&self) -> f64 {
        self.hdec_strength
    }

    /// Outcome counts `[pair ordinal][cell]`, cells ordered (+,+), (+,−), (−,+), (−,−).
    pub fn contingency(&self) -> [[u64; 4]; 4] {
        let mut t = [[0u64; 4]; 4];
        for r in &self.rounds {
            t[r.question.ordinal()][r.answer_a.index() * 2 + r.answer_b.index()] += 1;
        }
        t
    }

    pub fn chsh_estimate(&self) -> ChshEstimate {
        let mut tallies = [PairTally::default(); 4];
        for r in &self.rounds {
            tallies[r.question.ordinal()].record(r.answer_a, r.answer_b);
        }
        ChshEstimate::from_tallies(&tallies)
    }

    /// `Some(flag)` if every round has the same switch setting.
    pub fn constant_hdec(&self) -> Option<bool> {
        let first = self.rounds[0].hdec_on;
        self.rounds.iter().all(|r| r.hdec_on == first).then_some(first)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(32 + self.rounds.len() * 16);
        let [a1, a2] = self.settings.angles_a();
        let [b1, b2] = self.settings.angles_b();
        writeln!(out, "{TRANSCRIPT_MAGIC}").unwrap();
        writeln!(out, "# machine {}", self.machine_label.0).unwrap();
        writeln!(out, "# seed {}", self.master_seed).unwrap();
        writeln!(out, "# angles-a {a1} {a2}").unwrap();
        writeln!(out, "# angles-b {b1} {b2}").unwrap();
        writeln!(out, "# hdec-strength {}", self.hdec_strength).unwrap();
        writeln!(out, "{COLUMNS}").unwrap();
        for r in &self.rounds {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.round_index,
                r.question.a_index(),
                r.question.b_index(),
                r.answer_a.value(),
                r.answer_b.value(),
                u8::from(r.hdec_on)
            )
            .unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut expect_header = |key: &str| -> Result<(usize, String)> {
            let (n, line) = lines.next().ok_or(Error::Parse {
                line: 0,
                message: format!("missing {key:?} header"),
            })?;
            let value = line.strip_prefix(key).ok_or_else(|| Error::Parse {
                line: n,
                message: format!("expected {key:?}"),
            })?;
            Ok((n, value.trim().to_string()))
        };
        expect_header(TRANSCRIPT_MAGIC)?;
        let (_, label) = expect_header("# machine ")?;
        let (n, seed) = expect_header("# seed ")?;
        let master_seed = seed.parse().map_err(|e| Error::Parse {
            line: n,
            message: format!("bad seed: {e}"),
        })?;
        let (n, aa) = expect_header("# angles-a ")?;
        let angles_a = parse_pair(&aa, n)?;
        let (n, ab) = expect_header("# angles-b ")?;
        let angles_b = parse_pair(&ab, n)?;
        let (n, hs) = expect_header("# hdec-strength ")?;
        let hdec_strength = hs.parse().map_err(|e| Error::Parse {
            line: n,
            message: format!("bad strength: {e}"),
        })?;
        expect_header(COLUMNS)?;

        let mut rounds = Vec::new();
        for (n, line) in lines {
            if line.is_empty() {
                continue;
            }
            rounds.push(parse_round(line, n)?);
        }
        Self::new(
            MachineLabel(label),
            rounds,
            master_seed,
            ChshSettings::from_angles(angles_a, angles_b),
            hdec_strength,
        )
    }
}

fn parse_pair(s: &str, line: usize) -> Result<[f64; 2]> {
    let v: Vec<f64> = s
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse {
            line,
            message: format!("bad angle: {e}"),
        })?;
    let [x, y] = v[..] else {
        return Err(Error::Parse {
            line,
            message: "expected two angles".into(),
        });
    };
    Ok([x, y])
}

fn parse_round(line: &str, n: usize) -> Result<RoundRecord> {
    let bad = |m: &str| Error::Parse {
        line: n,
        message: m.to_string(),
    };
    let f: Vec<&str> = line.split(',').collect();
    if f.len() != 6 {
        return Err(bad("expected 6 comma-separated fields"));
    }
    let round_index = f[0].parse().map_err(|_| bad("bad round index"))?;
    let qa = f[1].parse().map_err(|_| bad("bad question"))?;
    let qb = f[2].parse().map_err(|_| bad("bad question"))?;
    let question = SettingPair::new(qa, qb).map_err(|_| bad("question out of range"))?;
    let answer = |s: &str| {
        s.parse::<i8>()
            .ok()
            .and_then(Outcome::from_value)
            .ok_or_else(|| bad("answer must be 1 or -1"))
    };
    let hdec_on = match f[5] {
        "0" => false,
        "1" => true,
        _ => return Err(bad("hdec must be 0 or 1")),
    };
    Ok(RoundRecord {
        round_index,
        question,
        answer_a: answer(f[3])?,
        answer_b: answer(f[4])?,
        hdec_on,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Transcript {
        let rounds = (0..8)
            .map(|i| RoundRecord {
                round_index: i,
                question: SettingPair::ALL[i as usize % 4],
                answer_a: if i % 3 == 0 { Outcome::Minus } else { Outcome::Plus },
                answer_b: Outcome::Plus,
                hdec_on: true,
            })
            .collect();
        Transcript::new(MachineLabel("abc".into()), rounds, 9, ChshSettings::canonical(), 0.3).unwrap()
    }

    #[test]
    fn empty_and_unordered_rejected() {
        let t = sample();
        assert!(Transcript::new(t.machine_label.clone(), vec![], 0, t.settings, 1.0).is_err());
        let mut rounds = t.rounds.clone();
        rounds.swap(0, 1);
        assert!(Transcript::new(t.machine_label.clone(), rounds, 0, t.settings, 1.0).is_err());
    }

    #[test]
    fn text_round_trip() {
        let t = sample();
        let text = t.to_text();
        assert!(text.starts_with(TRANSCRIPT_MAGIC));
        assert_eq!(Transcript::from_text(&text).unwrap(), t);
    }

    #[test]
    fn malformed_rows_report_line() {
        let mut text = sample().to_text();
        text.push_str("8,3,1,1,1,1\n");
        match Transcript::from_text(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 16),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn contingency_counts() {
        let t = sample();
        let c = t.contingency();
        assert_eq!(c.iter().flatten().sum::<u64>(), 8);
        // Rounds 0 and 4 use pair (1,1); round 0 answers (−,+), round 4 (+,+).
        assert_eq!(c[0], [1, 0, 1, 0]);
        assert_eq!(t.constant_hdec(), Some(true));
    }
}
