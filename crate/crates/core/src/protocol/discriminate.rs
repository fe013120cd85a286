//! Two-sample tests on transcripts and the verifier's certification rule.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::transcript::Transcript;
use crate::error::{Error, Result};
use crate::games::{ChshEstimate, CLASSICAL_BOUND};

/// Default significance level.
pub const DEFAULT_ALPHA: f64 = 0.01;
/// Minimum expected count per cell; sparser cells are merged.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Indistinguishable,
    Distinguished,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscriminationVerdict {
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    pub decision: Decision,
    pub alpha: f64,
}

/// Pearson homogeneity statistic for a 2×K table, merging sparse columns.
///
/// Columns whose smaller expected count falls below [`MIN_EXPECTED`] are
/// repeatedly merged, smallest first, into the next smallest column. Empty
/// columns are dropped. Returns `(χ², df)`; a table with fewer than two
/// usable columns carries no information and yields `(0, 0)`.
pub fn chi_square_homogeneity(first: &[u64], second: &[u64]) -> (f64, usize) {
    assert_eq!(first.len(), second.len(), "row lengths differ");
    let r1: u64 = first.iter().sum();
    let r2: u64 = second.iter().sum();
    if r1 == 0 || r2 == 0 {
        return (0.0, 0);
    }
    let n = (r1 + r2) as f64;
    let min_row = r1.min(r2) as f64;

    let mut cols: Vec<(u64, u64)> = first
        .iter()
        .zip(second)
        .map(|(&a, &b)| (a, b))
        .filter(|&(a, b)| a + b > 0)
        .collect();
    loop {
        cols.sort_by_key(|&(a, b)| a + b);
        let sparse = cols
            .first()
            .is_some_and(|&(a, b)| min_row * (a + b) as f64 / n < MIN_EXPECTED);
        if cols.len() < 2 || !sparse {
            break;
        }
        let (a, b) = cols.remove(0);
        cols[0].0 += a;
        cols[0].1 += b;
    }
    if cols.len() < 2 {
        return (0.0, 0);
    }
    let mut stat = 0.0;
    for &(a, b) in &cols {
        let c = (a + b) as f64;
        for (obs, row) in [(a, r1), (b, r2)] {
            let e = row as f64 * c / n;
            stat += (obs as f64 - e).powi(2) / e;
        }
    }
    (stat, cols.len() - 1)
}

/// Upper tail of the χ² distribution.
pub fn chi_square_p_value(stat: f64, dof: usize) -> f64 {
    if dof == 0 || stat <= 0.0 {
        return 1.0;
    }
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    dist.sf(stat).clamp(0.0, 1.0)
}

fn switch_schedules_match(t1: &Transcript, t2: &Transcript) -> bool {
    if t1.rounds().len() == t2.rounds().len() {
        return t1
            .rounds()
            .iter()
            .zip(t2.rounds())
            .all(|(a, b)| a.hdec_on == b.hdec_on);
    }
    matches!((t1.constant_hdec(), t2.constant_hdec()), (Some(a), Some(b)) if a == b)
}

/// Stratified two-sample χ² test: one 2×4 outcome table per setting pair,
/// statistics and degrees of freedom summed across pairs.
pub fn discriminate(t1: &Transcript, t2: &Transcript, alpha: f64) -> Result<DiscriminationVerdict> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            range: "(0, 1)",
        });
    }
    let same_angles = t1.settings().angles_a().map(f64::to_bits) == t2.settings().angles_a().map(f64::to_bits)
        && t1.settings().angles_b().map(f64::to_bits) == t2.settings().angles_b().map(f64::to_bits);
    if !same_angles {
        return Err(Error::IncomparableTranscripts("measurement settings differ".into()));
    }
    if !switch_schedules_match(t1, t2) || t1.hdec_strength().to_bits() != t2.hdec_strength().to_bits() {
        return Err(Error::IncomparableTranscripts("switch schedules differ".into()));
    }
    let (c1, c2) = (t1.contingency(), t2.contingency());
    let (mut chi_square, mut degrees_of_freedom) = (0.0, 0);
    for (row1, row2) in c1.iter().zip(&c2) {
        let (s, d) = chi_square_homogeneity(row1, row2);
        chi_square += s;
        degrees_of_freedom += d;
    }
    let p_value = chi_square_p_value(chi_square, degrees_of_freedom);
    let decision = if p_value < alpha {
        Decision::Distinguished
    } else {
        Decision::Indistinguishable
    };
    Ok(DiscriminationVerdict {
        chi_square,
        degrees_of_freedom,
        p_value,
        decision,
        alpha,
    })
}

/// What the verifier may conclude from a transcript. There is deliberately
/// no variant certifying separability: no transcript statistic can.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparabilityClaim {
    CannotCertify,
    /// The data violate the classical bound, so the provers share a quantum
    /// channel. Says nothing about whether they are separable.
    ChannelCertified,
}

/// Margin, in standard errors, by which the estimate must clear 2.
pub const CERTIFY_SIGMAS: f64 = 5.0;

pub fn claim_from_estimate(est: &ChshEstimate) -> SeparabilityClaim {
    if est.exp - CERTIFY_SIGMAS * est.stderr > CLASSICAL_BOUND {
        SeparabilityClaim::ChannelCertified
    } else {
        SeparabilityClaim::CannotCertify
    }
}

pub fn verifier_separability_claim(t: &Transcript) -> SeparabilityClaim {
    claim_from_estimate(&t.chsh_estimate())
}
