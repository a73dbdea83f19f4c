//! Exhaustive constraint search for firing patterns consistent with the
//! published first-order and METC tables.
//!
//! The space searched: zero-position sets `P` of size 4 that are invariant
//! under some shift `k`, every `+1/-1` assignment of `A` and `B` on the
//! eight active positions, and every such `k`. That is 21 `(P, k)` pairs
//! times `2^16` sign assignments, about 1.4 million systems.

use std::cmp::Reverse;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::harness::{run_paper_tables_with, HarnessOptions};
use super::system::{build_system, rotate, NeuronSystem, Pattern, PATTERN_LEN};
use super::targets::{
    first_order_mi_closed_form, MI_TOLERANCE, PAIRS, TABLE1_METC, TABLE2_METC, TABLE_TOLERANCE,
};
use crate::error::Result;
use crate::etc::metc;
use crate::infotheory::{entropy, mutual_information, LogBase};
use crate::symbolic::{pearson_correlation, SymbolSequence};

/// Inactive instants per pattern; forced by `p(0) = 1/3`.
const ZERO_COUNT: usize = 4;

/// A system that passes every first-order target, with its METC cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub system: NeuronSystem,
    /// METC for `(X1,X2), (X1,X3), (X2,X3)`.
    pub metc: [f64; 3],
    /// Same pairs on the primed (zero-free) series.
    pub metc_primed: [f64; 3],
    /// How many of the six METC cells hit their target within tolerance.
    pub metc_matches: usize,
    /// Harness checks failed without surrogate testing, downgraded ones
    /// included; only scored for the best METC tier.
    pub checks_failed: Option<usize>,
}

impl Candidate {
    pub fn exact(&self) -> bool {
        self.metc_matches == 6
    }
}

/// Summary of a search run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub search_space_size: usize,
    pub first_order_matches: usize,
    /// Candidates ranked by METC matches, then fewest harness checks failed, then
    /// enumeration order.
    pub candidates: Vec<Candidate>,
}

impl SearchReport {
    pub fn best(&self) -> Option<&Candidate> {
        self.candidates.first()
    }
}

/// `(P, k)` pairs in lexicographic order of `P`, then `k`.
fn zero_sets() -> Vec<(Vec<usize>, usize)> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << PATTERN_LEN) {
        if mask.count_ones() as usize != ZERO_COUNT {
            continue;
        }
        let set: Vec<usize> = (0..PATTERN_LEN).filter(|i| mask & (1 << i) != 0).collect();
        for k in 1..PATTERN_LEN {
            if set
                .iter()
                .all(|&i| mask & (1 << ((i + k) % PATTERN_LEN)) != 0)
            {
                out.push((set.clone(), k));
            }
        }
    }
    out.sort();
    out
}

/// Pattern with zeros on `zeros` and signs from `bits` on the rest; bit `j`
/// set means the `j`-th active position fires `+1`.
fn pattern(zeros: &[usize], bits: u32) -> Pattern {
    let mut p = [0i8; PATTERN_LEN];
    let mut j = 0;
    for (i, v) in p.iter_mut().enumerate() {
        if !zeros.contains(&i) {
            *v = if bits & (1 << j) != 0 { 1 } else { -1 };
            j += 1;
        }
    }
    p
}

fn near(v: f64, target: f64, tol: f64) -> bool {
    (v - target).abs() <= tol
}

fn pair_metc(x: &[SymbolSequence; 3]) -> Result<[f64; 3]> {
    let mut out = [0.0; 3];
    for (o, (i, j)) in out.iter_mut().zip(PAIRS) {
        *o = metc(&x[i], &x[j])?;
    }
    Ok(out)
}

/// Every first-order cell of both tables: correlation, MI, primed MI and
/// primed entropies.
pub fn first_order_targets_hold(system: &NeuronSystem) -> Result<bool> {
    let x = system.sequences()?;
    let labels = system.labels();
    let mi_target = first_order_mi_closed_form();
    for (i, j) in PAIRS {
        let li: Vec<f64> = labels[i].iter().map(|&v| v as f64).collect();
        let lj: Vec<f64> = labels[j].iter().map(|&v| v as f64).collect();
        if !near(pearson_correlation(&li, &lj)?, 0.0, 1e-9) {
            return Ok(false);
        }
        if !near(
            mutual_information(&x[i], &x[j], LogBase::Two)?,
            mi_target,
            MI_TOLERANCE,
        ) {
            return Ok(false);
        }
    }
    let p = system.primed()?;
    for (i, j) in PAIRS {
        if !near(mutual_information(&p[i], &p[j], LogBase::Two)?, 0.0, 1e-12) {
            return Ok(false);
        }
    }
    for s in &p[1..] {
        if !near(entropy(s, LogBase::Two)?, 1.0, 1e-12) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Scores one system that already passed the first-order filter.
pub fn score(system: NeuronSystem) -> Result<Candidate> {
    let metc = pair_metc(&system.sequences()?)?;
    let metc_primed = pair_metc(&system.primed()?)?;
    let metc_matches = metc
        .iter()
        .zip(TABLE1_METC)
        .chain(metc_primed.iter().zip(TABLE2_METC))
        .filter(|(&v, t)| near(v, *t, TABLE_TOLERANCE))
        .count();
    Ok(Candidate {
        system,
        metc,
        metc_primed,
        metc_matches,
        checks_failed: None,
    })
}

/// Runs the full search. Deterministic: candidates are ranked by METC
/// matches and ties keep enumeration order.
pub fn reconstruct_patterns() -> Result<SearchReport> {
    let sets = zero_sets();
    let per_set = 1usize << (2 * (PATTERN_LEN - ZERO_COUNT));
    let results: Vec<Vec<Candidate>> = sets
        .par_iter()
        .map(|(zeros, k)| -> Result<Vec<Candidate>> {
            let mut found = Vec::new();
            let active = PATTERN_LEN - ZERO_COUNT;
            for a_bits in 0u32..(1 << active) {
                let a = pattern(zeros, a_bits);
                for b_bits in 0u32..(1 << active) {
                    // H(X2') = 1 bit needs B balanced on its active instants.
                    if b_bits.count_ones() as usize * 2 != active {
                        continue;
                    }
                    let b = pattern(zeros, b_bits);
                    let system = build_system(a, b, rotate(&b, *k), *k)?;
                    if first_order_targets_hold(&system)? {
                        found.push(score(system)?);
                    }
                }
            }
            Ok(found)
        })
        .collect::<Result<_>>()?;
    let mut candidates: Vec<Candidate> = results.into_iter().flatten().collect();
    let first_order_matches = candidates.len();
    let top = candidates.iter().map(|c| c.metc_matches).max().unwrap_or(0);
    let quick = HarnessOptions {
        surrogates: 0,
        ..HarnessOptions::default()
    };
    candidates
        .par_iter_mut()
        .filter(|c| c.metc_matches == top)
        .try_for_each(|c| -> Result<()> {
            let report = run_paper_tables_with(&c.system, &quick)?;
            c.checks_failed = Some(report.checks.iter().filter(|k| !k.passed).count());
            Ok(())
        })?;
    // stable sort keeps enumeration order within equal scores
    candidates.sort_by_key(|c| {
        (
            Reverse(c.metc_matches),
            c.checks_failed.unwrap_or(usize::MAX),
        )
    });
    Ok(SearchReport {
        search_space_size: sets.len() * per_set,
        first_order_matches,
        candidates,
    })
}
