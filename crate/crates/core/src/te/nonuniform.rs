//! Transfer entropy with greedy non-uniform embedding.
//!
//! Instead of conditioning on every lag `1..=s`, the conditioning set is
//! grown one lagged term at a time from the pasts of the target, the source
//! and any extra conditioning series. At each round the candidate with the
//! smallest corrected conditional entropy
//!
//! ```text
//! CCE(x | V) = H(x | V) + frac_single(V) * H(x)
//! ```
//!
//! is added, where `frac_single` is the fraction of samples whose pattern in
//! `V` occurs only once. Selection stops when no candidate lowers the CCE.
//! The TE is `H(x | V without source terms) - H(x | V)`, which is zero when
//! no source term was picked.

use serde::{Deserialize, Serialize};

use super::{
    attach_surrogates, clamp_non_negative, permutation_null, require_surrogates, Embedding,
    TeConfig, TeResult,
};
use crate::error::{Error, Result};
use crate::infotheory::entropy_from_counts;
use crate::symbolic::{ensure_same_len, Symbol, SymbolSequence};

/// Which series a lagged term is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TermRole {
    Target,
    Source,
    /// Index into the conditioning slice.
    Conditioning(usize),
}

/// Lagged term `series[n - lag]` used to predict `target[n]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EmbeddingTerm {
    pub role: TermRole,
    pub lag: usize,
}

struct Problem<'a> {
    target: &'a SymbolSequence,
    source: &'a SymbolSequence,
    conditioning: &'a [SymbolSequence],
    max_lag: usize,
    samples: usize,
}

impl Problem<'_> {
    fn series(&self, role: TermRole) -> &SymbolSequence {
        match role {
            TermRole::Target => self.target,
            TermRole::Source => self.source,
            TermRole::Conditioning(i) => &self.conditioning[i],
        }
    }

    fn column(&self, term: EmbeddingTerm) -> Vec<Symbol> {
        let s = self.series(term.role).symbols();
        (self.max_lag..self.max_lag + self.samples)
            .map(|n| s[n - term.lag])
            .collect()
    }

    fn next_symbols(&self) -> Vec<Symbol> {
        self.target.symbols()[self.max_lag..].to_vec()
    }
}

/// Replaces arbitrary keys with dense ids, in sorted key order.
fn densify(keys: &[u64]) -> Vec<u64> {
    let mut uniq = keys.to_vec();
    uniq.sort_unstable();
    uniq.dedup();
    keys.iter()
        .map(|k| uniq.binary_search(k).expect("key present") as u64)
        .collect()
}

fn run_counts(mut keys: Vec<u64>) -> Vec<usize> {
    keys.sort_unstable();
    keys.chunk_by(|a, b| a == b).map(<[u64]>::len).collect()
}

/// Pattern ids of `base` extended with one more column.
fn extend_patterns(base: &[u64], column: &[Symbol]) -> Vec<u64> {
    let keys: Vec<u64> = base
        .iter()
        .zip(column)
        .map(|(&p, &c)| (p << 32) | u64::from(c))
        .collect();
    densify(&keys)
}

/// `H(x | patterns)` in nats and the fraction of samples whose pattern is
/// unique.
fn conditional_stats(next: &[Symbol], patterns: &[u64]) -> (f64, f64) {
    let n = next.len();
    let joint: Vec<u64> = patterns
        .iter()
        .zip(next)
        .map(|(&p, &x)| (p << 32) | u64::from(x))
        .collect();
    let pattern_counts = run_counts(patterns.to_vec());
    let singles = pattern_counts.iter().filter(|&&c| c == 1).count();
    let h_joint = entropy_from_counts(run_counts(joint), n);
    let h_pat = entropy_from_counts(pattern_counts, n);
    ((h_joint - h_pat).max(0.0), singles as f64 / n as f64)
}

fn patterns_for(problem: &Problem<'_>, terms: &[EmbeddingTerm]) -> Vec<u64> {
    terms.iter().fold(vec![0; problem.samples], |acc, &t| {
        extend_patterns(&acc, &problem.column(t))
    })
}

/// Greedy forward selection of lagged terms; returns the chosen terms in
/// selection order.
fn select_terms(problem: &Problem<'_>, candidates: &[EmbeddingTerm]) -> Vec<EmbeddingTerm> {
    let next = problem.next_symbols();
    let n = next.len();
    let h_next = entropy_from_counts(run_counts(next.iter().map(|&x| u64::from(x)).collect()), n);
    let mut selected: Vec<EmbeddingTerm> = Vec::new();
    let mut patterns = vec![0u64; n];
    let mut current = h_next;
    let columns: Vec<Vec<Symbol>> = candidates.iter().map(|&t| problem.column(t)).collect();
    loop {
        let mut best: Option<(usize, f64, Vec<u64>)> = None;
        for (i, term) in candidates.iter().enumerate() {
            if selected.contains(term) {
                continue;
            }
            let extended = extend_patterns(&patterns, &columns[i]);
            let (ce, single) = conditional_stats(&next, &extended);
            let cce = ce + single * h_next;
            if best.as_ref().is_none_or(|(_, b, _)| cce < *b) {
                best = Some((i, cce, extended));
            }
        }
        match best {
            Some((i, cce, extended)) if cce < current - 1e-12 => {
                selected.push(candidates[i]);
                patterns = extended;
                current = cce;
            }
            _ => break,
        }
    }
    selected
}

fn candidate_terms(config: &TeConfig, n_conditioning: usize) -> Vec<EmbeddingTerm> {
    let max_lag = config.max_lag();
    let mut out = Vec::new();
    let mut push = |role, lags: usize| {
        out.extend((1..=lags).map(|lag| EmbeddingTerm { role, lag }));
    };
    push(TermRole::Target, config.target_lags);
    push(TermRole::Source, config.source_lags);
    for i in 0..n_conditioning {
        push(TermRole::Conditioning(i), max_lag);
    }
    out
}

/// Transfer entropy from `source` to `target` conditioned on `conditioning`,
/// with greedily selected lagged terms.
///
/// Candidate lags are `1..=target_lags` for the target, `1..=source_lags`
/// for the source and `1..=max(s, t)` for each conditioning series. Ties in
/// the selection go to the earlier candidate in that order.
pub fn nonuniform_transfer_entropy(
    source: &SymbolSequence,
    target: &SymbolSequence,
    conditioning: &[SymbolSequence],
    config: &TeConfig,
) -> Result<TeResult> {
    config.validate()?;
    ensure_same_len(target, source)?;
    for c in conditioning {
        ensure_same_len(target, c)?;
    }
    let max_lag = config.max_lag();
    if target.len() < max_lag + 2 {
        return Err(Error::TooShort {
            needed: max_lag + 2,
            got: target.len(),
        });
    }
    let problem = Problem {
        target,
        source,
        conditioning,
        max_lag,
        samples: target.len() - max_lag,
    };
    let selected = select_terms(&problem, &candidate_terms(config, conditioning.len()));
    let next = problem.next_symbols();
    let value = if selected.iter().any(|t| t.role == TermRole::Source) {
        let without: Vec<EmbeddingTerm> = selected
            .iter()
            .copied()
            .filter(|t| t.role != TermRole::Source)
            .collect();
        let (ce_without, _) = conditional_stats(&next, &patterns_for(&problem, &without));
        let (ce_with, _) = conditional_stats(&next, &patterns_for(&problem, &selected));
        clamp_non_negative(config.log_base.from_nats(ce_without - ce_with))
    } else {
        0.0
    };
    Ok(TeResult {
        value,
        log_base: config.log_base,
        embedding: Embedding::NonUniform { max_lag, selected },
        effective_samples: problem.samples,
        surrogate: None,
    })
}

/// Non-uniform TE with a permutation test: each surrogate reruns the term
/// selection on a shuffled source.
pub fn nonuniform_surrogate_test(
    source: &SymbolSequence,
    target: &SymbolSequence,
    conditioning: &[SymbolSequence],
    config: &TeConfig,
) -> Result<TeResult> {
    require_surrogates(config)?;
    let observed = nonuniform_transfer_entropy(source, target, conditioning, config)?;
    let nulls = permutation_null(source, config.surrogate_count, config.rng_seed, |s| {
        nonuniform_transfer_entropy(s, target, conditioning, config).map(|r| r.value)
    })?;
    Ok(attach_surrogates(observed, config, nulls))
}
