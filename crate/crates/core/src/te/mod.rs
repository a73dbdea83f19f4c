//! Binned transfer entropy with permutation-surrogate significance testing.
//!
//! `TE(Y -> X)` compares the next-symbol distribution of the target `X`
//! conditioned on its own past with the same distribution conditioned on
//! both pasts:
//!
//! ```text
//! TE = sum p(x', xp, yp) log [ p(x' | xp, yp) / p(x' | xp) ]
//! ```
//!
//! Two embeddings are provided. [`transfer_entropy`] uses all contiguous
//! lags `1..=s` of the target and `1..=t` of the source. [`nonuniform`]
//! selects individual lagged terms greedily, the way binned non-uniform
//! embedding toolboxes do.

pub mod nonuniform;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infotheory::LogBase;
use crate::symbolic::{ensure_same_len, Symbol, SymbolSequence};

pub use nonuniform::{
    nonuniform_surrogate_test, nonuniform_transfer_entropy, EmbeddingTerm, TermRole,
};

/// Estimator settings shared by both embeddings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeConfig {
    /// Source history length `t` (or largest source lag considered).
    pub source_lags: usize,
    /// Target history length `s` (or largest target lag considered).
    pub target_lags: usize,
    pub log_base: LogBase,
    /// Number of permuted-source surrogates; 0 disables the test.
    pub surrogate_count: usize,
    pub significance_level: f64,
    pub rng_seed: u64,
}

impl Default for TeConfig {
    fn default() -> Self {
        Self {
            source_lags: 1,
            target_lags: 1,
            log_base: LogBase::Two,
            surrogate_count: 0,
            significance_level: 0.05,
            rng_seed: 0,
        }
    }
}

impl TeConfig {
    pub fn with_lags(lags: usize) -> Self {
        Self {
            source_lags: lags,
            target_lags: lags,
            ..Self::default()
        }
    }

    pub fn max_lag(&self) -> usize {
        self.source_lags.max(self.target_lags)
    }

    pub fn validate(&self) -> Result<()> {
        if self.source_lags < 1 || self.target_lags < 1 {
            return Err(Error::InvalidParameter("lags must be at least 1".into()));
        }
        if !(self.significance_level > 0.0 && self.significance_level < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "significance level {} outside (0, 1)",
                self.significance_level
            )));
        }
        Ok(())
    }
}

/// How the histories were built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Embedding {
    Uniform {
        source_lags: usize,
        target_lags: usize,
    },
    NonUniform {
        max_lag: usize,
        selected: Vec<EmbeddingTerm>,
    },
}

/// Outcome of the permutation test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateOutcome {
    /// Surrogate TE values in member order.
    pub null_values: Vec<f64>,
    /// `(1 - level)` nearest-rank quantile of the null values.
    pub threshold: f64,
    pub significance_level: f64,
    pub passed: bool,
    /// Observed value if the test passed, else 0.
    pub value_after_test: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeResult {
    pub value: f64,
    pub log_base: LogBase,
    pub embedding: Embedding,
    pub effective_samples: usize,
    pub surrogate: Option<SurrogateOutcome>,
}

impl TeResult {
    /// Value after the surrogate test when one ran, else the raw value.
    pub fn reported_value(&self) -> f64 {
        self.surrogate
            .as_ref()
            .map_or(self.value, |s| s.value_after_test)
    }
}

/// One embedded time point: the target's next symbol and the composite
/// codes of both histories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EmbeddedSample {
    pub next: Symbol,
    pub target_past: u64,
    pub source_past: u64,
}

fn history_code_space(alphabet: u32, lags: usize) -> Result<u64> {
    u32::try_from(lags)
        .ok()
        .and_then(|l| u64::from(alphabet).checked_pow(l))
        .ok_or_else(|| {
            Error::CodeOverflow(format!(
                "history of {lags} lags over alphabet {alphabet} exceeds 64 bits"
            ))
        })
}

/// Code of `seq[end + 1 - lags ..= end]`, most recent symbol least significant.
fn history_code(seq: &[Symbol], end: usize, lags: usize, alphabet: u64) -> u64 {
    (0..lags).fold(0u64, |code, j| {
        code * alphabet + u64::from(seq[end + 1 - lags + j])
    })
}

/// Embeds target and source histories for every usable time index.
///
/// Emits `(x[n+1], x[n-s+1..=n], y[n-t+1..=n])` for `n` from `max(s,t) - 1`
/// to `L - 2`, i.e. `L - max(s,t)` samples.
pub fn embed_histories(
    target: &SymbolSequence,
    source: &SymbolSequence,
    target_lags: usize,
    source_lags: usize,
) -> Result<Vec<EmbeddedSample>> {
    ensure_same_len(target, source)?;
    if target_lags < 1 || source_lags < 1 {
        return Err(Error::InvalidParameter("lags must be at least 1".into()));
    }
    let m = target_lags.max(source_lags);
    if target.len() < m + 2 {
        return Err(Error::TooShort {
            needed: m + 2,
            got: target.len(),
        });
    }
    history_code_space(target.alphabet_size(), target_lags)?;
    history_code_space(source.alphabet_size(), source_lags)?;
    let (ka, kb) = (
        u64::from(target.alphabet_size()),
        u64::from(source.alphabet_size()),
    );
    let (x, y) = (target.symbols(), source.symbols());
    Ok((m - 1..target.len() - 1)
        .map(|n| EmbeddedSample {
            next: x[n + 1],
            target_past: history_code(x, n, target_lags, ka),
            source_past: history_code(y, n, source_lags, kb),
        })
        .collect())
}

/// Plug-in TE in nats from embedded samples.
///
/// Samples are sorted by `(target_past, source_past, next)` so every count
/// is a contiguous run and the summation order is fixed.
pub(crate) fn te_nats(mut samples: Vec<EmbeddedSample>) -> f64 {
    samples.sort_unstable_by_key(|s| (s.target_past, s.source_past, s.next));
    let n = samples.len() as f64;
    let mut total = 0.0;
    for xp_group in samples.chunk_by(|a, b| a.target_past == b.target_past) {
        let c_xp = xp_group.len() as f64;
        let mut next_counts: Vec<(Symbol, usize)> = Vec::new();
        for s in xp_group {
            match next_counts.iter_mut().find(|(k, _)| *k == s.next) {
                Some((_, c)) => *c += 1,
                None => next_counts.push((s.next, 1)),
            }
        }
        for yp_group in xp_group.chunk_by(|a, b| a.source_past == b.source_past) {
            let c_xpyp = yp_group.len() as f64;
            for cell in yp_group.chunk_by(|a, b| a.next == b.next) {
                let c = cell.len() as f64;
                let c_xpnext = next_counts
                    .iter()
                    .find(|(k, _)| *k == cell[0].next)
                    .map(|&(_, c)| c as f64)
                    .expect("next symbol counted in its group");
                total += c * ((c * c_xp) / (c_xpyp * c_xpnext)).ln();
            }
        }
    }
    total / n
}

/// Rounding can leave a conditional-entropy difference a hair below zero.
pub(crate) fn clamp_non_negative(v: f64) -> f64 {
    debug_assert!(v >= -1e-9, "TE estimate {v} is materially negative");
    if v < 0.0 {
        0.0
    } else {
        v
    }
}

/// Transfer entropy from `source` to `target` with uniform embedding.
pub fn transfer_entropy(
    source: &SymbolSequence,
    target: &SymbolSequence,
    config: &TeConfig,
) -> Result<TeResult> {
    config.validate()?;
    let samples = embed_histories(target, source, config.target_lags, config.source_lags)?;
    let effective_samples = samples.len();
    let value = clamp_non_negative(config.log_base.from_nats(te_nats(samples)));
    Ok(TeResult {
        value,
        log_base: config.log_base,
        embedding: Embedding::Uniform {
            source_lags: config.source_lags,
            target_lags: config.target_lags,
        },
        effective_samples,
        surrogate: None,
    })
}

/// Evaluates `estimate` on `count` seeded random permutations of `source`.
///
/// Member `i` draws from a ChaCha8 stream `i` keyed by `seed`, so results
/// do not depend on scheduling; values come back in member order.
pub fn permutation_null<F>(
    source: &SymbolSequence,
    count: usize,
    seed: u64,
    estimate: F,
) -> Result<Vec<f64>>
where
    F: Fn(&SymbolSequence) -> Result<f64> + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|member| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(member as u64);
            let mut symbols = source.symbols().to_vec();
            symbols.shuffle(&mut rng);
            let shuffled = SymbolSequence::new(symbols, source.alphabet_size())?;
            estimate(&shuffled)
        })
        .collect()
}

/// Nearest-rank `(1 - level)` quantile.
pub fn null_threshold(null_values: &[f64], level: f64) -> f64 {
    let mut sorted = null_values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let rank = ((n as f64) * (1.0 - level) - 1e-9)
        .ceil()
        .clamp(1.0, n as f64) as usize;
    sorted[rank - 1]
}

pub(crate) fn attach_surrogates(
    mut observed: TeResult,
    config: &TeConfig,
    null_values: Vec<f64>,
) -> TeResult {
    let threshold = null_threshold(&null_values, config.significance_level);
    let passed = observed.value > threshold;
    observed.surrogate = Some(SurrogateOutcome {
        null_values,
        threshold,
        significance_level: config.significance_level,
        passed,
        value_after_test: if passed { observed.value } else { 0.0 },
    });
    observed
}

fn require_surrogates(config: &TeConfig) -> Result<()> {
    if config.surrogate_count < 1 {
        return Err(Error::InvalidParameter(
            "surrogate test needs at least one surrogate".into(),
        ));
    }
    Ok(())
}

/// Uniform-embedding TE plus a one-sided permutation test on the source.
pub fn surrogate_test(
    source: &SymbolSequence,
    target: &SymbolSequence,
    config: &TeConfig,
) -> Result<TeResult> {
    require_surrogates(config)?;
    let observed = transfer_entropy(source, target, config)?;
    let nulls = permutation_null(source, config.surrogate_count, config.rng_seed, |s| {
        transfer_entropy(s, target, config).map(|r| r.value)
    })?;
    Ok(attach_surrogates(observed, config, nulls))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: &[u32]) -> SymbolSequence {
        SymbolSequence::new(v.to_vec(), 2).unwrap()
    }

    #[test]
    fn embed_small_example() {
        let got = embed_histories(&seq(&[0, 1, 0, 1]), &seq(&[1, 1, 0, 0]), 1, 1).unwrap();
        let want: Vec<EmbeddedSample> = [(1, 0, 1), (0, 1, 1), (1, 0, 0)]
            .iter()
            .map(|&(next, target_past, source_past)| EmbeddedSample {
                next,
                target_past,
                source_past,
            })
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn embed_counts() {
        let x = SymbolSequence::new((0..48).map(|i| i % 3).collect(), 3).unwrap();
        assert_eq!(embed_histories(&x, &x, 1, 1).unwrap().len(), 47);
        assert_eq!(embed_histories(&x, &x, 12, 12).unwrap().len(), 36);
        assert_eq!(embed_histories(&x, &x, 3, 12).unwrap().len(), 36);
        assert!(matches!(
            embed_histories(&seq(&[0, 1]), &seq(&[0, 1]), 1, 1),
            Err(Error::TooShort { .. })
        ));
        assert!(matches!(
            embed_histories(&seq(&[0, 1, 1]), &seq(&[0, 1]), 1, 1),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn history_codes_are_most_recent_last() {
        let x = SymbolSequence::new(vec![2, 0, 1, 1, 0], 3).unwrap();
        let e = embed_histories(&x, &x, 3, 1).unwrap();
        assert_eq!(e[0].target_past, 2 * 9 + 1);
        assert_eq!(e[0].next, 1);
    }

    #[test]
    fn rejects_code_overflow() {
        let x = SymbolSequence::new(vec![0; 80], 3).unwrap();
        assert!(matches!(
            embed_histories(&x, &x, 41, 1),
            Err(Error::CodeOverflow(_))
        ));
        assert!(embed_histories(&x, &x, 40, 1).is_ok());
    }

    #[test]
    fn config_validation() {
        let mut c = TeConfig::default();
        assert!(c.validate().is_ok());
        c.significance_level = 1.0;
        assert!(c.validate().is_err());
        c = TeConfig::with_lags(0);
        assert!(c.validate().is_err());
        let x = seq(&[0, 1, 0, 1, 1]);
        assert!(matches!(
            surrogate_test(&x, &x, &TeConfig::default()),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn copy_coupling_gives_entropy_of_source() {
        // x[n+1] = y[n], y an exact de Bruijn-like balanced pattern
        let y: Vec<u32> = [0, 0, 1, 1].repeat(50);
        let mut x = vec![0];
        x.extend_from_slice(&y[..y.len() - 1]);
        let r = transfer_entropy(&seq(&y), &seq(&x), &TeConfig::default()).unwrap();
        assert!(r.value > 0.9, "{}", r.value);
        assert_eq!(r.effective_samples, 199);
    }

    #[test]
    fn threshold_nearest_rank() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(null_threshold(&v, 0.05), 95.0);
        assert_eq!(null_threshold(&[3.0], 0.05), 3.0);
        assert_eq!(null_threshold(&[1.0, 2.0], 0.5), 1.0);
    }

    #[test]
    fn permutation_null_is_seeded() {
        let y = seq(&[0, 1, 1, 0, 1, 0, 0, 0, 1, 1, 1, 0]);
        let f = |s: &SymbolSequence| Ok(s.symbols()[0] as f64);
        let a = permutation_null(&y, 20, 9, f).unwrap();
        let b = permutation_null(&y, 20, 9, f).unwrap();
        let c = permutation_null(&y, 20, 10, f).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
