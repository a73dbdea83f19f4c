//! First-order plug-in estimators.
//!
//! All quantities are evaluated on raw empirical frequencies. Outcomes that
//! never occur are simply absent; there is no smoothing or bias correction.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbolic::{ensure_same_len, to_joint_symbols, Symbol, SymbolSequence};

/// Logarithm base for every information quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum LogBase {
    /// Bits.
    #[default]
    #[serde(rename = "2")]
    Two,
    /// Nats.
    #[serde(rename = "e")]
    E,
}

impl LogBase {
    /// Converts a value in nats to this base.
    pub fn from_nats(self, nats: f64) -> f64 {
        match self {
            LogBase::Two => nats / std::f64::consts::LN_2,
            LogBase::E => nats,
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            LogBase::Two => "bits",
            LogBase::E => "nats",
        }
    }
}

impl std::fmt::Display for LogBase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LogBase::Two => "2",
            LogBase::E => "e",
        })
    }
}

impl std::str::FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "2" => Ok(LogBase::Two),
            "e" => Ok(LogBase::E),
            other => Err(Error::InvalidParameter(format!(
                "log base must be 2 or e, got '{other}'"
            ))),
        }
    }
}

/// Empirical probability mass function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionEstimate {
    /// Observed outcomes only; every entry is strictly positive.
    pub probabilities: BTreeMap<Symbol, f64>,
    pub sample_count: usize,
}

/// Counts of each observed symbol.
pub(crate) fn symbol_counts(x: &SymbolSequence) -> BTreeMap<Symbol, usize> {
    let mut counts = BTreeMap::new();
    for &s in x.symbols() {
        *counts.entry(s).or_insert(0) += 1;
    }
    counts
}

/// Plug-in entropy in nats of a multiset of counts summing to `total`.
///
/// Counts are summed in sorted order so the result depends only on the
/// multiset, not on how outcomes happened to be labelled.
pub(crate) fn entropy_from_counts<I: IntoIterator<Item = usize>>(counts: I, total: usize) -> f64 {
    let mut counts: Vec<usize> = counts.into_iter().filter(|&c| c > 0).collect();
    counts.sort_unstable();
    let n = total as f64;
    let h = counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum::<f64>();
    h.max(0.0)
}

/// Nonzero symbol counts, in no particular order.
pub(crate) fn nonzero_counts(x: &SymbolSequence) -> Vec<usize> {
    const DENSE: u32 = 1 << 12;
    if x.alphabet_size() <= DENSE {
        let mut counts = vec![0usize; x.alphabet_size() as usize];
        for &s in x.symbols() {
            counts[s as usize] += 1;
        }
        counts.retain(|&c| c > 0);
        counts
    } else {
        symbol_counts(x).into_values().collect()
    }
}

pub fn empirical_pmf(x: &SymbolSequence) -> Result<DistributionEstimate> {
    x.ensure_non_empty()?;
    let n = x.len() as f64;
    let probabilities = symbol_counts(x)
        .into_iter()
        .map(|(s, c)| (s, c as f64 / n))
        .collect();
    Ok(DistributionEstimate {
        probabilities,
        sample_count: x.len(),
    })
}

/// Shannon entropy `-sum p log p` over observed symbols.
pub fn entropy(x: &SymbolSequence, base: LogBase) -> Result<f64> {
    x.ensure_non_empty()?;
    Ok(base.from_nats(entropy_from_counts(nonzero_counts(x), x.len())))
}

/// Entropy of the per-position pairs `(x[i], y[i])`.
pub fn joint_entropy(x: &SymbolSequence, y: &SymbolSequence, base: LogBase) -> Result<f64> {
    ensure_same_len(x, y)?;
    entropy(&to_joint_symbols(x, y)?, base)
}

/// `H(X|Y) = H(X,Y) - H(Y)`, floored at 0 against rounding.
pub fn conditional_entropy(x: &SymbolSequence, y: &SymbolSequence, base: LogBase) -> Result<f64> {
    Ok((joint_entropy(x, y, base)? - entropy(y, base)?).max(0.0))
}

/// `MI(X,Y) = H(X) + H(Y) - H(X,Y)`, floored at 0 against rounding.
pub fn mutual_information(x: &SymbolSequence, y: &SymbolSequence, base: LogBase) -> Result<f64> {
    let hxy = joint_entropy(x, y, base)?;
    // H(X) + H(Y) is added in a fixed order so MI(x,y) == MI(y,x) bitwise.
    let (hx, hy) = (entropy(x, base)?, entropy(y, base)?);
    let (lo, hi) = if hx <= hy { (hx, hy) } else { (hy, hx) };
    Ok((lo + hi - hxy).max(0.0))
}
