//! Symbol sequences and the transforms that produce them.
//!
//! Every measure in this crate consumes a [`SymbolSequence`]: a run of
//! non-negative integer codes together with the size of the alphabet they
//! were drawn from. Real-valued series are discretized with [`quantize`];
//! labelled series such as `{-1, 0, +1}` firing states go through a
//! [`SymbolEncoding`] so that every series in a system shares one table.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single symbol code.
pub type Symbol = u32;

/// Finite sequence of symbols drawn from `0..alphabet_size`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolSequence {
    symbols: Vec<Symbol>,
    alphabet_size: u32,
}

impl SymbolSequence {
    /// Builds a sequence, checking every symbol against the alphabet.
    pub fn new(symbols: Vec<Symbol>, alphabet_size: u32) -> Result<Self> {
        if alphabet_size == 0 {
            return Err(Error::InvalidParameter(
                "alphabet_size must be positive".into(),
            ));
        }
        if let Some((position, &symbol)) = symbols
            .iter()
            .enumerate()
            .find(|(_, &s)| s >= alphabet_size)
        {
            return Err(Error::SymbolOutOfRange {
                symbol,
                position,
                alphabet_size,
            });
        }
        Ok(Self {
            symbols,
            alphabet_size,
        })
    }

    /// Builds a sequence whose alphabet is just large enough for its symbols.
    pub fn from_symbols(symbols: Vec<Symbol>) -> Self {
        let alphabet_size = symbols.iter().copied().max().map_or(1, |m| m + 1);
        Self {
            symbols,
            alphabet_size,
        }
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn into_symbols(self) -> Vec<Symbol> {
        self.symbols
    }

    pub fn alphabet_size(&self) -> u32 {
        self.alphabet_size
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// True when at most one distinct symbol occurs.
    pub fn is_constant(&self) -> bool {
        self.symbols.windows(2).all(|w| w[0] == w[1])
    }

    /// Symbols as reals, for the correlation routines.
    pub fn to_f64(&self) -> Vec<f64> {
        self.symbols.iter().map(|&s| f64::from(s)).collect()
    }

    /// Concatenates `times` copies of the sequence.
    pub fn repeat(&self, times: usize) -> Self {
        Self {
            symbols: self.symbols.repeat(times),
            alphabet_size: self.alphabet_size,
        }
    }

    pub(crate) fn ensure_non_empty(&self) -> Result<()> {
        if self.symbols.is_empty() {
            Err(Error::Empty)
        } else {
            Ok(())
        }
    }
}

pub(crate) fn ensure_same_len(x: &SymbolSequence, y: &SymbolSequence) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(())
}

/// Bijective table between integer labels (e.g. firing states `-1, 0, +1`)
/// and symbol codes.
///
/// Labels are stored in ascending order and label `labels[i]` has code `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolEncoding {
    labels: Vec<i64>,
}

impl SymbolEncoding {
    /// Collects the distinct labels of one or more series.
    pub fn from_labels<I: IntoIterator<Item = i64>>(labels: I) -> Result<Self> {
        let mut labels: Vec<i64> = labels.into_iter().collect();
        labels.sort_unstable();
        labels.dedup();
        if labels.is_empty() {
            return Err(Error::Empty);
        }
        Ok(Self { labels })
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn alphabet_size(&self) -> u32 {
        self.labels.len() as u32
    }

    pub fn code_of(&self, label: i64) -> Option<Symbol> {
        self.labels.binary_search(&label).ok().map(|i| i as Symbol)
    }

    pub fn label_of(&self, code: Symbol) -> Option<i64> {
        self.labels.get(code as usize).copied()
    }

    pub fn encode(&self, labels: &[i64]) -> Result<SymbolSequence> {
        let symbols = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                self.code_of(l).ok_or_else(|| {
                    Error::Input(format!("label {l} at position {i} not in encoding"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        SymbolSequence::new(symbols, self.alphabet_size())
    }

    pub fn decode(&self, seq: &SymbolSequence) -> Result<Vec<i64>> {
        seq.symbols()
            .iter()
            .map(|&c| {
                self.label_of(c)
                    .ok_or_else(|| Error::Input(format!("code {c} not in encoding")))
            })
            .collect()
    }

    /// Label used when printing a symbol that may have been created by pair
    /// substitution: known codes print as their label, fresh codes continue
    /// counting upward from the largest label.
    pub fn display_label(&self, code: Symbol) -> i64 {
        match self.label_of(code) {
            Some(l) => l,
            None => {
                let max = *self.labels.last().expect("encoding is never empty");
                max + 1 + i64::from(code - self.alphabet_size())
            }
        }
    }
}

/// Binning rule for [`quantize`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinStrategy {
    EqualWidth,
    EqualFrequency,
}

impl std::str::FromStr for BinStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal-width" => Ok(Self::EqualWidth),
            "equal-frequency" => Ok(Self::EqualFrequency),
            other => Err(Error::InvalidParameter(format!(
                "unknown strategy '{other}' (expected equal-width or equal-frequency)"
            ))),
        }
    }
}

fn check_series(series: &[f64], n_bins: u32) -> Result<()> {
    if series.is_empty() {
        return Err(Error::Empty);
    }
    if n_bins < 1 {
        return Err(Error::InvalidParameter("n_bins must be at least 1".into()));
    }
    if let Some(i) = series.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    Ok(())
}

/// Interior bin edges (`n_bins - 1` of them) for a series.
///
/// A value `v` lands in bin `#{edges e : v > e}`, so values equal to an edge
/// go to the lower bin. For equal-width bins the top edge is the maximum and
/// is inclusive.
pub fn bin_edges(series: &[f64], n_bins: u32, strategy: BinStrategy) -> Result<Vec<f64>> {
    check_series(series, n_bins)?;
    let k = n_bins as usize;
    match strategy {
        BinStrategy::EqualWidth => {
            let (min, max) = series
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                });
            let width = (max - min) / k as f64;
            Ok((1..k).map(|i| min + width * i as f64).collect())
        }
        BinStrategy::EqualFrequency => {
            let mut sorted = series.to_vec();
            sorted.sort_by(f64::total_cmp);
            Ok((1..k)
                .map(|i| linear_quantile(&sorted, i as f64 / k as f64))
                .collect())
        }
    }
}

/// Quantile of sorted data with linear interpolation between order
/// statistics (position `p * (n - 1)`).
fn linear_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Discretizes a real-valued series into `n_bins` symbols.
pub fn quantize(series: &[f64], n_bins: u32, strategy: BinStrategy) -> Result<SymbolSequence> {
    let edges = bin_edges(series, n_bins, strategy)?;
    let symbols = series
        .iter()
        .map(|&v| edges.iter().filter(|&&e| v > e).count() as Symbol)
        .collect();
    SymbolSequence::new(symbols, n_bins)
}

/// Drops every time index at which any of the aligned sequences holds
/// `target`.
pub fn remove_joint_symbol(
    sequences: &[SymbolSequence],
    target: Symbol,
) -> Result<Vec<SymbolSequence>> {
    let first = sequences.first().ok_or(Error::Empty)?;
    for s in &sequences[1..] {
        ensure_same_len(first, s)?;
    }
    let keep: Vec<bool> = (0..first.len())
        .map(|i| sequences.iter().all(|s| s.symbols[i] != target))
        .collect();
    if !keep.iter().any(|&k| k) {
        return Err(Error::EmptyAfterRemoval);
    }
    Ok(sequences
        .iter()
        .map(|s| SymbolSequence {
            symbols: s
                .symbols
                .iter()
                .zip(&keep)
                .filter_map(|(&v, &k)| k.then_some(v))
                .collect(),
            alphabet_size: s.alphabet_size,
        })
        .collect())
}

/// Composite per-position code `x[i] * |Y| + y[i]` over the product alphabet.
pub fn to_joint_symbols(x: &SymbolSequence, y: &SymbolSequence) -> Result<SymbolSequence> {
    ensure_same_len(x, y)?;
    let alphabet_size = x
        .alphabet_size
        .checked_mul(y.alphabet_size)
        .ok_or_else(|| {
            Error::CodeOverflow(format!(
                "joint alphabet {} x {} exceeds u32",
                x.alphabet_size, y.alphabet_size
            ))
        })?;
    let symbols = x
        .symbols
        .iter()
        .zip(&y.symbols)
        .map(|(&a, &b)| a * y.alphabet_size + b)
        .collect();
    Ok(SymbolSequence {
        symbols,
        alphabet_size,
    })
}

/// Splits a composite code produced by [`to_joint_symbols`].
pub fn split_joint_symbol(code: Symbol, y_alphabet: u32) -> (Symbol, Symbol) {
    (code / y_alphabet, code % y_alphabet)
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample Pearson correlation coefficient.
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: x.len(),
        });
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Sample autocorrelation function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfResult {
    /// Coefficients for lags `0..=max_lag`; entry 0 is exactly 1.
    pub values: Vec<f64>,
    /// Half-width of the 95% white-noise band, `1.96 / sqrt(N)`.
    pub confidence_halfwidth: f64,
}

impl AcfResult {
    /// Lag in `1..=max_lag` with the largest coefficient (earliest on ties).
    pub fn argmax_lag(&self) -> Option<usize> {
        self.values
            .iter()
            .enumerate()
            .skip(1)
            .fold(None, |best: Option<(usize, f64)>, (k, &v)| match best {
                Some((_, bv)) if bv >= v => best,
                _ => Some((k, v)),
            })
            .map(|(k, _)| k)
    }
}

/// Biased (1/N) sample autocorrelation up to `max_lag`.
pub fn acf(x: &[f64], max_lag: usize) -> Result<AcfResult> {
    if max_lag < 1 {
        return Err(Error::InvalidParameter("max_lag must be at least 1".into()));
    }
    if x.len() < max_lag + 2 {
        return Err(Error::TooShort {
            needed: max_lag + 2,
            got: x.len(),
        });
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let n = x.len();
    let m = mean(x);
    let centered: Vec<f64> = x.iter().map(|v| v - m).collect();
    let c0: f64 = centered.iter().map(|d| d * d).sum();
    if c0 == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let mut values = Vec::with_capacity(max_lag + 1);
    values.push(1.0);
    for k in 1..=max_lag {
        let ck: f64 = centered[..n - k]
            .iter()
            .zip(&centered[k..])
            .map(|(a, b)| a * b)
            .sum();
        values.push(ck / c0);
    }
    Ok(AcfResult {
        values,
        confidence_halfwidth: 1.96 / (n as f64).sqrt(),
    })
}
