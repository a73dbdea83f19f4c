//! Effort-To-Compress via non-sequential recursive pair substitution (NSRPS).
//!
//! Each NSRPS step finds the most frequent adjacent pair and replaces every
//! occurrence with a fresh symbol. ETC is the number of steps needed before
//! the sequence holds a single distinct symbol.
//!
//! Conventions, all deterministic:
//! - pairs are counted with a greedy left-to-right non-overlapping scan, so
//!   `1 1 1` holds one `(1,1)`;
//! - among equally frequent pairs the one whose first occurrence is leftmost
//!   wins;
//! - the fresh symbol is the current alphabet size, which then grows by one.

use std::cell::RefCell;
use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbolic::{ensure_same_len, to_joint_symbols, Symbol, SymbolEncoding, SymbolSequence};

/// One pair substitution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubstitutionStep {
    pub pair: (Symbol, Symbol),
    pub new_symbol: Symbol,
    /// Sequence length after the substitution.
    pub length: usize,
}

/// Outcome of a full NSRPS run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtcResult {
    pub iterations: usize,
    pub input_length: usize,
    /// `iterations / (input_length - 1)`, or 0 for a single symbol.
    pub normalized: f64,
    pub trace: Vec<SubstitutionStep>,
}

impl EtcResult {
    /// Debug dump, one line per step: `step k: replace (a,b) -> c, length m`.
    ///
    /// With an encoding, original codes print as their labels and fresh
    /// symbols continue upward from the largest label.
    pub fn trace_lines(&self, encoding: Option<&SymbolEncoding>) -> Vec<String> {
        let show = |s: Symbol| match encoding {
            Some(e) => e.display_label(s).to_string(),
            None => s.to_string(),
        };
        self.trace
            .iter()
            .enumerate()
            .map(|(k, st)| {
                format!(
                    "step {}: replace ({},{}) -> {}, length {}",
                    k + 1,
                    show(st.pair.0),
                    show(st.pair.1),
                    show(st.new_symbol),
                    st.length
                )
            })
            .collect()
    }
}

#[derive(Default)]
struct PairHasher(u64);

impl Hasher for PairHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.write_u64(u64::from(b));
        }
    }

    fn write_u64(&mut self, v: u64) {
        self.0 = (self.0.rotate_left(5) ^ v).wrapping_mul(0x51_7c_c1_b7_27_22_0a_95);
    }
}

#[derive(Clone, Copy)]
struct PairStat {
    count: u32,
    first: u32,
    last: u32,
    /// Selection round that last wrote this entry; older entries read as empty.
    stamp: u64,
}

const UNSEEN: u32 = u32::MAX;

impl PairStat {
    const EMPTY: PairStat = PairStat {
        count: 0,
        first: UNSEEN,
        last: UNSEEN,
        stamp: 0,
    };
}

const DENSE_LIMIT: usize = 256;

/// Per-thread flat `cap x cap` table reused across runs. Entries are
/// invalidated by bumping the round stamp, so nothing is ever cleared.
struct DenseScratch {
    stats: Vec<PairStat>,
    round: u64,
}

thread_local! {
    static DENSE: RefCell<DenseScratch> = const {
        RefCell::new(DenseScratch { stats: Vec::new(), round: 0 })
    };
}

/// Tallies pairs for one selection round, tracking the winner as it goes.
struct Tally {
    best: Option<(u32, u32)>,
    best_count: u32,
    best_first: u32,
}

impl Tally {
    fn new() -> Self {
        Tally {
            best: None,
            best_count: 0,
            best_first: u32::MAX,
        }
    }

    #[inline]
    fn observe(&mut self, st: &mut PairStat, a: u32, b: u32, i: u32) {
        if a == b && st.last != UNSEEN && st.last + 1 == i {
            return;
        }
        st.count += 1;
        st.last = i;
        if st.first == UNSEEN {
            st.first = i;
        }
        if st.count > self.best_count || (st.count == self.best_count && st.first < self.best_first)
        {
            self.best_count = st.count;
            self.best_first = st.first;
            self.best = Some((a, b));
        }
    }
}

/// Most frequent adjacent pair of `work` (greedy non-overlapping counts,
/// leftmost first occurrence on ties). Codes must be below `cap`.
fn most_frequent_pair(work: &[u32], cap: usize) -> Option<(u32, u32)> {
    if work.len() < 2 {
        return None;
    }
    let mut tally = Tally::new();
    if cap <= DENSE_LIMIT {
        DENSE.with(|cell| {
            let mut scratch = cell.borrow_mut();
            if scratch.stats.len() < cap * cap {
                scratch.stats = vec![PairStat::EMPTY; cap * cap];
            }
            scratch.round += 1;
            let round = scratch.round;
            for (i, w) in work.windows(2).enumerate() {
                let st = &mut scratch.stats[w[0] as usize * cap + w[1] as usize];
                if st.stamp != round {
                    *st = PairStat {
                        stamp: round,
                        ..PairStat::EMPTY
                    };
                }
                tally.observe(st, w[0], w[1], i as u32);
            }
        });
    } else {
        let mut map: HashMap<u64, PairStat, BuildHasherDefault<PairHasher>> = HashMap::default();
        for (i, w) in work.windows(2).enumerate() {
            let st = map
                .entry((u64::from(w[0]) << 32) | u64::from(w[1]))
                .or_insert(PairStat::EMPTY);
            tally.observe(st, w[0], w[1], i as u32);
        }
    }
    tally.best
}

/// Step-by-step NSRPS engine over a private working copy.
///
/// Iterating yields one [`SubstitutionStep`] per substitution, in the
/// caller's symbol codes; [`Nsrps::current`] exposes the working sequence.
pub struct Nsrps {
    work: Vec<u32>,
    scratch: Vec<u32>,
    /// Original code for each dense working code below `distinct`.
    originals: Vec<Symbol>,
    distinct: u32,
    alphabet_size: u32,
    next: u32,
    cap: usize,
}

impl Nsrps {
    pub fn new(x: &SymbolSequence) -> Self {
        let mut dense: HashMap<Symbol, u32, BuildHasherDefault<PairHasher>> = HashMap::default();
        let mut originals = Vec::new();
        let work: Vec<u32> = x
            .symbols()
            .iter()
            .map(|&s| {
                *dense.entry(s).or_insert_with(|| {
                    originals.push(s);
                    originals.len() as u32 - 1
                })
            })
            .collect();
        let distinct = originals.len() as u32;
        let cap = distinct as usize + x.len().saturating_sub(1);
        Nsrps {
            scratch: Vec::with_capacity(work.len()),
            work,
            originals,
            distinct,
            alphabet_size: x.alphabet_size(),
            next: distinct,
            cap: cap.max(1),
        }
    }

    fn original(&self, code: u32) -> Symbol {
        if code < self.distinct {
            self.originals[code as usize]
        } else {
            self.alphabet_size + (code - self.distinct)
        }
    }

    /// The working sequence in the caller's symbol codes.
    pub fn current(&self) -> Vec<Symbol> {
        self.work.iter().map(|&c| self.original(c)).collect()
    }

    pub fn len(&self) -> usize {
        self.work.len()
    }

    pub fn is_empty(&self) -> bool {
        self.work.is_empty()
    }

    /// True once a single distinct symbol remains.
    pub fn is_constant(&self) -> bool {
        self.work.windows(2).all(|w| w[0] == w[1])
    }

    /// Performs one substitution; `None` once the sequence is constant.
    pub fn step(&mut self) -> Option<SubstitutionStep> {
        if self.is_constant() {
            return None;
        }
        self.substitute()
    }

    /// Substitutes the selected pair even if the sequence is constant
    /// (`1 1 1 -> 2 1`); `None` only below length 2.
    fn substitute(&mut self) -> Option<SubstitutionStep> {
        let (a, b) = most_frequent_pair(&self.work, self.cap)?;
        let fresh = self.next;
        self.next += 1;
        self.scratch.clear();
        let mut i = 0;
        let n = self.work.len();
        while i < n {
            if i + 1 < n && self.work[i] == a && self.work[i + 1] == b {
                self.scratch.push(fresh);
                i += 2;
            } else {
                self.scratch.push(self.work[i]);
                i += 1;
            }
        }
        std::mem::swap(&mut self.work, &mut self.scratch);
        Some(SubstitutionStep {
            pair: (self.original(a), self.original(b)),
            new_symbol: self.original(fresh),
            length: self.work.len(),
        })
    }
}

impl Iterator for Nsrps {
    type Item = SubstitutionStep;

    fn next(&mut self) -> Option<SubstitutionStep> {
        self.step()
    }
}

/// A single NSRPS step on a sequence of length at least 2.
///
/// A constant run is still substituted once (`1 1 1 -> 2 1`); [`etc`] never
/// asks for that because it halts on constant input.
pub fn nsrps_step(x: &SymbolSequence) -> Result<(SymbolSequence, (Symbol, Symbol))> {
    let mut engine = Nsrps::new(x);
    let step = engine.substitute().ok_or(Error::TooShort {
        needed: 2,
        got: x.len(),
    })?;
    let seq = SymbolSequence::new(engine.current(), x.alphabet_size() + 1)?;
    Ok((seq, step.pair))
}

fn normalize(iterations: usize, len: usize) -> f64 {
    if len < 2 {
        0.0
    } else {
        iterations as f64 / (len - 1) as f64
    }
}

/// Effort-To-Compress of a sequence, with its full substitution trace.
pub fn etc(x: &SymbolSequence) -> Result<EtcResult> {
    x.ensure_non_empty()?;
    let trace: Vec<SubstitutionStep> = Nsrps::new(x).collect();
    Ok(EtcResult {
        iterations: trace.len(),
        input_length: x.len(),
        normalized: normalize(trace.len(), x.len()),
        trace,
    })
}

/// Number of NSRPS steps only, skipping the trace.
pub fn etc_iterations(x: &SymbolSequence) -> Result<usize> {
    x.ensure_non_empty()?;
    Ok(Nsrps::new(x).count())
}

/// Joint ETC of two aligned sequences, run on their per-position pairs.
pub fn etc2d(x: &SymbolSequence, y: &SymbolSequence) -> Result<EtcResult> {
    ensure_same_len(x, y)?;
    etc(&to_joint_symbols(x, y)?)
}

/// Mutual ETC on normalized values: `ETC(X) + ETC(Y) - ETC2D(X,Y)`.
pub fn metc(x: &SymbolSequence, y: &SymbolSequence) -> Result<f64> {
    ensure_same_len(x, y)?;
    if x.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: x.len(),
        });
    }
    let l = x.len();
    let ex = etc_iterations(x)?;
    let ey = etc_iterations(y)?;
    let exy = etc_iterations(&to_joint_symbols(x, y)?)?;
    Ok(normalize(ex, l) + normalize(ey, l) - normalize(exy, l))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: &[u32]) -> SymbolSequence {
        SymbolSequence::from_symbols(v.to_vec())
    }

    fn worked_example() -> (SymbolEncoding, SymbolSequence) {
        let enc = SymbolEncoding::from_labels([-1, 0, 1]).unwrap();
        let s = enc.encode(&[-1, -1, 0, 1, -1, -1, 1, 0]).unwrap();
        (enc, s)
    }

    #[test]
    fn first_step_of_worked_example() {
        let (enc, s) = worked_example();
        let (next, pair) = nsrps_step(&s).unwrap();
        assert_eq!(pair, (0, 0));
        let shown: Vec<i64> = next
            .symbols()
            .iter()
            .map(|&c| enc.display_label(c))
            .collect();
        assert_eq!(shown, vec![2, 0, 1, 2, 1, 0]);
    }

    #[test]
    fn overlapping_run_counts_once() {
        let (next, pair) = nsrps_step(&seq(&[1, 1, 1])).unwrap();
        assert_eq!(pair, (1, 1));
        assert_eq!(next.symbols(), &[2, 1]);
    }

    #[test]
    fn single_pair() {
        let (next, pair) = nsrps_step(&seq(&[0, 1])).unwrap();
        assert_eq!((next.symbols(), pair), (&[2][..], (0, 1)));
        assert_eq!(nsrps_step(&seq(&[4, 4])).unwrap().0.symbols(), &[5]);
        assert!(matches!(
            nsrps_step(&seq(&[4])),
            Err(Error::TooShort { .. })
        ));
    }

    #[test]
    fn etc_worked_example() {
        let (enc, s) = worked_example();
        let r = etc(&s).unwrap();
        assert_eq!(r.iterations, 6);
        let lengths: Vec<usize> = r.trace.iter().map(|t| t.length).collect();
        assert_eq!(lengths, vec![6, 5, 4, 3, 2, 1]);
        assert!((r.normalized - 6.0 / 7.0).abs() < 1e-15);
        assert_eq!(
            r.trace_lines(Some(&enc))[0],
            "step 1: replace (-1,-1) -> 2, length 6"
        );
        assert_eq!(
            r.trace_lines(None)[5],
            "step 6: replace (7,1) -> 8, length 1"
        );
    }

    #[test]
    fn etc_trivial_cases() {
        assert_eq!(etc(&seq(&[2; 9])).unwrap().iterations, 0);
        let r = etc(&seq(&[5])).unwrap();
        assert_eq!((r.iterations, r.normalized), (0, 0.0));
        let r = etc(&seq(&[0, 1])).unwrap();
        assert_eq!((r.iterations, r.normalized), (1, 1.0));
        assert_eq!(
            etc(&SymbolSequence::new(vec![], 1).unwrap()),
            Err(Error::Empty)
        );
    }

    #[test]
    fn etc2d_cases() {
        let x = seq(&[0, 1, 0, 1]);
        let y = seq(&[1, 0, 1, 0]);
        assert_eq!(
            etc2d(&x, &y).unwrap().iterations,
            etc(&x).unwrap().iterations
        );
        assert_eq!(
            etc2d(&x, &x).unwrap().iterations,
            etc(&x).unwrap().iterations
        );
        assert_eq!(
            etc2d(&seq(&[1, 1, 1]), &seq(&[0, 0, 0]))
                .unwrap()
                .iterations,
            0
        );
        assert!(etc2d(&x, &seq(&[0])).is_err());
    }

    #[test]
    fn metc_cases() {
        let x = seq(&[0, 1, 1, 0, 2, 1, 0, 0, 2]);
        let m = metc(&x, &x).unwrap();
        assert!((m - etc(&x).unwrap().normalized).abs() < 1e-15);
        assert_eq!(metc(&seq(&[1, 1, 1]), &seq(&[0, 0, 0])).unwrap(), 0.0);
        assert!(matches!(
            metc(&seq(&[1]), &seq(&[1])),
            Err(Error::TooShort { .. })
        ));
    }

    #[test]
    fn sparse_table_matches_dense() {
        // 300 distinct symbols force the hash-map path.
        let v: Vec<u32> = (0..1500u32).map(|i| (i * 7919) % 300).collect();
        let big = SymbolSequence::from_symbols(v.clone());
        let sparse = etc(&big).unwrap();
        let head = SymbolSequence::from_symbols(v[..400].to_vec());
        let dense_head = etc(&head).unwrap();
        assert!(sparse.iterations <= 1499);
        assert_eq!(dense_head.iterations, etc_iterations(&head).unwrap());
        // relabelled large alphabet, dense path
        let shifted =
            SymbolSequence::from_symbols(v[..400].iter().map(|s| s + 1_000_000).collect());
        assert_eq!(etc(&shifted).unwrap().iterations, dense_head.iterations);
    }
}
