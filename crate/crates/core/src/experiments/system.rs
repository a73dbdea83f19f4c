//! The three-neuron system: `X1 = A A A A`, `X2 = B C B C`, `X3 = C B C B`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbolic::{remove_joint_symbol, SymbolEncoding, SymbolSequence};

/// Length of each firing pattern.
pub const PATTERN_LEN: usize = 12;

/// Firing states: inhibitory, inactive, excitatory.
pub const FIRING_LABELS: [i64; 3] = [-1, 0, 1];

pub type Pattern = [i8; PATTERN_LEN];

/// Three coupled neurons built from length-12 firing patterns.
///
/// `C` is `B` rotated left by `shift_k`, and all three patterns are inactive
/// (0) at the same instants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeuronSystem {
    pub a: Pattern,
    pub b: Pattern,
    pub c: Pattern,
    pub shift_k: usize,
    /// Pattern repetitions per series (4 gives length 48).
    pub repeats: usize,
}

fn zero_positions(p: &Pattern) -> Vec<usize> {
    (0..PATTERN_LEN).filter(|&i| p[i] == 0).collect()
}

/// `b` rotated left by `k`: `out[i] = b[(i + k) % 12]`.
pub fn rotate(b: &Pattern, k: usize) -> Pattern {
    std::array::from_fn(|i| b[(i + k) % PATTERN_LEN])
}

/// Validates the structural constraints and builds the system.
pub fn build_system(a: Pattern, b: Pattern, c: Pattern, shift_k: usize) -> Result<NeuronSystem> {
    for (name, p) in [("A", &a), ("B", &b), ("C", &c)] {
        if let Some(v) = p.iter().find(|v| !(-1..=1).contains(*v)) {
            return Err(Error::Constraint(format!(
                "pattern {name} holds {v}; firing values are -1, 0, +1"
            )));
        }
    }
    if !(1..PATTERN_LEN).contains(&shift_k) {
        return Err(Error::Constraint(format!(
            "shift k = {shift_k} outside 1..=11"
        )));
    }
    let zb = zero_positions(&b);
    if zero_positions(&a) != zb || zero_positions(&c) != zb {
        return Err(Error::Constraint(
            "A, B and C must be inactive (0) at the same instants".into(),
        ));
    }
    if zb.iter().any(|&i| b[(i + shift_k) % PATTERN_LEN] != 0) {
        return Err(Error::Constraint(format!(
            "zero positions of B are not invariant under a shift by {shift_k}"
        )));
    }
    if rotate(&b, shift_k) != c {
        return Err(Error::Constraint(format!(
            "C is not B cyclically shifted by {shift_k}"
        )));
    }
    Ok(NeuronSystem {
        a,
        b,
        c,
        shift_k,
        repeats: 4,
    })
}

impl NeuronSystem {
    /// Same patterns repeated `repeats` times (8 doubles the length).
    pub fn with_repeats(&self, repeats: usize) -> Self {
        Self {
            repeats,
            ..self.clone()
        }
    }

    pub fn len(&self) -> usize {
        self.repeats * PATTERN_LEN
    }

    pub fn is_empty(&self) -> bool {
        self.repeats == 0
    }

    /// Labelled series `[X1, X2, X3]`.
    pub fn labels(&self) -> [Vec<i64>; 3] {
        let mut x = [Vec::new(), Vec::new(), Vec::new()];
        for r in 0..self.repeats {
            let (p2, p3) = if r % 2 == 0 {
                (&self.b, &self.c)
            } else {
                (&self.c, &self.b)
            };
            x[0].extend(self.a.iter().map(|&v| i64::from(v)));
            x[1].extend(p2.iter().map(|&v| i64::from(v)));
            x[2].extend(p3.iter().map(|&v| i64::from(v)));
        }
        x
    }

    /// Encoding shared by every series of the system.
    pub fn encoding() -> SymbolEncoding {
        SymbolEncoding::from_labels(FIRING_LABELS).expect("non-empty label set")
    }

    /// Symbol sequences `[X1, X2, X3]`.
    pub fn sequences(&self) -> Result<[SymbolSequence; 3]> {
        let enc = Self::encoding();
        let [l1, l2, l3] = self.labels();
        Ok([enc.encode(&l1)?, enc.encode(&l2)?, enc.encode(&l3)?])
    }

    /// The "never inactive" system: every instant where a neuron is 0 removed.
    pub fn primed(&self) -> Result<[SymbolSequence; 3]> {
        let off = Self::encoding().code_of(0).expect("0 is a firing label");
        let v = remove_joint_symbol(&self.sequences()?, off)?;
        let [a, b, c]: [SymbolSequence; 3] = v.try_into().expect("three series in, three out");
        Ok([a, b, c])
    }

    /// Recovers the patterns from full labelled series and checks that the
    /// series are exactly the repeated construction.
    pub fn from_series(x1: &[i64], x2: &[i64], x3: &[i64]) -> Result<Self> {
        let n = x1.len();
        if n == 0 || !n.is_multiple_of(PATTERN_LEN) || x2.len() != n || x3.len() != n {
            return Err(Error::Constraint(format!(
                "series must share a length that is a multiple of {PATTERN_LEN}"
            )));
        }
        let pat = |x: &[i64]| -> Result<Pattern> {
            let mut p = [0i8; PATTERN_LEN];
            for (dst, &v) in p.iter_mut().zip(x) {
                *dst = i8::try_from(v)
                    .map_err(|_| Error::Constraint(format!("firing value {v} out of range")))?;
            }
            Ok(p)
        };
        let (a, b, c) = (pat(x1)?, pat(x2)?, pat(x3)?);
        let shift_k = (1..PATTERN_LEN)
            .find(|&k| rotate(&b, k) == c)
            .ok_or_else(|| Error::Constraint("C is not a cyclic shift of B".into()))?;
        let mut sys = build_system(a, b, c, shift_k)?;
        sys.repeats = n / PATTERN_LEN;
        let [l1, l2, l3] = sys.labels();
        if l1 != x1 || l2 != x2 || l3 != x3 {
            return Err(Error::Constraint(
                "series are not the repeated A/B/C construction".into(),
            ));
        }
        Ok(sys)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: Pattern = [0, 1, -1, 0, 1, 1, 0, -1, -1, 0, 1, -1];
    const B: Pattern = [0, 1, 1, 0, -1, 1, 0, -1, 1, 0, -1, -1];

    #[test]
    fn builds_valid_system() {
        let c = rotate(&B, 3);
        let s = build_system(A, B, c, 3).unwrap();
        let [x1, x2, x3] = s.sequences().unwrap();
        assert_eq!(x1.len(), 48);
        let zero = NeuronSystem::encoding().code_of(0).unwrap();
        for x in [&x1, &x2, &x3] {
            assert_eq!(x.symbols().iter().filter(|&&v| v == zero).count(), 16);
        }
        assert_eq!(&x2.symbols()[12..24], &x3.symbols()[..12]);
        let primed = s.primed().unwrap();
        assert!(primed.iter().all(|p| p.len() == 32));
    }

    #[test]
    fn rejects_unrelated_c() {
        let mut c = rotate(&B, 3);
        c.swap(1, 2);
        c[1] = -c[1];
        assert!(matches!(
            build_system(A, B, c, 3),
            Err(Error::Constraint(_))
        ));
    }

    #[test]
    fn rejects_misaligned_zeros() {
        let mut a = A;
        a[0] = 1;
        a[1] = 0;
        assert!(matches!(
            build_system(a, B, rotate(&B, 3), 3),
            Err(Error::Constraint(_))
        ));
        // B's zeros {0,3,6,9} are not invariant under a shift by 2.
        assert!(build_system(A, B, rotate(&B, 2), 2).is_err());
        assert!(build_system(A, B, B, 0).is_err());
    }

    #[test]
    fn series_round_trip() {
        let s = build_system(A, B, rotate(&B, 6), 6)
            .unwrap()
            .with_repeats(8);
        let [l1, l2, l3] = s.labels();
        assert_eq!(NeuronSystem::from_series(&l1, &l2, &l3).unwrap(), s);
        let mut bad = l3.clone();
        bad[40] = -bad[40];
        assert!(NeuronSystem::from_series(&l1, &l2, &bad).is_err());
    }
}
