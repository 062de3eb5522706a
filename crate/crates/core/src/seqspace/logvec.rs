use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::norm::{LogNormAcc, Norm};

/// A real number stored as sign and log-magnitude; `log_mag = -inf` is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogCoeff {
    pub log_mag: f64,
    pub negative: bool,
}

impl LogCoeff {
    pub const ZERO: LogCoeff = LogCoeff {
        log_mag: f64::NEG_INFINITY,
        negative: false,
    };

    pub fn new(log_mag: f64, negative: bool) -> Self {
        LogCoeff { log_mag, negative }
    }

    pub fn from_value(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            LogCoeff {
                log_mag: x.abs().ln(),
                negative: x < 0.0,
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_mag == f64::NEG_INFINITY
    }

    pub fn value(&self) -> f64 {
        let v = self.log_mag.exp();
        if self.negative {
            -v
        } else {
            v
        }
    }

    pub fn sign(&self) -> f64 {
        if self.negative {
            -1.0
        } else {
            1.0
        }
    }

    /// Multiplies by `exp(shift)`.
    pub fn scale_log(&self, shift: f64) -> Self {
        LogCoeff {
            log_mag: self.log_mag + shift,
            negative: self.negative,
        }
    }

    /// Signed log-sum-exp.
    pub fn add(&self, other: &LogCoeff) -> LogCoeff {
        if self.is_zero() {
            return *other;
        }
        if other.is_zero() {
            return *self;
        }
        let (big, small) = if self.log_mag >= other.log_mag {
            (self, other)
        } else {
            (other, self)
        };
        let ratio = (small.log_mag - big.log_mag).exp();
        if big.negative == small.negative {
            LogCoeff {
                log_mag: big.log_mag + ratio.ln_1p(),
                negative: big.negative,
            }
        } else if ratio == 1.0 {
            Self::ZERO
        } else {
            LogCoeff {
                log_mag: big.log_mag + (-ratio).ln_1p(),
                negative: big.negative,
            }
        }
    }
}

/// Sparse real sequence with entries in sign / log-magnitude form, so that
/// coefficients such as `exp(−a·n)` for huge `n` stay representable.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "SparseRepr", into = "SparseRepr")]
pub struct SparseLogVector {
    entries: BTreeMap<usize, LogCoeff>,
}

/// Serialized form: `[index, sign, log_magnitude]` triples in index order.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SparseRepr {
    entries: Vec<(usize, i8, f64)>,
}

impl From<SparseRepr> for SparseLogVector {
    fn from(r: SparseRepr) -> Self {
        let mut v = SparseLogVector::default();
        for (i, s, l) in r.entries {
            v.add_at(i, LogCoeff::new(l, s < 0));
        }
        v
    }
}

impl From<SparseLogVector> for SparseRepr {
    fn from(v: SparseLogVector) -> Self {
        SparseRepr {
            entries: v
                .entries
                .into_iter()
                .map(|(i, c)| (i, if c.negative { -1 } else { 1 }, c.log_mag))
                .collect(),
        }
    }
}

impl SparseLogVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `c` to entry `index`, dropping entries that cancel to zero.
    pub fn add_at(&mut self, index: usize, c: LogCoeff) {
        if c.is_zero() {
            return;
        }
        let sum = match self.entries.get(&index) {
            Some(old) => old.add(&c),
            None => c,
        };
        if sum.is_zero() {
            self.entries.remove(&index);
        } else {
            self.entries.insert(index, sum);
        }
    }

    pub fn get(&self, index: usize) -> LogCoeff {
        self.entries.get(&index).copied().unwrap_or(LogCoeff::ZERO)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// One past the largest stored index.
    pub fn support_end(&self) -> usize {
        self.entries.keys().next_back().map_or(0, |i| i + 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, LogCoeff)> + '_ {
        self.entries.iter().map(|(i, c)| (*i, *c))
    }

    /// Entries with index `≥ from`.
    pub fn tail(&self, from: usize) -> impl Iterator<Item = (usize, LogCoeff)> + '_ {
        self.entries.range(from..).map(|(i, c)| (*i, *c))
    }

    pub fn log_norm(&self, norm: Norm) -> f64 {
        let mut acc = LogNormAcc::new(norm);
        for c in self.entries.values() {
            acc.push(c.log_mag);
        }
        acc.log_value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_addition() {
        let a = LogCoeff::from_value(3.0);
        let b = LogCoeff::from_value(-5.0);
        assert!((a.add(&b).value() + 2.0).abs() < 1e-14);
        assert!(a.add(&LogCoeff::from_value(-3.0)).is_zero());
        assert!((a.add(&a).value() - 6.0).abs() < 1e-14);
    }

    #[test]
    fn tiny_magnitudes_survive() {
        let mut v = SparseLogVector::new();
        v.add_at(10, LogCoeff::new(-5000.0, false));
        v.add_at(10, LogCoeff::new(-5000.0, false));
        assert!((v.get(10).log_mag - (-5000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(v.support_end(), 11);
    }

    #[test]
    fn json_round_trip() {
        let mut v = SparseLogVector::new();
        v.add_at(3, LogCoeff::from_value(-0.5));
        v.add_at(7, LogCoeff::new(-1234.5, false));
        let s = serde_json::to_string(&v).unwrap();
        let back: SparseLogVector = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}
