use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Norm tag of a truncated sequence: `ℓ_p` for `p ≥ 1`, or the sup norm of `c_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Norm {
    Ellp {
        p: f64,
    },
    #[default]
    Sup,
}

impl Norm {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Norm::Ellp { p } if !(p.is_finite() && p >= 1.0) => Err(Error::invalid(
                "norm",
                format!("ℓ_p exponent {p} must be finite and ≥ 1"),
            )),
            _ => Ok(()),
        }
    }

    /// Norm of a finite list of real coefficients.
    pub fn eval<I: IntoIterator<Item = f64>>(&self, coeffs: I) -> f64 {
        let mut acc = LogNormAcc::new(*self);
        for c in coeffs {
            if c != 0.0 {
                acc.push(c.abs().ln());
            }
        }
        acc.value()
    }

    /// Logarithm of the norm of a vector given by the log-magnitudes of its
    /// entries (`-inf` stands for a zero entry).
    pub fn log_eval<I: IntoIterator<Item = f64>>(&self, logs: I) -> f64 {
        let mut acc = LogNormAcc::new(*self);
        for l in logs {
            acc.push(l);
        }
        acc.log_value()
    }
}

/// Streaming accumulator of a norm in the log domain.
///
/// For `ℓ_p` it keeps `log Σ |x_i|^p` through a running log-sum-exp; for the
/// sup norm it keeps the maximal log-magnitude.
#[derive(Debug, Clone, Copy)]
pub struct LogNormAcc {
    norm: Norm,
    max: f64,
    scaled_sum: f64,
}

impl LogNormAcc {
    pub fn new(norm: Norm) -> Self {
        LogNormAcc {
            norm,
            max: f64::NEG_INFINITY,
            scaled_sum: 0.0,
        }
    }

    pub fn push(&mut self, log_mag: f64) {
        if log_mag == f64::NEG_INFINITY {
            return;
        }
        match self.norm {
            Norm::Sup => self.max = self.max.max(log_mag),
            Norm::Ellp { p } => {
                let l = p * log_mag;
                if l <= self.max {
                    self.scaled_sum += (l - self.max).exp();
                } else {
                    self.scaled_sum = self.scaled_sum * (self.max - l).exp() + 1.0;
                    self.max = l;
                }
            }
        }
    }

    pub fn merge(&mut self, other: &LogNormAcc) {
        match self.norm {
            Norm::Sup => self.max = self.max.max(other.max),
            Norm::Ellp { .. } => {
                if other.max == f64::NEG_INFINITY {
                    return;
                }
                if self.max == f64::NEG_INFINITY {
                    *self = *other;
                } else if other.max <= self.max {
                    self.scaled_sum += other.scaled_sum * (other.max - self.max).exp();
                } else {
                    self.scaled_sum =
                        self.scaled_sum * (self.max - other.max).exp() + other.scaled_sum;
                    self.max = other.max;
                }
            }
        }
    }

    /// Log of the accumulated norm (`-inf` for the zero vector).
    pub fn log_value(&self) -> f64 {
        match self.norm {
            Norm::Sup => self.max,
            Norm::Ellp { p } => {
                if self.max == f64::NEG_INFINITY {
                    f64::NEG_INFINITY
                } else {
                    (self.max + self.scaled_sum.ln()) / p
                }
            }
        }
    }

    pub fn value(&self) -> f64 {
        self.log_value().exp()
    }
}

/// Finitely supported real sequence `x_0, …, x_{L-1}` with a norm tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawVector")]
pub struct TruncatedVector {
    coeffs: Vec<f64>,
    norm: Norm,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVector {
    coeffs: Vec<f64>,
    #[serde(default)]
    norm: Norm,
}

impl TryFrom<RawVector> for TruncatedVector {
    type Error = Error;
    fn try_from(raw: RawVector) -> Result<Self> {
        TruncatedVector::new(raw.coeffs, raw.norm)
    }
}

impl TruncatedVector {
    pub fn new(coeffs: Vec<f64>, norm: Norm) -> Result<Self> {
        norm.validate()?;
        if coeffs.is_empty() {
            return Err(Error::invalid(
                "vector",
                "truncation length must be at least 1",
            ));
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::invalid(
                "vector",
                format!("coefficient {i} is not finite"),
            ));
        }
        Ok(TruncatedVector { coeffs, norm })
    }

    pub fn zeros(len: usize, norm: Norm) -> Self {
        TruncatedVector {
            coeffs: vec![0.0; len.max(1)],
            norm,
        }
    }

    /// Canonical basis vector `e_n`, truncated right after its support.
    pub fn basis(n: usize, norm: Norm) -> Self {
        let mut coeffs = vec![0.0; n + 1];
        coeffs[n] = 1.0;
        TruncatedVector { coeffs, norm }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn norm_tag(&self) -> Norm {
        self.norm
    }

    pub fn get(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm.eval(self.coeffs.iter().copied())
    }

    /// One past the last nonzero index (0 for the zero vector).
    pub fn support_end(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|&c| c != 0.0)
            .map_or(0, |i| i + 1)
    }

    pub fn is_zero(&self) -> bool {
        self.support_end() == 0
    }

    pub fn scaled(&self, c: f64) -> Self {
        TruncatedVector {
            coeffs: self.coeffs.iter().map(|x| c * x).collect(),
            norm: self.norm,
        }
    }

    /// Coefficient-wise sum, padding the shorter vector with zeros.
    pub fn plus(&self, other: &TruncatedVector) -> Self {
        let len = self.len().max(other.len());
        let coeffs = (0..len).map(|i| self.get(i) + other.get(i)).collect();
        TruncatedVector {
            coeffs,
            norm: self.norm,
        }
    }

    pub fn minus(&self, other: &TruncatedVector) -> Self {
        self.plus(&other.scaled(-1.0))
    }

    /// Nonzero entries as `(index, value)` pairs.
    pub fn nonzeros(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, c)| (i, *c))
    }
}

/// Norm of a d-tuple of vectors: the maximum of the coordinate norms.
pub fn product_norm(tuple: &[TruncatedVector]) -> f64 {
    tuple.iter().map(TruncatedVector::norm).fold(0.0, f64::max)
}
