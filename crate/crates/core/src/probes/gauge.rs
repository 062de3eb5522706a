use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of terms summed explicitly.
const MAX_TERMS: u64 = 100_000_000;
/// `log n` values at which the term exponents are fitted.
const FIT_LOGS: [f64; 3] = [1e2, 1e4, 1e6];
/// `|p − 1|` above which the power exponent alone decides.
const POWER_TOLERANCE: f64 = 0.02;
/// Distance from 1 the log exponent must clear when `p ≈ 1`.
const LOG_TOLERANCE: f64 = 0.1;

/// A dimension function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GaugeFn {
    /// `x^s`.
    Power { s: f64 },
    /// `x / log²x`, increasing on `(0, e^{−2}]`.
    XOverLog2,
}

impl GaugeFn {
    /// Right end of the range where the function is used.
    pub fn x_max(&self) -> f64 {
        match self {
            GaugeFn::Power { .. } => f64::INFINITY,
            GaugeFn::XOverLog2 => (-2.0f64).exp(),
        }
    }

    /// `log φ(x)` from `log x`.
    pub fn log_eval(&self, log_x: f64) -> f64 {
        match *self {
            GaugeFn::Power { s } => s * log_x,
            GaugeFn::XOverLog2 => log_x - 2.0 * (-log_x).ln(),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            GaugeFn::Power { s } if !(s > 0.0 && s.is_finite()) => Err(Error::invalid(
                "gauge",
                format!("exponent must be positive, got {s}"),
            )),
            _ => Ok(()),
        }
    }
}

/// `ψ(n) = C·n^α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerScale {
    pub c: f64,
    pub alpha: f64,
}

impl PowerScale {
    /// `log ψ` as a function of `log n`.
    pub fn log_at(&self, log_n: f64) -> f64 {
        self.c.ln() + self.alpha * log_n
    }
}

/// Tail verdict of the integral test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesClass {
    Convergent,
    Divergent,
    Inconclusive,
}

/// Partial sum of `Σ φ(2δ/ψ(n))` and the comparison with `Σ 1/(n^p log^q n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeSeries {
    pub n_max: u64,
    pub partial_sum: f64,
    /// Terms with `2δ/ψ(n)` outside the gauge's range, left out of the sum.
    pub skipped: u64,
    /// Fitted `p` and `q` of the term `≈ c/(n^p log^q n)` far in the tail.
    pub exponent: f64,
    pub log_exponent: f64,
    pub class: SeriesClass,
}

/// Solves the 3×3 system by Cramer's rule.
fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> [f64; 3] {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    let mut out = [0.0; 3];
    for (col, slot) in out.iter_mut().enumerate() {
        let mut m = a;
        for row in 0..3 {
            m[row][col] = b[row];
        }
        *slot = det(m) / d;
    }
    out
}

/// Sums `φ(2δ/ψ(n))` for `n = 1..=n_max` and classifies the tail.
///
/// `log_psi` maps `log n` to `log ψ(n)`. The tail exponents are fitted from
/// `log t = c − p·L − q·log L` at `L = log n ∈ {10², 10⁴, 10⁶}`, far past
/// any explicit sum; `p ≠ 1` decides alone, otherwise `q` against 1.
pub fn gauge_series(
    phi: GaugeFn,
    log_psi: impl Fn(f64) -> f64,
    delta: f64,
    n_max: u64,
) -> Result<GaugeSeries> {
    phi.validate()?;
    if !(delta > 0.0) || n_max == 0 {
        return Err(Error::invalid("gauge series", "needs δ > 0 and n_max ≥ 1"));
    }
    if n_max > MAX_TERMS {
        return Err(Error::capacity(
            "gauge series",
            format!("more than {MAX_TERMS} terms"),
        ));
    }
    let log_x_max = phi.x_max().ln();
    let log_two_delta = (2.0 * delta).ln();
    let log_term = |log_n: f64| -> Option<f64> {
        let log_x = log_two_delta - log_psi(log_n);
        (log_x <= log_x_max && log_x.is_finite()).then(|| phi.log_eval(log_x))
    };
    let mut sum = crate::seqspace::NeumaierSum::default();
    let mut skipped = 0;
    for n in 1..=n_max {
        match log_term((n as f64).ln()) {
            Some(t) => sum.add(t.exp()),
            None => skipped += 1,
        }
    }
    let mut rows = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    let mut fitted = true;
    for (i, &l) in FIT_LOGS.iter().enumerate() {
        rows[i] = [1.0, -l, -l.ln()];
        match log_term(l) {
            Some(t) => rhs[i] = t,
            None => fitted = false,
        }
    }
    let (exponent, log_exponent, class) = if fitted {
        let [_, p, q] = solve3(rows, rhs);
        let class = if (p - 1.0).abs() > POWER_TOLERANCE {
            if p > 1.0 {
                SeriesClass::Convergent
            } else {
                SeriesClass::Divergent
            }
        } else if q > 1.0 + LOG_TOLERANCE {
            SeriesClass::Convergent
        } else if q < 1.0 - LOG_TOLERANCE {
            SeriesClass::Divergent
        } else {
            SeriesClass::Inconclusive
        };
        (p, q, class)
    } else {
        (f64::NAN, f64::NAN, SeriesClass::Inconclusive)
    };
    Ok(GaugeSeries {
        n_max,
        partial_sum: sum.value(),
        skipped,
        exponent,
        log_exponent,
        class,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classify(phi: GaugeFn, psi: PowerScale) -> GaugeSeries {
        gauge_series(phi, |l| psi.log_at(l), 0.25, 1000).unwrap()
    }

    #[test]
    fn power_gauges_follow_the_p_series() {
        for &alpha in &[1.0 / 3.0, 0.5, 1.0] {
            for &s in &[0.5, 1.0, 1.5, 2.0, 3.0] {
                let g = classify(GaugeFn::Power { s }, PowerScale { c: 2.0, alpha });
                let expected = if s * alpha > 1.0 + 1e-9 {
                    SeriesClass::Convergent
                } else {
                    SeriesClass::Divergent
                };
                assert_eq!(g.class, expected, "s={s} alpha={alpha} p={}", g.exponent);
                assert!((g.exponent - s * alpha).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn log_squared_gauge_converges_against_linear_growth() {
        let g = classify(GaugeFn::XOverLog2, PowerScale { c: 1.0, alpha: 1.0 });
        assert_eq!(g.class, SeriesClass::Convergent);
        assert!((g.exponent - 1.0).abs() < 1e-3 && (g.log_exponent - 2.0).abs() < 0.05);
        // 2δ/n ≤ e^{−2} needs n ≥ 0.5e² ≈ 3.69
        assert_eq!(g.skipped, 3);
    }

    #[test]
    fn partial_sum_matches_direct_evaluation() {
        let g = gauge_series(GaugeFn::Power { s: 2.0 }, |l| l, 0.5, 100).unwrap();
        let direct: f64 = (1..=100).map(|n| 1.0 / (n as f64 * n as f64)).sum();
        assert!((g.partial_sum - direct).abs() < 1e-13);
    }
}
