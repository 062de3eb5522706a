use crate::error::{Error, Result};

use super::norm::TruncatedVector;
use super::weights::WeightFamily;

/// Log-magnitudes beyond this bound are reported as saturated.
pub const OVERFLOW_GUARD: f64 = 700.0;
/// Default cap on truncation length.
pub const DEFAULT_BUDGET: usize = 10_000_000;

/// Numerical limits applied by the shift operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftConfig {
    pub overflow_guard: f64,
    pub budget: usize,
}

impl Default for ShiftConfig {
    fn default() -> Self {
        ShiftConfig {
            overflow_guard: OVERFLOW_GUARD,
            budget: DEFAULT_BUDGET,
        }
    }
}

/// Result of a shift: the vector plus numerical status flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Shifted {
    pub vector: TruncatedVector,
    /// Some coefficient had a log-magnitude beyond the overflow guard.
    pub saturated: bool,
    /// The shift moved the whole truncation out of range.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Backward,
    Forward,
}

/// `Δ_m = f_{m+n}(a) − f_m(a)` for `m = 0..count`.
pub(crate) fn increments(w: &WeightFamily, a: f64, n: usize, count: usize) -> Vec<f64> {
    if w.is_affine() || n <= 64 || count.saturating_mul(n) <= 4_000_000 {
        (0..count).map(|m| w.increment(a, m, n)).collect()
    } else {
        let mut prefix = Vec::with_capacity(count + n);
        let mut acc = super::weights::NeumaierSum::default();
        prefix.push(0.0);
        for j in 1..count + n {
            acc.add(w.log_weight(a, j));
            prefix.push(acc.value());
        }
        (0..count).map(|m| prefix[m + n] - prefix[m]).collect()
    }
}

fn exp_guarded(log_mag: f64, sign: f64, guard: f64, saturated: &mut bool) -> f64 {
    if log_mag.abs() > guard {
        *saturated = true;
        if log_mag > 0.0 {
            return sign * guard.exp();
        }
    }
    sign * log_mag.exp()
}

/// `B_w(a)^n x`: index `m` receives `exp(f_{m+n}(a) − f_m(a))·x_{m+n}`.
pub fn apply_backward(w: &WeightFamily, a: f64, x: &TruncatedVector, n: usize) -> Result<Shifted> {
    apply_backward_with(w, a, x, n, &ShiftConfig::default())
}

pub fn apply_backward_with(
    w: &WeightFamily,
    a: f64,
    x: &TruncatedVector,
    n: usize,
    cfg: &ShiftConfig,
) -> Result<Shifted> {
    check_shift(w, a, n)?;
    let len = x.len();
    if n >= len {
        return Ok(Shifted {
            vector: TruncatedVector::zeros(1, x.norm_tag()),
            saturated: false,
            degenerate: true,
        });
    }
    w.check_index(len - 1)?;
    let out_len = len - n;
    let deltas = increments(w, a, n, out_len);
    let mut saturated = false;
    let coeffs = (0..out_len)
        .map(|m| {
            let c = x.coeffs()[m + n];
            if c == 0.0 {
                0.0
            } else {
                exp_guarded(
                    deltas[m] + c.abs().ln(),
                    c.signum(),
                    cfg.overflow_guard,
                    &mut saturated,
                )
            }
        })
        .collect();
    Ok(Shifted {
        vector: TruncatedVector::new(coeffs, x.norm_tag())?,
        saturated,
        degenerate: false,
    })
}

/// `F_{w^{-1}(a)}^n x`: index `m+n` receives `exp(−(f_{m+n}(a) − f_m(a)))·x_m`.
pub fn apply_forward(w: &WeightFamily, a: f64, x: &TruncatedVector, n: usize) -> Result<Shifted> {
    apply_forward_with(w, a, x, n, &ShiftConfig::default())
}

pub fn apply_forward_with(
    w: &WeightFamily,
    a: f64,
    x: &TruncatedVector,
    n: usize,
    cfg: &ShiftConfig,
) -> Result<Shifted> {
    check_shift(w, a, n)?;
    let len = x.len();
    let out_len = len
        .checked_add(n)
        .filter(|&l| l <= cfg.budget)
        .ok_or_else(|| {
            Error::capacity(
                "forward shift",
                format!("length {len} + {n} exceeds budget {}", cfg.budget),
            )
        })?;
    w.check_index(out_len - 1)?;
    let deltas = increments(w, a, n, len);
    let mut saturated = false;
    let mut coeffs = vec![0.0; out_len];
    for (m, &c) in x.coeffs().iter().enumerate() {
        if c != 0.0 {
            coeffs[m + n] = exp_guarded(
                c.abs().ln() - deltas[m],
                c.signum(),
                cfg.overflow_guard,
                &mut saturated,
            );
        }
    }
    Ok(Shifted {
        vector: TruncatedVector::new(coeffs, x.norm_tag())?,
        saturated,
        degenerate: false,
    })
}

fn check_shift(w: &WeightFamily, a: f64, n: usize) -> Result<()> {
    w.check_param(a)?;
    if n == 0 {
        return Err(Error::invalid("shift", "power n must be at least 1"));
    }
    Ok(())
}

/// Coordinate-wise shift of a d-tuple under `λ = (λ(1), …, λ(d))`.
pub fn product_apply(
    w: &WeightFamily,
    lambda: &[f64],
    xs: &[TruncatedVector],
    n: usize,
    direction: Direction,
) -> Result<Vec<Shifted>> {
    if lambda.is_empty() || lambda.len() != xs.len() {
        return Err(Error::invalid(
            "product shift",
            format!("{} parameters for {} vectors", lambda.len(), xs.len()),
        ));
    }
    lambda
        .iter()
        .zip(xs)
        .map(|(&a, x)| match direction {
            Direction::Backward => apply_backward(w, a, x, n),
            Direction::Forward => apply_forward(w, a, x, n),
        })
        .collect()
}
