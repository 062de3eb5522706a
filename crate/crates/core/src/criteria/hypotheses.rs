//! Empirical constants for the growth hypotheses on weight families:
//! `C_1 n^α`- or `C_1 log n`-Lipschitz log-products, and lower bounds
//! `inf_a w_1(a)⋯w_n(a) ≥ C_2 exp(C_3 n^α)` or `≥ C_2 n^κ`, and the single
//! weight ratio bound `w_n(a)/w_n(b) ≥ c`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::seqspace::{Interval, WeightFamily};

/// A ratio counts as bounded when its top-decade maximum is at most this
/// multiple of the previous decade's.
const BOUNDED_GROWTH: f64 = 1.1;
/// A rate counts as decaying when its top-decade minimum is below this
/// multiple of the previous decade's.
const DECAY_FACTOR: f64 = 0.9;

/// Sampling grid over `(a, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesisGrid {
    /// Equally spaced parameters in the interval, endpoints included.
    #[serde(default = "default_a_points")]
    pub a_points: usize,
    /// Largest time.
    #[serde(default = "default_n_max")]
    pub n_max: u64,
    /// Geometrically spaced times per decade.
    #[serde(default = "default_per_decade")]
    pub per_decade: usize,
}

fn default_a_points() -> usize {
    17
}

fn default_n_max() -> u64 {
    10_000
}

fn default_per_decade() -> usize {
    12
}

impl Default for HypothesisGrid {
    fn default() -> Self {
        HypothesisGrid {
            a_points: default_a_points(),
            n_max: default_n_max(),
            per_decade: default_per_decade(),
        }
    }
}

impl HypothesisGrid {
    fn times(&self) -> Vec<u64> {
        let decades = (self.n_max as f64).log10();
        let steps = (decades * self.per_decade as f64).ceil() as usize;
        let mut ns: Vec<u64> = (0..=steps)
            .map(|s| {
                (10f64.powf(decades * s as f64 / steps.max(1) as f64).round() as u64)
                    .clamp(1, self.n_max)
            })
            .collect();
        ns.push(self.n_max);
        ns.sort_unstable();
        ns.dedup();
        ns
    }
}

/// Empirical constants of both hypotheses and the resulting classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisEstimate {
    pub alpha: f64,
    pub interval: Interval,
    /// `max |f_n(a) − f_n(b)| / (n^α |a − b|)` over the grid.
    pub c1_power: f64,
    /// `max |f_n(a) − f_n(b)| / (log n |a − b|)` over the grid, `n ≥ 2`.
    pub c1_log: f64,
    pub power_lipschitz_bounded: bool,
    pub log_lipschitz_bounded: bool,
    /// Rate `C_3`: smallest `min_a f_n(a) / n^α` over the top decade (0 if decaying).
    pub c3: f64,
    /// `C_2 = min_n exp(min_a f_n(a) − C_3 n^α)`.
    pub c2_power: f64,
    /// Rate `κ`: smallest `min_a f_n(a) / log n` over the top decade (0 if decaying).
    pub kappa: f64,
    /// `min_{n ≥ 2} exp(min_a f_n(a) − κ log n)`.
    pub c2_log: f64,
    /// `min_n w_n(lo)/w_n(hi)` over the grid times: the worst pair, since
    /// every weight is nondecreasing in the parameter.
    pub weight_ratio_min: f64,
    /// The ratio stays away from 0 (no decay over the top decade).
    pub weight_ratio_bounded: bool,
    /// Satisfies the `n^α`-scale hypotheses (Lipschitz bound and `C_3 > 0`).
    pub power_class: bool,
    /// Satisfies the `log n`-scale hypotheses (Lipschitz bound and `κ > 0`).
    pub log_class: bool,
    pub diagnostics: Vec<String>,
}

/// Largest value over `n ∈ (lo, hi]` of a per-time series.
fn decade_max(ns: &[u64], xs: &[f64], lo: f64, hi: f64) -> f64 {
    ns.iter()
        .zip(xs)
        .filter(|(n, _)| (**n as f64) > lo && (**n as f64) <= hi)
        .map(|(_, x)| *x)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn decade_min(ns: &[u64], xs: &[f64], lo: f64, hi: f64) -> f64 {
    -decade_max(ns, &xs.iter().map(|x| -x).collect::<Vec<_>>(), lo, hi)
}

/// Estimates the constants of both growth hypotheses on the grid.
pub fn estimate_hypotheses(
    w: &WeightFamily,
    interval: Interval,
    alpha: f64,
    grid: &HypothesisGrid,
) -> Result<HypothesisEstimate> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid("exponent", format!("{alpha} not in (0, 1]")));
    }
    if !(interval.lo < interval.hi) {
        return Err(Error::invalid("interval", "needs lo < hi"));
    }
    w.check_param(interval.lo)?;
    w.check_param(interval.hi)?;
    if grid.a_points < 2 || grid.per_decade < 1 {
        return Err(Error::invalid(
            "grid",
            "needs at least 2 parameters and 1 time per decade",
        ));
    }
    if grid.n_max < 100 {
        return Err(Error::InsufficientData(format!(
            "n_max = {} gives fewer than two decades",
            grid.n_max
        )));
    }
    w.check_index(grid.n_max as usize)?;
    let ns = grid.times();
    let a: Vec<f64> = (0..grid.a_points)
        .map(|i| interval.lo + (interval.hi - interval.lo) * i as f64 / (grid.a_points - 1) as f64)
        .collect();
    // per time: (largest adjacent slope, min over a of f_n(a))
    let rows = par::map(&ns, |&n| {
        let f: Vec<f64> = a.iter().map(|&x| w.increment(x, 0, n as usize)).collect();
        let slope = (1..a.len())
            .map(|i| (f[i] - f[i - 1]).abs() / (a[i] - a[i - 1]))
            .fold(0.0, f64::max);
        (slope, f.iter().copied().fold(f64::INFINITY, f64::min))
    });
    let nf: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let ratio_power: Vec<f64> = rows
        .iter()
        .zip(&nf)
        .map(|((s, _), n)| s / n.powf(alpha))
        .collect();
    let ratio_log: Vec<f64> = rows
        .iter()
        .zip(&nf)
        .map(|((s, _), n)| if *n >= 2.0 { s / n.ln() } else { 0.0 })
        .collect();
    let growth: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let top = grid.n_max as f64;
    let bounded = |r: &[f64]| {
        decade_max(&ns, r, top / 10.0, top)
            <= BOUNDED_GROWTH * decade_max(&ns, r, top / 100.0, top / 10.0)
    };
    let mut diagnostics = Vec::new();
    if growth.windows(2).any(|p| p[1] < p[0]) {
        diagnostics.push("min_a f_n(a) is not monotone in n on the grid".to_string());
    }
    let rate = |scale: &dyn Fn(f64) -> f64, label: &str, diagnostics: &mut Vec<String>| -> f64 {
        let r: Vec<f64> = growth
            .iter()
            .zip(&nf)
            .map(|(g, n)| {
                if scale(*n) > 0.0 {
                    g / scale(*n)
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        let last = decade_min(&ns, &r, top / 10.0, top);
        let prev = decade_min(&ns, &r, top / 100.0, top / 10.0);
        if last <= 0.0 || last < DECAY_FACTOR * prev {
            diagnostics.push(format!(
                "growth rate on the {label} scale decays over the top decade"
            ));
            0.0
        } else {
            last
        }
    };
    let c3 = rate(&|n: f64| n.powf(alpha), "n^alpha", &mut diagnostics);
    let kappa = rate(&|n: f64| n.ln(), "log n", &mut diagnostics);
    let c2_power = growth
        .iter()
        .zip(&nf)
        .map(|(g, n)| g - c3 * n.powf(alpha))
        .fold(f64::INFINITY, f64::min)
        .exp();
    let c2_log = growth
        .iter()
        .zip(&nf)
        .filter(|(_, n)| **n >= 2.0)
        .map(|(g, n)| g - kappa * n.ln())
        .fold(f64::INFINITY, f64::min)
        .exp();
    // log w_n(lo) − log w_n(hi) per grid time
    let log_ratio: Vec<f64> = par::map(&ns, |&n| {
        w.increment(interval.lo, n as usize - 1, 1) - w.increment(interval.hi, n as usize - 1, 1)
    });
    let ratio: Vec<f64> = log_ratio.iter().map(|l| l.exp()).collect();
    let weight_ratio_min = ratio.iter().copied().fold(f64::INFINITY, f64::min);
    let weight_ratio_bounded = weight_ratio_min > 0.0
        && decade_min(&ns, &ratio, top / 10.0, top)
            >= DECAY_FACTOR * decade_min(&ns, &ratio, top / 100.0, top / 10.0);
    if !weight_ratio_bounded {
        diagnostics
            .push("single-weight ratio w_n(lo)/w_n(hi) decays over the top decade".to_string());
    }
    let power_lipschitz_bounded = bounded(&ratio_power);
    let log_lipschitz_bounded = bounded(&ratio_log);
    if !power_lipschitz_bounded {
        diagnostics
            .push("Lipschitz ratio on the n^alpha scale grows over the top decade".to_string());
    }
    if !log_lipschitz_bounded {
        diagnostics
            .push("Lipschitz ratio on the log n scale grows over the top decade".to_string());
    }
    Ok(HypothesisEstimate {
        alpha,
        interval,
        c1_power: ratio_power.iter().copied().fold(0.0, f64::max),
        c1_log: ratio_log.iter().copied().fold(0.0, f64::max),
        power_lipschitz_bounded,
        log_lipschitz_bounded,
        c3,
        c2_power,
        kappa,
        c2_log,
        weight_ratio_min,
        weight_ratio_bounded,
        power_class: power_lipschitz_bounded && c3 > 0.0,
        log_class: log_lipschitz_bounded && kappa > 0.0,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqspace::WeightKind;

    #[test]
    fn exp_power_constants_are_exact() {
        let w = WeightFamily::exp_power(0.5, 0.0, 5.0).unwrap();
        let est = estimate_hypotheses(&w, Interval::new(1.0, 2.0), 0.5, &HypothesisGrid::default())
            .unwrap();
        assert!((est.c1_power - 1.0).abs() < 1e-9);
        assert!((est.c3 - 1.0).abs() < 1e-12);
        assert!((est.c2_power - 1.0).abs() < 1e-9);
        assert!(est.power_class && !est.log_class);
        // w_1 = e^a is the worst weight: ratio e^{1−2}
        assert!((est.weight_ratio_min - (-1f64).exp()).abs() < 1e-12 && est.weight_ratio_bounded);
    }

    #[test]
    fn poly_log_is_in_both_classes() {
        let w = WeightFamily::new(
            WeightKind::PolyLog {
                base: None,
                alpha: None,
            },
            Interval::new(0.0, 5.0),
        )
        .unwrap();
        let est = estimate_hypotheses(&w, Interval::new(1.0, 2.0), 1.0, &HypothesisGrid::default())
            .unwrap();
        assert!((est.c1_log - 1.0).abs() < 1e-9);
        assert!((est.c3 - 2f64.ln()).abs() < 0.01);
        assert!(est.power_class && est.log_class);
    }

    #[test]
    fn one_plus_over_n_grows_like_n_to_the_a() {
        let w = WeightFamily::new(WeightKind::OnePlusOverN, Interval::new(0.0, 5.0)).unwrap();
        let est = estimate_hypotheses(&w, Interval::new(0.5, 2.0), 0.5, &HypothesisGrid::default())
            .unwrap();
        assert!(est.log_class && !est.power_class);
        // f_n(a) = log Γ(n+1+a) − log Γ(n+1) − log Γ(1+a) ≈ a log n − log Γ(1+a)
        assert!((est.kappa - 0.5).abs() < 0.05, "{}", est.kappa);
    }

    #[test]
    fn short_grid_is_rejected() {
        let w = WeightFamily::rolewicz(0.0, 1.0);
        let grid = HypothesisGrid {
            n_max: 50,
            ..HypothesisGrid::default()
        };
        assert!(matches!(
            estimate_hypotheses(&w, Interval::new(0.1, 0.5), 1.0, &grid),
            Err(Error::InsufficientData(_))
        ));
    }
}
