use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paramsets::{addresses, grid_box};
use crate::schedule::MAX_TIME;

/// Deepest covering of the ordering experiment (`4^8` cells).
pub const MAX_ORDERING_DEPTH: usize = 8;
/// Largest cell count for the pairwise post-hoc checks.
const PAIRWISE_LIMIT: usize = 4096;

/// Multiplier `1/(1 − ((a_k − a_j)/a_k)^{1/α})` of a backward jump.
fn saut_factor(a_k: f64, a_j: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::invalid(
            "jump bound",
            format!("alpha must be positive, got {alpha}"),
        ));
    }
    if !(a_j > 0.0) {
        return Err(Error::invalid(
            "jump bound",
            format!("parameters must be positive, got {a_j}"),
        ));
    }
    if a_j >= a_k {
        return Ok(1.0);
    }
    let ratio = ((a_k - a_j) / a_k).powf(1.0 / alpha);
    if !(ratio < 1.0) {
        return Err(Error::invalid(
            "jump bound",
            "jump reaches the parameter: no finite time",
        ));
    }
    Ok(1.0 / (1.0 - ratio))
}

fn scaled_ceil(n: u64, factor: f64) -> Result<u64> {
    if factor == 1.0 {
        return Ok(n);
    }
    let v = (n as f64 * factor).ceil();
    if v > MAX_TIME as f64 {
        return Err(Error::capacity(
            "jump bound",
            format!("time {v:e} exceeds 2^53"),
        ));
    }
    Ok(v as u64)
}

/// Smallest time allowed after `n_k` when a coordinate drops from `a_k` to `a_j`.
///
/// Returns `n_k` when there is no drop.
pub fn saut_bound(a_k: f64, a_j: f64, alpha: f64, n_k: u64) -> Result<u64> {
    scaled_ceil(n_k, saut_factor(a_k, a_j, alpha)?)
}

/// Visiting order of the `4^m` dyadic cells of `[1,2]²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellOrdering {
    /// Row by row, each row left to right.
    First,
    /// Row by row, alternating direction.
    Second,
    /// Lexicographic on the nested 2×2 block addresses.
    Third,
}

impl CellOrdering {
    pub fn name(&self) -> &'static str {
        match self {
            CellOrdering::First => "first",
            CellOrdering::Second => "second",
            CellOrdering::Third => "third",
        }
    }
}

/// Grid indices `(column, row)` of the cells in visiting order.
pub fn ordering_cells(m: usize, ordering: CellOrdering) -> Vec<(usize, usize)> {
    let side = 1usize << m;
    match ordering {
        CellOrdering::First => (0..side)
            .flat_map(|y| (0..side).map(move |x| (x, y)))
            .collect(),
        CellOrdering::Second => (0..side)
            .flat_map(|y| {
                (0..side).map(move |x| {
                    if y % 2 == 0 {
                        (x, y)
                    } else {
                        (side - 1 - x, y)
                    }
                })
            })
            .collect(),
        CellOrdering::Third => addresses(4, m)
            .map(|digits| {
                let (lo, _) = grid_box(&[1.0, 1.0], 1.0, &digits);
                (
                    ((lo[0] - 1.0) * side as f64).round() as usize,
                    ((lo[1] - 1.0) * side as f64).round() as usize,
                )
            })
            .collect(),
    }
}

/// Inputs of the ordering experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderingParams {
    pub m: usize,
    pub alpha: f64,
    pub spacing: u64,
    /// First time; defaults to the spacing.
    #[serde(default)]
    pub n1: Option<u64>,
    /// Constant of the global separation test `‖λ−μ‖ ≤ D((n_j−n_k)/n_k)^α`.
    #[serde(default = "default_d")]
    pub d_const: f64,
    /// Covering slack of the admissibility test `n_final^α ≤ slack·2^m`.
    #[serde(default = "default_slack")]
    pub slack: f64,
}

/// Bound observed for the nested-block ordering at every depth up to 6.
fn default_d() -> f64 {
    3.0
}

fn default_slack() -> f64 {
    1.0
}

impl OrderingParams {
    pub fn new(m: usize, alpha: f64, spacing: u64) -> Self {
        OrderingParams {
            m,
            alpha,
            spacing,
            n1: None,
            d_const: default_d(),
            slack: default_slack(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m > MAX_ORDERING_DEPTH {
            return Err(Error::invalid(
                "ordering",
                format!("depth must lie in 1..={MAX_ORDERING_DEPTH}, got {}", self.m),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(Error::invalid(
                "ordering",
                format!("alpha must lie in (0, 1/2), got {}", self.alpha),
            ));
        }
        if self.spacing == 0 || self.n1 == Some(0) {
            return Err(Error::invalid(
                "ordering",
                "spacing and n1 must be positive",
            ));
        }
        if !(self.d_const > 0.0 && self.slack > 0.0) {
            return Err(Error::invalid(
                "ordering",
                "D and the slack must be positive",
            ));
        }
        Ok(())
    }
}

/// Greedy-minimal schedule for one ordering and its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingExperiment {
    pub m: usize,
    pub alpha: f64,
    pub ordering: CellOrdering,
    pub spacing: u64,
    pub n1: u64,
    pub sequence: Vec<u64>,
    pub n_final: u64,
    /// `slack·2^m`.
    pub threshold: f64,
    /// `n_final^α / threshold`.
    pub ratio: f64,
    pub admissible: bool,
    /// Pairwise jump-bound violations found post hoc (`None` above the pairwise limit).
    pub saut_violations: Option<usize>,
    /// Smallest `D` with `‖λ−μ‖ ≤ D((n_j−n_k)/n_k)^α` over all cell pairs.
    pub saut2_min_d: Option<f64>,
    pub d_const: f64,
    pub saut2_holds: Option<bool>,
}

/// Greedy schedule: each time is the least value meeting the spacing and
/// every jump bound against earlier cells, evaluated at the cells' upper corners.
pub fn ordering_cost(
    params: &OrderingParams,
    ordering: CellOrdering,
) -> Result<OrderingExperiment> {
    params.validate()?;
    let m = params.m;
    let side = 1usize << m;
    let alpha = params.alpha;
    let n1 = params.n1.unwrap_or(params.spacing);
    let anchor = |i: usize| 1.0 + (i + 1) as f64 / side as f64;
    // factors[v * side + t]: drop from anchor v to anchor t
    let mut factors = vec![1.0; side * side];
    for v in 0..side {
        for t in 0..v {
            factors[v * side + t] = saut_factor(anchor(v), anchor(t), alpha)?;
        }
    }
    let cells = ordering_cells(m, ordering);
    // latest (largest) time seen at each anchor value, per coordinate
    let mut latest = [vec![0u64; side], vec![0u64; side]];
    let mut sequence = Vec::with_capacity(cells.len());
    for &(x, y) in &cells {
        let mut n = match sequence.last() {
            None => n1,
            Some(&prev) => prev + params.spacing,
        };
        if !sequence.is_empty() {
            for (axis, t) in [(0, x), (1, y)] {
                for v in t + 1..side {
                    if latest[axis][v] > 0 {
                        n = n.max(scaled_ceil(latest[axis][v], factors[v * side + t])?);
                    }
                }
            }
        }
        if n > MAX_TIME {
            return Err(Error::capacity("ordering", "time exceeds 2^53"));
        }
        latest[0][x] = n;
        latest[1][y] = n;
        sequence.push(n);
    }
    let n_final = *sequence.last().expect("at least four cells");
    let threshold = params.slack * side as f64;
    let ratio = (n_final as f64).powf(alpha) / threshold;
    let (saut_violations, saut2_min_d) = if cells.len() <= PAIRWISE_LIMIT {
        let mut violations = 0;
        let mut min_d = 0.0f64;
        let width = 1.0 / side as f64;
        for j in 1..cells.len() {
            let (xj, yj) = cells[j];
            for k in 0..j {
                let (xk, yk) = cells[k];
                for (ak, aj) in [(xk, xj), (yk, yj)] {
                    if aj < ak
                        && sequence[j] < saut_bound(anchor(ak), anchor(aj), alpha, sequence[k])?
                    {
                        violations += 1;
                    }
                }
                // sup-norm distance between the farthest points of the two cells
                let far = (xk.abs_diff(xj).max(yk.abs_diff(yj)) + 1) as f64 * width;
                let growth = ((sequence[j] - sequence[k]) as f64 / sequence[k] as f64).powf(alpha);
                min_d = min_d.max(far / growth);
            }
        }
        (Some(violations), Some(min_d))
    } else {
        (None, None)
    };
    Ok(OrderingExperiment {
        m,
        alpha,
        ordering,
        spacing: params.spacing,
        n1,
        sequence,
        n_final,
        threshold,
        ratio,
        admissible: ratio <= 1.0,
        saut_violations,
        saut2_holds: saut2_min_d.map(|d| d <= params.d_const),
        saut2_min_d,
        d_const: params.d_const,
    })
}

/// `ordering,m,n_final,threshold,ratio` table.
pub fn ordering_csv(rows: &[OrderingExperiment]) -> String {
    let mut out = String::from("ordering,m,n_final,threshold,ratio\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{:e}",
            r.ordering.name(),
            r.m,
            r.n_final,
            r.threshold,
            r.ratio
        );
    }
    out
}
