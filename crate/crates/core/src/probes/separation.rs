use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::seqspace::{LogCoeff, SparseLogVector, TruncatedVector, WeightFamily};

use super::ProbeStatus;

/// Largest number of grid points a diameter scan may visit.
const MAX_GRID_POINTS: usize = 100_000_000;
/// Grid points handled per parallel task.
const CHUNK: usize = 4096;

/// Separation rate `ψ(n) = (C/2) n^α`, where `C n^α = inf_a ∂f_n/∂a` over
/// the family's domain is the lower Lipschitz constant of `f_n`.
pub fn psi(w: &WeightFamily, n: usize) -> f64 {
    0.5 * w.rate_bounds(n).0
}

fn check_tuple(w: &WeightFamily, lambda: &[f64], xs: &[TruncatedVector], what: &str) -> Result<()> {
    if lambda.len() != xs.len() || lambda.is_empty() {
        return Err(Error::invalid(
            what,
            format!("{} parameters for {} coordinates", lambda.len(), xs.len()),
        ));
    }
    for &a in lambda {
        w.check_param(a)?;
    }
    Ok(())
}

/// `T_λ^n x` of one coordinate in log form.
fn shifted(w: &WeightFamily, a: f64, x: &TruncatedVector, n: usize) -> SparseLogVector {
    let mut y = SparseLogVector::new();
    for (m, c) in x.nonzeros() {
        if m >= n {
            y.add_at(
                m - n,
                LogCoeff::from_value(c).scale_log(w.increment(a, m - n, n)),
            );
        }
    }
    y
}

fn subtract(y: &mut SparseLogVector, x: &SparseLogVector) {
    for (m, c) in x.iter() {
        y.add_at(m, LogCoeff::new(c.log_mag, !c.negative));
    }
}

fn tuple_norm(parts: impl Iterator<Item = SparseLogVector>, x: &[TruncatedVector]) -> f64 {
    let norm = x[0].norm_tag();
    parts
        .map(|y| y.log_norm(norm))
        .fold(f64::NEG_INFINITY, f64::max)
        .exp()
}

/// `‖T_λ^n u − v‖` with the max-of-coordinates norm on d-tuples.
pub fn orbit_distance(
    w: &WeightFamily,
    lambda: &[f64],
    u: &[TruncatedVector],
    v: &[TruncatedVector],
    n: usize,
) -> Result<f64> {
    check_tuple(w, lambda, u, "orbit distance")?;
    if v.len() != u.len() {
        return Err(Error::invalid(
            "orbit distance",
            "u and v differ in dimension",
        ));
    }
    for x in u {
        w.check_index(x.support_end())?;
    }
    let parts = (0..u.len()).map(|i| {
        let mut y = shifted(w, lambda[i], &u[i], n);
        let mut vi = SparseLogVector::new();
        for (m, c) in v[i].nonzeros() {
            vi.add_at(m, LogCoeff::from_value(c));
        }
        subtract(&mut y, &vi);
        y
    });
    Ok(tuple_norm(parts, u))
}

/// Both sides of `‖T_λ^n u − T_μ^n u‖ ≥ ψ(n)‖λ − μ‖`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationResult {
    pub status: ProbeStatus,
    pub lhs: f64,
    pub rhs: f64,
    pub psi: f64,
    /// `‖T_λ^n u − v‖` and `‖T_μ^n u − v‖`.
    pub distance_lambda: f64,
    pub distance_mu: f64,
}

/// Checks the separation inequality when both orbits are `δ`-close to `v`;
/// otherwise reports `not_applicable`.
#[allow(clippy::too_many_arguments)]
pub fn separation_bound(
    w: &WeightFamily,
    lambda: &[f64],
    mu: &[f64],
    n: usize,
    u: &[TruncatedVector],
    v: &[TruncatedVector],
    delta: f64,
) -> Result<SeparationResult> {
    check_tuple(w, mu, u, "separation")?;
    let distance_lambda = orbit_distance(w, lambda, u, v, n)?;
    let distance_mu = orbit_distance(w, mu, u, v, n)?;
    let parts = (0..u.len()).map(|i| {
        let mut y = shifted(w, lambda[i], &u[i], n);
        subtract(&mut y, &shifted(w, mu[i], &u[i], n));
        y
    });
    let lhs = tuple_norm(parts, u);
    let psi = psi(w, n);
    let gap = lambda
        .iter()
        .zip(mu)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let rhs = psi * gap;
    let status = if !(distance_lambda < delta && distance_mu < delta) {
        ProbeStatus::NotApplicable
    } else if lhs >= rhs {
        ProbeStatus::Pass
    } else {
        ProbeStatus::Fail
    };
    Ok(SeparationResult {
        status,
        lhs,
        rhs,
        psi,
        distance_lambda,
        distance_mu,
    })
}

/// Rectangular lattice `lo + step·ℤ^d` clipped to `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamGrid {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub step: f64,
}

impl ParamGrid {
    fn sides(&self) -> Result<Vec<usize>> {
        if self.lo.len() != self.hi.len() || self.lo.is_empty() || !(self.step > 0.0) {
            return Err(Error::invalid(
                "grid",
                "needs matching non-empty bounds and a positive step",
            ));
        }
        let sides: Vec<usize> = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| ((b - a) / self.step * (1.0 + 1e-12)).floor().max(0.0) as usize + 1)
            .collect();
        let total = sides.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s));
        match total {
            Some(t) if t <= MAX_GRID_POINTS => Ok(sides),
            _ => Err(Error::capacity(
                "grid",
                format!("more than {MAX_GRID_POINTS} points"),
            )),
        }
    }

    fn point(&self, sides: &[usize], mut idx: usize) -> Vec<f64> {
        sides
            .iter()
            .zip(&self.lo)
            .map(|(&s, &lo)| {
                let j = idx % s;
                idx /= s;
                lo + j as f64 * self.step
            })
            .collect()
    }
}

/// Diameter of the admissible set `{λ : ‖T_λ^n u − v‖ < δ}` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterResult {
    pub n: usize,
    pub hits: usize,
    /// Sup-norm diameter of the hits (0 with fewer than two).
    pub diameter: f64,
    /// `2δ/ψ(n)`.
    pub bound: f64,
    pub grid_step: f64,
    /// `diameter ≤ bound + 2·step`; `n = 0` is not asserted.
    pub status: ProbeStatus,
}

/// Scans `grid` for parameters whose `n`-th orbit point is `δ`-close to `v`.
pub fn admissible_diameter(
    w: &WeightFamily,
    u: &[TruncatedVector],
    v: &[TruncatedVector],
    n: usize,
    delta: f64,
    grid: &ParamGrid,
) -> Result<DiameterResult> {
    let sides = grid.sides()?;
    if sides.len() != u.len() {
        return Err(Error::invalid("grid", "dimension differs from the vectors"));
    }
    let total: usize = sides.iter().product();
    let chunks = total.div_ceil(CHUNK);
    let d = sides.len();
    let parts = par::map_range(chunks, |c| -> Result<(usize, Vec<f64>, Vec<f64>)> {
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        let mut hits = 0;
        for idx in c * CHUNK..((c + 1) * CHUNK).min(total) {
            let p = grid.point(&sides, idx);
            if p.iter().any(|&a| !w.domain.contains(a)) {
                continue;
            }
            if orbit_distance(w, &p, u, v, n)? < delta {
                hits += 1;
                for i in 0..d {
                    lo[i] = lo[i].min(p[i]);
                    hi[i] = hi[i].max(p[i]);
                }
            }
        }
        Ok((hits, lo, hi))
    });
    let mut hits = 0;
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for part in parts {
        let (h, l, u) = part?;
        hits += h;
        for i in 0..d {
            lo[i] = lo[i].min(l[i]);
            hi[i] = hi[i].max(u[i]);
        }
    }
    let diameter = if hits < 2 {
        0.0
    } else {
        lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max)
    };
    let rate = psi(w, n);
    let bound = if rate > 0.0 {
        2.0 * delta / rate
    } else {
        f64::INFINITY
    };
    let status = if n == 0 || !bound.is_finite() {
        ProbeStatus::NotApplicable
    } else if diameter <= bound + 2.0 * grid.step {
        ProbeStatus::Pass
    } else {
        ProbeStatus::Fail
    };
    Ok(DiameterResult {
        n,
        hits,
        diameter,
        bound,
        grid_step: grid.step,
        status,
    })
}

/// `n,diameter,bound,hits,status` table.
pub fn diameter_csv(rows: &[DiameterResult]) -> String {
    let mut out = String::from("n,diameter,bound,hits,status\n");
    for r in rows {
        let status = serde_json::to_value(r.status)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{:e},{:e},{},{}",
            r.n, r.diameter, r.bound, r.hits, status
        );
    }
    out
}
