use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A continuous map `f: [0,1] → ℝ^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveMap {
    /// `f(t) = start + t·(end − start)`.
    Segment { start: Vec<f64>, end: Vec<f64> },
    /// Piecewise linear through `points`, uniformly parametrized.
    Polyline { points: Vec<Vec<f64>> },
    /// `f(t) = offset + (t, Σ_{k<terms} 2^{−βk}·dist(2^k t, ℤ))`: a Takagi-type
    /// graph that is β-Hölder but not Lipschitz when β < 1.
    Takagi {
        beta: f64,
        terms: u32,
        offset: Vec<f64>,
    },
}

impl CurveMap {
    pub fn validate(&self) -> Result<()> {
        let bad = |d: &str| Err(Error::invalid("curve map", d.to_string()));
        match self {
            CurveMap::Segment { start, end } => {
                if start.is_empty() || start.len() != end.len() {
                    return bad("segment endpoints must share a positive dimension");
                }
                if start.iter().chain(end).any(|x| !x.is_finite()) {
                    return bad("segment endpoints must be finite");
                }
            }
            CurveMap::Polyline { points } => {
                if points.len() < 2 {
                    return bad("polyline needs at least two points");
                }
                let d = points[0].len();
                if d == 0
                    || points
                        .iter()
                        .any(|p| p.len() != d || p.iter().any(|x| !x.is_finite()))
                {
                    return bad("polyline points must be finite and of equal positive dimension");
                }
            }
            CurveMap::Takagi {
                beta,
                terms,
                offset,
            } => {
                if !(*beta > 0.0 && *beta <= 1.0) {
                    return bad("Takagi exponent must lie in (0, 1]");
                }
                if *terms == 0 || *terms > 60 {
                    return bad("Takagi term count must lie in 1..=60");
                }
                if offset.len() != 2 || offset.iter().any(|x| !x.is_finite()) {
                    return bad("Takagi offset must be a finite point of the plane");
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            CurveMap::Segment { start, .. } => start.len(),
            CurveMap::Polyline { points } => points[0].len(),
            CurveMap::Takagi { .. } => 2,
        }
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let t = t.clamp(0.0, 1.0);
        match self {
            CurveMap::Segment { start, end } => start
                .iter()
                .zip(end)
                .map(|(s, e)| s + t * (e - s))
                .collect(),
            CurveMap::Polyline { points } => {
                let segs = points.len() - 1;
                let x = t * segs as f64;
                let i = (x.floor() as usize).min(segs - 1);
                let u = x - i as f64;
                points[i]
                    .iter()
                    .zip(&points[i + 1])
                    .map(|(p, q)| p + u * (q - p))
                    .collect()
            }
            CurveMap::Takagi {
                beta,
                terms,
                offset,
            } => {
                let mut acc = 0.0;
                for k in 0..*terms {
                    let y = t * 2f64.powi(k as i32);
                    let dist = (y - y.round()).abs();
                    acc += 2f64.powf(-beta * k as f64) * dist;
                }
                vec![offset[0] + t, offset[1] + acc]
            }
        }
    }

    /// Parameters of the polyline vertices strictly inside `(t0, t1)`.
    pub fn vertices_between(&self, t0: f64, t1: f64) -> Vec<f64> {
        match self {
            CurveMap::Polyline { points } => {
                let segs = (points.len() - 1) as f64;
                let first = (t0 * segs).floor() as usize + 1;
                (first..points.len() - 1)
                    .map(|i| i as f64 / segs)
                    .filter(|&t| t > t0 && t < t1)
                    .collect()
            }
            _ => Vec::new(),
        }
    }

    /// Largest Hölder exponent the map is guaranteed to have.
    pub fn natural_exponent(&self) -> f64 {
        match self {
            CurveMap::Takagi { beta, .. } => *beta,
            _ => 1.0,
        }
    }

    /// A sup-norm Hölder constant on `[0,1]` for the natural exponent, hence
    /// for every smaller exponent as well.
    pub fn holder_constant(&self) -> f64 {
        match self {
            CurveMap::Segment { start, end } => start
                .iter()
                .zip(end)
                .map(|(s, e)| (e - s).abs())
                .fold(0.0, f64::max),
            CurveMap::Polyline { points } => {
                let segs = (points.len() - 1) as f64;
                points
                    .windows(2)
                    .map(|w| {
                        w[0].iter()
                            .zip(&w[1])
                            .map(|(p, q)| (q - p).abs())
                            .fold(0.0, f64::max)
                            * segs
                    })
                    .fold(0.0, f64::max)
            }
            CurveMap::Takagi { beta: b, terms, .. } => {
                if *b >= 1.0 {
                    // each term is 1-Lipschitz after rescaling
                    return (*terms as f64).max(1.0);
                }
                let b = *b;
                let head = 2f64.powf(1.0 - b) / (2f64.powf(1.0 - b) - 1.0);
                let tail = 2f64.powf(-b) / (2.0 * (1.0 - 2f64.powf(-b)));
                (2f64.powf(b) * (head + tail)).max(1.0)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polyline_interpolates() {
        let c = CurveMap::Polyline {
            points: vec![vec![0.0, 0.0], vec![1.0, 2.0], vec![3.0, 2.0]],
        };
        assert_eq!(c.eval(0.25), vec![0.5, 1.0]);
        assert_eq!(c.eval(1.0), vec![3.0, 2.0]);
        assert_eq!(c.vertices_between(0.1, 0.9), vec![0.5]);
        assert_eq!(c.holder_constant(), 4.0);
    }

    #[test]
    fn takagi_constant_dominates_sampled_ratios() {
        let beta = 0.5;
        let c = CurveMap::Takagi {
            beta,
            terms: 20,
            offset: vec![1.0, 1.0],
        };
        let k = c.holder_constant();
        let mut worst: f64 = 0.0;
        for i in 0..400 {
            let t = i as f64 / 400.0;
            for h in [1e-1, 1e-2, 1e-3, 1e-4] {
                let s = (t + h).min(1.0);
                if s <= t {
                    continue;
                }
                let (p, q) = (c.eval(t), c.eval(s));
                let dist = p
                    .iter()
                    .zip(&q)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                worst = worst.max(dist / (s - t).powf(beta));
            }
        }
        assert!(worst <= k, "sampled ratio {worst} exceeds bound {k}");
    }
}
