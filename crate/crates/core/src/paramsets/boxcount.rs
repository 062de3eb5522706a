use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{Geometry, ParamSet};

/// Exact count of half-open `2^{-m}`-mesh boxes meeting the comb set with
/// teeth up to `depth_cap` (mesh anchored at `(1,1)`, top boundary clamped
/// into the last box).
pub fn comb_box_count(m: u32, depth_cap: u32) -> u64 {
    let side = 1u64 << m;
    let top_row = |n: u64| (side / n).min(side - 1);
    let mut total = 0u64;
    for col in 0..side {
        let tallest = if col == 0 {
            Some(m as u64 + 1)
        } else {
            Some((m - col.trailing_zeros()).max(1) as u64)
        };
        total += match tallest.filter(|&n| n <= depth_cap as u64) {
            Some(n) => top_row(n) + 1,
            None => 1,
        };
    }
    total
}

/// Number of `ε`-mesh boxes meeting the set.
///
/// Cubes and the unrestricted comb at dyadic `ε` are counted analytically;
/// other sets are counted on their sample cloud (a lower bound for `N(ε)`).
pub fn box_count(set: &ParamSet, eps: f64) -> Result<u64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid(
            "box size",
            format!("{eps} must be positive"),
        ));
    }
    match set.geometry()? {
        Geometry::Grid {
            width,
            corner,
            comb: None,
            ..
        } => {
            let per_axis = (width / eps - 1e-9).ceil().max(1.0);
            return Ok(per_axis.powi(corner.len() as i32) as u64);
        }
        Geometry::Grid {
            comb: Some(cap), ..
        } if set.prefix.is_empty() => {
            let m = -eps.log2();
            if (m - m.round()).abs() < 1e-12 && m.round() >= 1.0 && m.round() <= 40.0 {
                return Ok(comb_box_count(m.round() as u32, cap));
            }
        }
        _ => {}
    }
    let cloud = set.samples()?;
    if eps <= cloud.resolution {
        return Err(Error::Resolution {
            requested: eps,
            resolution: cloud.resolution,
        });
    }
    let (lo, _) = cloud.bounds().expect("nonempty cloud");
    let index = |p: &[f64], k: usize| ((p[k] - lo[k]) / eps).floor() as i64;
    if cloud.dim() <= 4 {
        let bits = 128 / cloud.dim();
        let boxes: HashSet<u128> = cloud
            .points()
            .map(|p| (0..p.len()).fold(0u128, |acc, k| (acc << bits) | index(p, k) as u128))
            .collect();
        Ok(boxes.len() as u64)
    } else {
        let boxes: HashSet<Vec<i64>> = cloud
            .points()
            .map(|p| (0..p.len()).map(|k| index(p, k)).collect())
            .collect();
        Ok(boxes.len() as u64)
    }
}

/// Least-squares slope of `log N(2^{-m})` against `m·log 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDimEstimate {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit (in natural-log units).
    pub residual: f64,
    pub counts: Vec<(usize, u64)>,
}

pub fn box_dim_estimate(set: &ParamSet, depths: &[usize]) -> Result<BoxDimEstimate> {
    if depths.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} depths given, at least 3 needed",
            depths.len()
        )));
    }
    let counts = depths
        .iter()
        .map(|&m| Ok((m, box_count(set, 2f64.powi(-(m as i32)))?)))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = counts.iter().map(|(m, _)| *m as f64 * 2f64.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|(_, n)| (*n as f64).ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    Ok(BoxDimEstimate {
        slope,
        intercept,
        residual,
        counts,
    })
}
