//! Joint construction of a homogeneous covering and a time schedule with the
//! five covering properties: spacing, ball containment, separation, cross
//! sums and total sum.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::paramsets::{build_cover, CellSpec, CoverFamily, ParamSet, MAX_CELLS};

use super::sequence::{
    build_sequence, check_contraction, recursion_constants, RecursionConstants, RecursionParams,
    MAX_TIME,
};
use super::{box_far_distance, Schedule, ScheduleConstants, ScheduleEntry, ScheduleOrigin};

fn default_max_depth() -> usize {
    64
}

/// Inputs of the covering solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoveringParams {
    pub tau: f64,
    pub delta: f64,
    /// Minimal spacing `N`.
    pub spacing: u64,
    pub alpha: f64,
    pub beta: f64,
    /// Separation constant `D`.
    pub d_const: f64,
    #[serde(default = "default_max_depth")]
    pub max_depth: usize,
}

/// One schedule per piece of the pre-subdivided set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringSolution {
    /// Depth of the pre-subdivision (0 when the set was small enough).
    pub presubdivision_depth: usize,
    /// Largest covering constant the solver accepts for a piece.
    pub target_c: f64,
    pub constants: RecursionConstants,
    pub pieces: Vec<Schedule>,
}

impl CoveringSolution {
    pub fn verified(&self) -> bool {
        self.pieces.iter().all(Schedule::verified)
    }

    /// Worst margin of each property over all pieces.
    pub fn worst_margins(&self) -> BTreeMap<String, f64> {
        let mut out: BTreeMap<String, f64> = BTreeMap::new();
        for piece in &self.pieces {
            for (k, v) in &piece.margins {
                let slot = out.entry(k.clone()).or_insert(f64::INFINITY);
                *slot = slot.min(*v);
            }
        }
        out
    }
}

impl CoveringParams {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tau", self.tau),
            ("delta", self.delta),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("D", self.d_const),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(
                    "covering parameters",
                    format!("{name} must be positive, got {v}"),
                ));
            }
        }
        if self.spacing == 0 {
            return Err(Error::invalid(
                "covering parameters",
                "spacing N must be at least 1",
            ));
        }
        Ok(())
    }

    fn schedule_constants(&self) -> ScheduleConstants {
        ScheduleConstants {
            tau: self.tau,
            spacing: self.spacing,
            alpha: self.alpha,
            beta: Some(self.beta),
            delta: Some(self.delta),
            d_const: Some(self.d_const),
        }
    }
}

/// Upper bound of `Σ_{l=1}^{L} l^{−β}` (exact up to 10^6 terms, integral bound beyond).
fn power_sum_upper(beta: f64, len: f64) -> f64 {
    const DIRECT: f64 = 1e6;
    let direct = len.min(DIRECT) as u64;
    let mut sum: f64 = (1..=direct).rev().map(|l| (l as f64).powf(-beta)).sum();
    if len > DIRECT {
        sum += if (beta - 1.0).abs() < 1e-12 {
            (len / DIRECT).ln()
        } else {
            (len.powf(1.0 - beta) - DIRECT.powf(1.0 - beta)) / (1.0 - beta)
        };
    }
    sum * (1.0 + 1e-12)
}

/// Builds a covering of `set` with a schedule satisfying the five covering
/// properties, pre-subdividing the set when its covering constant is too large.
pub fn solve_covering(set: &ParamSet, params: &CoveringParams) -> Result<CoveringSolution> {
    params.validate()?;
    set.validate()?;
    let k = set.cover_constants()?;
    let (r, rho) = (k.r, k.rho);
    check_contraction(params.alpha, rho, r)?;
    if rho.powf(params.beta / params.alpha) * r as f64 >= 1.0 {
        return Err(Error::Divergence(format!(
            "precondition rho^(beta/alpha)*r < 1 (alpha*gamma < beta) violated: alpha*gamma = {}, beta = {}",
            params.alpha * k.gamma,
            params.beta
        )));
    }
    let constants = recursion_constants(params.alpha, rho, r)?;
    let target_c = params.d_const / ((2.0 * constants.c1).powf(params.alpha) / rho);
    let (depth, pieces) = set.presubdivide(target_c)?;
    let max_cells = MAX_CELLS / pieces.len();
    let solved = par::map(&pieces, |piece| {
        solve_piece(piece, params, &constants, max_cells)
    });
    let pieces = solved.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(CoveringSolution {
        presubdivision_depth: depth,
        target_c,
        constants,
        pieces,
    })
}

/// `max_cells` is the share of the global cell cap left to this piece.
fn solve_piece(
    piece: &ParamSet,
    params: &CoveringParams,
    constants: &RecursionConstants,
    max_cells: usize,
) -> Result<Schedule> {
    let k = piece.cover_constants()?;
    let (r, rho, c_set) = (k.r, k.rho, k.c_lambda);
    let (alpha, beta, delta) = (params.alpha, params.beta, params.delta);
    let (c1, c2) = (constants.c1, constants.c2);
    let rf = r as f64;
    let n_floor = (3.0 / delta).powf(1.0 / beta);
    if c_set <= 0.0 {
        let n1 = params.spacing.max(n_floor.ceil() as u64);
        let cloud = piece.samples()?;
        let entry = ScheduleEntry {
            index: Vec::new(),
            n: n1,
            anchor: cloud.point(0).to_vec(),
            cell: CellSpec::Address { digits: Vec::new() },
            diameter: 0.0,
            margins: BTreeMap::new(),
        };
        let origin = ScheduleOrigin::Covering {
            r,
            m: 0,
            n1,
            gap: params.spacing,
            s: 0,
            kappa: f64::MAX,
            c1,
            c2,
        };
        let mut schedule = Schedule {
            set: piece.clone(),
            constants: params.schedule_constants(),
            origin,
            entries: vec![entry],
            margins: BTreeMap::new(),
        };
        schedule.margins = verify_entries(
            &mut schedule,
            &[(cloud.point(0).to_vec(), cloud.point(0).to_vec())],
        );
        return Ok(schedule);
    }
    let log_kappa = (params.tau.ln() - c_set.ln()) / alpha - (4.0 * c1).ln();
    // minimal s ≥ 1 with r κ^{−β} x^s / (1 − x) < δ/3, x = r ρ^{β/α}
    let x = rf * rho.powf(beta / alpha);
    let s_tail = |s: u32| rf.ln() - beta * log_kappa + s as f64 * x.ln() - (1.0 - x).ln();
    let mut s = 1u32;
    while s_tail(s) >= (delta / 3.0).ln() {
        s += 1;
        if s > 400 {
            return Err(Error::capacity(
                "covering",
                "no tail index s with r·κ^{-β}·Σ(rρ^{β/α})^p < δ/3",
            ));
        }
    }
    // minimal integer gap A ≥ N with Σ_{l ≤ r^{s+1}} 1/(l A)^β < δ/3
    let h = power_sum_upper(beta, rf.powi(s as i32 + 1));
    let mut gap = ((3.0 * h / delta).powf(1.0 / beta).floor() as u64 + 1).max(params.spacing);
    while h / (gap as f64).powf(beta) >= delta / 3.0 {
        gap += 1;
    }
    if gap as f64 > MAX_TIME as f64 {
        return Err(Error::capacity(
            "covering",
            format!("gap A = {gap} exceeds 2^53 (inequality Σ 1/(lA)^β < δ/3)"),
        ));
    }
    // minimal depth m with ⌊(1/(2c1))(τ/(ρ^m C))^{1/α}⌋ ≥ max((3/δ)^{1/β}, 2 + (c2/c1)A r^m, N)
    let mut found = None;
    for m in 1..=params.max_depth {
        let log_n1 = (params.tau.ln() - m as f64 * rho.ln() - c_set.ln()) / alpha - (2.0 * c1).ln();
        let growth = 2.0 + c2 / c1 * gap as f64 * rf.powi(m as i32);
        let n1 = log_n1.exp().floor();
        let ok = n1 >= n_floor && n1 >= growth && n1 >= params.spacing as f64;
        let cells = rf.powi(m as i32);
        if ok {
            if cells > max_cells as f64 {
                return Err(Error::capacity("covering", format!("feasible depth m = {m} needs {cells} cells per piece, above the cap {max_cells}")));
            }
            if n1 * 2.0 * c1 > MAX_TIME as f64 {
                return Err(Error::capacity(
                    "covering",
                    format!("n1 = {n1} at depth {m} would push times past 2^53"),
                ));
            }
            found = Some((m, n1 as u64));
            break;
        }
        let binding = if n1 < growth {
            "2 + (c2/c1)·A·r^m ≤ n1"
        } else if n1 < n_floor {
            "(3/δ)^{1/β} ≤ n1"
        } else {
            "N ≤ n1"
        };
        if cells * rf > max_cells as f64 || n1 > MAX_TIME as f64 {
            return Err(Error::capacity(
                "covering",
                format!("inequality {binding} still fails at depth {m} (n1 = {n1:e}, needs {growth:e}) before the cell or 2^53 limit"),
            ));
        }
        if m == params.max_depth {
            return Err(Error::capacity(
                "covering",
                format!("inequality {binding} fails up to depth {m}"),
            ));
        }
    }
    let (m, n1) = found.expect("loop either finds a depth or returns");
    let times = build_sequence(&RecursionParams::new(alpha, rho, r, m, n1, gap))?;
    let cover = build_cover(piece, m)?;
    let entries = cover
        .cells
        .iter()
        .zip(&times)
        .map(|(cell, &n)| {
            let CellSpec::Address { digits } = &cell.spec else {
                unreachable!("canonical cells are addressed")
            };
            ScheduleEntry {
                index: digits.clone(),
                n,
                anchor: cell.anchor.clone(),
                cell: cell.spec.clone(),
                diameter: cell.diam_bound,
                margins: BTreeMap::new(),
            }
        })
        .collect();
    let origin = ScheduleOrigin::Covering {
        r,
        m,
        n1,
        gap,
        s,
        kappa: log_kappa.exp(),
        c1,
        c2,
    };
    let mut schedule = Schedule {
        set: piece.clone(),
        constants: params.schedule_constants(),
        origin,
        entries,
        margins: BTreeMap::new(),
    };
    schedule.margins = verify_covering(&mut schedule, &cover)?;
    Ok(schedule)
}

/// Checks the five covering properties against the cells of `cover`
/// (sample bounds, or exact boxes for cubes), storing per-entry margins.
pub fn verify_covering(
    schedule: &mut Schedule,
    cover: &CoverFamily,
) -> Result<BTreeMap<String, f64>> {
    if cover.cells.len() != schedule.entries.len() {
        return Err(Error::invalid(
            "covering check",
            format!(
                "{} cells for {} entries",
                cover.cells.len(),
                schedule.entries.len()
            ),
        ));
    }
    let boxes: Vec<(Vec<f64>, Vec<f64>)> = cover
        .cells
        .iter()
        .map(|c| (c.lo.clone(), c.hi.clone()))
        .collect();
    Ok(verify_entries(schedule, &boxes))
}

fn verify_entries(
    schedule: &mut Schedule,
    boxes: &[(Vec<f64>, Vec<f64>)],
) -> BTreeMap<String, f64> {
    let k = schedule.constants;
    let (alpha, beta) = (k.alpha, k.beta.unwrap_or(1.0));
    let delta = k.delta.unwrap_or(f64::INFINITY);
    let d_const = k.d_const.unwrap_or(f64::INFINITY);
    let times: Vec<f64> = schedule.entries.iter().map(|e| e.n as f64).collect();
    let q = times.len();
    let spacing = k.spacing as f64;
    let mut margins = BTreeMap::new();
    let gaps = times
        .windows(2)
        .map(|w| w[1] - w[0] - spacing)
        .fold(f64::INFINITY, f64::min);
    margins.insert("a_spacing".to_string(), (times[0] - spacing).min(gaps));
    let per_entry: Vec<(f64, f64, f64)> = par::map_range(q, |i| {
        let (lo, hi) = &boxes[i];
        let anchor = &schedule.entries[i].anchor;
        let radius = (0..lo.len())
            .map(|c| (anchor[c] - lo[c]).abs().max((hi[c] - anchor[c]).abs()))
            .fold(0.0, f64::max);
        let ball = k.tau / times[i].powf(alpha) - radius;
        let mut sep = f64::INFINITY;
        let mut cross = 0.0;
        for j in 0..q {
            if j == i {
                continue;
            }
            cross += (times[j] - times[i]).abs().powf(-beta);
            if j > i {
                let allowed = d_const * ((times[j] - times[i]) / times[j]).powf(alpha);
                sep = sep.min(allowed - box_far_distance(lo, hi, &boxes[j].0, &boxes[j].1));
            }
        }
        (ball, sep, delta - cross)
    });
    let total: f64 = times.iter().map(|n| n.powf(-beta)).sum();
    for (entry, &(ball, sep, cross)) in schedule.entries.iter_mut().zip(&per_entry) {
        entry.margins.insert("b_ball".into(), ball);
        entry.margins.insert("d_cross_sum".into(), cross);
        if sep.is_finite() {
            entry.margins.insert("c_separation".into(), sep);
        }
    }
    let worst =
        |f: fn(&(f64, f64, f64)) -> f64| per_entry.iter().map(f).fold(f64::INFINITY, f64::min);
    margins.insert("b_ball".into(), worst(|t| t.0));
    margins.insert("c_separation".into(), worst(|t| t.1).min(f64::MAX));
    margins.insert("d_cross_sum".into(), worst(|t| t.2));
    margins.insert("e_total_sum".into(), delta - total);
    margins
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(tau: f64) -> CoveringParams {
        CoveringParams {
            tau,
            delta: 0.1,
            spacing: 10,
            alpha: 0.4,
            beta: 0.9,
            d_const: 1.0,
            max_depth: 64,
        }
    }

    #[test]
    fn power_sum_bound_is_upper() {
        let exact: f64 = (1..=2_000_000u64).map(|l| (l as f64).powf(-0.9)).sum();
        let bound = power_sum_upper(0.9, 2e6);
        assert!(bound >= exact && bound - exact < 1e-3 * exact);
    }

    #[test]
    fn single_point_gives_one_entry() {
        let set = ParamSet::new(crate::paramsets::SetKind::Point {
            coords: vec![1.5, 1.5],
        });
        let sol = solve_covering(&set, &params(1.0)).unwrap();
        assert_eq!(sol.pieces.len(), 1);
        let s = &sol.pieces[0];
        assert_eq!(s.len(), 1);
        assert!(s.entries[0].n >= 10);
        assert!(s.verified(), "{:?}", s.margins);
    }

    #[test]
    fn square_covering_verifies() {
        let set = ParamSet::cube(vec![1.0, 1.0], 1.0).with_budget(40_000);
        let sol = solve_covering(&set, &params(5.0)).unwrap();
        assert!(sol.presubdivision_depth >= 1);
        assert!(sol.verified(), "{:?}", sol.worst_margins());
        let s = &sol.pieces[0];
        assert!(s.times().windows(2).all(|w| w[1] - w[0] >= 10));
    }

    #[test]
    fn equal_exponents_diverge() {
        let set = ParamSet::cube(vec![0.0, 0.0], 1.0);
        let p = CoveringParams {
            beta: 0.8,
            ..params(1.0)
        };
        assert!(matches!(
            solve_covering(&set, &p),
            Err(Error::Divergence(_))
        ));
    }

    #[test]
    fn tiny_tau_reports_binding_inequality() {
        let set = ParamSet::cube(vec![0.0, 0.0], 1.0);
        let err = solve_covering(&set, &params(1e-6)).unwrap_err();
        assert!(
            matches!(err, Error::Capacity { ref detail, .. } if detail.contains("inequality")),
            "{err}"
        );
    }
}
