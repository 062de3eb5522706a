//! The five clauses of the basic criterion, checked on a schedule whose
//! entries carry cells `Λ_k`, anchors `λ_k` and times `n_k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::paramsets::SampleCloud;
use crate::schedule::Schedule;
use crate::seqspace::{
    LogCoeff, LogNormAcc, Norm, SparseLogVector, TruncatedVector, WeightFamily, DEFAULT_BUDGET,
    OVERFLOW_GUARD,
};

use super::{argmin, BoxIndex, Clause, CriterionReport, Witness};

/// Sampling and truncation settings of the basic-criterion check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasicOptions {
    /// Test points per coordinate inside each cell for (BC3)–(BC5).
    #[serde(default = "default_density")]
    pub density: usize,
    /// Largest index `n_q + support` the forward sums may reach.
    #[serde(default = "default_budget")]
    pub budget: usize,
}

fn default_density() -> usize {
    5
}

fn default_budget() -> usize {
    DEFAULT_BUDGET
}

impl Default for BasicOptions {
    fn default() -> Self {
        BasicOptions {
            density: default_density(),
            budget: default_budget(),
        }
    }
}

/// Nonzero coefficients `(m, log|x_m|, x_m < 0)` of a vector.
fn log_support(x: &TruncatedVector) -> Vec<(usize, f64, bool)> {
    x.nonzeros()
        .map(|(m, c)| (m, c.abs().ln(), c < 0.0))
        .collect()
}

/// `ε − exp(log_value)` as a strict clause, indeterminate past the overflow guard.
fn eps_clause(id: &str, log_value: f64, eps: f64, witness: Witness) -> Clause {
    if log_value.is_nan() || log_value > OVERFLOW_GUARD {
        return Clause::indeterminate(
            id,
            witness,
            format!("log-magnitude {log_value:.1} beyond the overflow guard"),
        );
    }
    Clause::strict(id, eps - log_value.exp(), witness)
}

/// Worst log-norm over entries and test points, with its witness.
fn worst_over_points(per_entry: Vec<(f64, Witness)>) -> (f64, Witness) {
    let (neg, w) = argmin(per_entry.into_iter().map(|(v, w)| (-v, w)));
    (-neg, w)
}

/// Checks (BC1)–(BC5) for `T_λ = B_{w(λ)}` and `S_λ` its forward right inverse,
/// with the max-of-coordinates norm on d-tuples:
/// (BC1) the cells cover the set (on samples);
/// (BC2) `‖Σ_k S_{λ_k}^{n_k} v‖ < ε`;
/// (BC3) `‖Σ_{j≠k} T_λ^{n_k} S_{λ_j}^{n_j} v‖ < ε` for `λ ∈ Λ_k`;
/// (BC4) `‖T_λ^{n_k} u‖ < ε` for `λ ∈ Λ_k`;
/// (BC5) `‖T_λ^{n_k} S_{λ_k}^{n_k} v − v‖ < ε` for `λ ∈ Λ_k`.
/// (BC3)–(BC5) are evaluated at `density` test points per coordinate of each cell.
pub fn check_basic_criterion(
    schedule: &Schedule,
    w: &WeightFamily,
    u: &[TruncatedVector],
    v: &[TruncatedVector],
    eps: f64,
    opts: &BasicOptions,
) -> Result<CriterionReport> {
    let d = schedule.dim();
    if schedule.is_empty() {
        return Err(Error::invalid("schedule", "empty schedule"));
    }
    if u.len() != d || v.len() != d {
        return Err(Error::invalid(
            "vector tuple",
            format!(
                "expected {d} coordinates, got u: {}, v: {}",
                u.len(),
                v.len()
            ),
        ));
    }
    if !(eps > 0.0) {
        return Err(Error::invalid("epsilon", "must be positive"));
    }
    let norm = v[0].norm_tag();
    let e = &schedule.entries;
    let times = schedule.times();
    let n_max = *times.iter().max().expect("non-empty") as usize;
    let support = v
        .iter()
        .chain(u)
        .map(TruncatedVector::support_end)
        .max()
        .unwrap_or(0);
    if n_max.saturating_add(support) > opts.budget {
        return Err(Error::capacity(
            "BC2",
            format!(
                "n_q + support = {} exceeds truncation budget {}",
                n_max + support,
                opts.budget
            ),
        ));
    }
    w.check_index(n_max + support)?;
    for entry in e {
        for &a in &entry.anchor {
            w.check_param(a)?;
        }
    }
    let set = &schedule.set;
    let points: Vec<Result<Vec<Vec<f64>>>> =
        par::map(e, |entry| set.cell_points(&entry.cell, opts.density));
    let points = points.into_iter().collect::<Result<Vec<_>>>()?;
    for p in points.iter().flatten() {
        for &a in p {
            w.check_param(a)?;
        }
    }
    let vs: Vec<Vec<(usize, f64, bool)>> = v.iter().map(log_support).collect();
    let us: Vec<Vec<(usize, f64, bool)>> = u.iter().map(log_support).collect();

    let bc1 = coverage(schedule)?;

    // (BC2): coefficient at m + n_k is v_m exp(−(f_{m+n_k}(λ_k) − f_m(λ_k)))
    let bc2 = {
        let per: Vec<(f64, Witness)> = (0..d)
            .map(|i| {
                let mut acc = SparseLogVector::new();
                for entry in e {
                    for &(m, lv, neg) in &vs[i] {
                        let n = entry.n as usize;
                        acc.add_at(
                            m + n,
                            LogCoeff::new(lv - w.increment(entry.anchor[i], m, n), neg),
                        );
                    }
                }
                (
                    acc.log_norm(norm),
                    Witness {
                        coordinate: Some(i),
                        ..Witness::default()
                    },
                )
            })
            .collect();
        let (log, witness) = worst_over_points(per);
        eps_clause("bc2", log, eps, witness)
    };

    let fast = cross_fast_path(schedule, w, support, norm);
    let log_v: Vec<f64> = v.iter().map(|x| x.norm().ln()).collect();
    let sorted = times.windows(2).all(|p| p[0] <= p[1]);
    let per_entry = par::map_range(e.len(), |k| {
        let nk = e[k].n as usize;
        let mut worst3 = (f64::NEG_INFINITY, Witness::default());
        let mut worst4 = (f64::NEG_INFINITY, Witness::default());
        let mut worst5 = (f64::NEG_INFINITY, Witness::default());
        let first_overlap = if sorted {
            times.partition_point(|&t| (t as usize) + support <= nk)
        } else {
            0
        };
        for p in &points[k] {
            let witness = || Witness {
                entry: Some(k),
                point: Some(p.clone()),
                ..Witness::default()
            };
            let mut log3 = f64::NEG_INFINITY;
            let mut log4 = f64::NEG_INFINITY;
            let mut log5 = f64::NEG_INFINITY;
            for i in 0..d {
                let lam = p[i];
                // (BC3)
                let l3 = match &fast {
                    Some(suffix) => {
                        let phi = w.shift_invariant_rate(lam).expect("shift-invariant");
                        phi * nk as f64 + suffix[k][i] + log_v[i]
                    }
                    None => {
                        let mut acc = SparseLogVector::new();
                        for (j, other) in e.iter().enumerate().skip(first_overlap) {
                            if j == k {
                                continue;
                            }
                            let nj = other.n as usize;
                            for &(m, lv, neg) in &vs[i] {
                                if m + nj < nk {
                                    continue;
                                }
                                let idx = m + nj - nk;
                                let log = lv - w.increment(other.anchor[i], m, nj)
                                    + w.increment(lam, idx, nk);
                                acc.add_at(idx, LogCoeff::new(log, neg));
                            }
                        }
                        acc.log_norm(norm)
                    }
                };
                log3 = log3.max(l3);
                // (BC4): index m − n_k receives u_m exp(f_m(λ) − f_{m−n_k}(λ))
                let mut acc = LogNormAcc::new(norm);
                for &(m, lv, _) in &us[i] {
                    if m >= nk {
                        acc.push(lv + w.increment(lam, m - nk, nk));
                    }
                }
                log4 = log4.max(acc.log_value());
                // (BC5): coefficient m is v_m (exp(Δ_m(λ) − Δ_m(λ_k)) − 1)
                let mut acc = LogNormAcc::new(norm);
                for &(m, lv, _) in &vs[i] {
                    let diff = w.increment(lam, m, nk) - w.increment(e[k].anchor[i], m, nk);
                    let factor = diff.exp_m1().abs();
                    if factor > 0.0 {
                        acc.push(lv + factor.ln());
                    }
                }
                log5 = log5.max(acc.log_value());
            }
            if log3 > worst3.0 || (log3.is_nan() && !worst3.0.is_nan()) {
                worst3 = (log3, witness());
            }
            if log4 > worst4.0 {
                worst4 = (log4, witness());
            }
            if log5 > worst5.0 {
                worst5 = (log5, witness());
            }
        }
        [worst3, worst4, worst5]
    });
    let mut columns: [Vec<(f64, Witness)>; 3] = Default::default();
    for row in per_entry {
        for (c, x) in columns.iter_mut().zip(row) {
            c.push(x);
        }
    }
    let [c3, c4, c5] = columns;
    let note = format!(
        "sampled at {} points per coordinate per cell",
        opts.density.max(2)
    );
    let (l3, w3) = worst_over_points(c3);
    let (l4, w4) = worst_over_points(c4);
    let (l5, w5) = worst_over_points(c5);
    Ok(CriterionReport::new(
        "basic",
        vec![
            bc1,
            bc2,
            eps_clause("bc3", l3, eps, w3).with_note(note.clone()),
            eps_clause("bc4", l4, eps, w4).with_note(note.clone()),
            eps_clause("bc5", l5, eps, w5).with_note(note),
        ],
    ))
}

/// For shift-invariant weights with consecutive gaps at least the support of
/// `v`, the (BC3) blocks are disjoint and those with `j < k` vanish, so the
/// norm is `exp(φ(λ) n_k) ‖(exp(−φ(λ_j(i)) n_j))_{j>k}‖ ‖v_i‖`. Returns the
/// suffix log-norms per entry and coordinate.
fn cross_fast_path(
    schedule: &Schedule,
    w: &WeightFamily,
    support: usize,
    norm: Norm,
) -> Option<Vec<Vec<f64>>> {
    let e = &schedule.entries;
    w.shift_invariant_rate(w.domain.lo)?;
    if e.windows(2)
        .any(|p| (p[1].n as usize) < p[0].n as usize + support)
    {
        return None;
    }
    let rates = super::carac::shift_invariant_rates(schedule, w)?;
    let (d, q) = (schedule.dim(), e.len());
    let mut suffix = vec![vec![f64::NEG_INFINITY; d]; q];
    for i in 0..d {
        let mut acc = LogNormAcc::new(norm);
        for k in (0..q).rev() {
            suffix[k][i] = acc.log_value();
            acc.push(-rates[k][i] * e[k].n as f64);
        }
    }
    Some(suffix)
}

/// Finds the entries whose cells contain a given sample of the schedule's set.
pub(crate) struct CellLocator {
    index: BoxIndex,
}

impl CellLocator {
    pub(crate) fn new(schedule: &Schedule, cloud: &SampleCloud) -> Result<Self> {
        let set = &schedule.set;
        let slack = 1e-9 * cloud.diameter().max(1.0);
        let bounds: Vec<Result<(Vec<f64>, Vec<f64>)>> =
            par::map(&schedule.entries, |entry| set.cell_bounds(&entry.cell, 9));
        let boxes = bounds
            .into_iter()
            .map(|b| {
                b.map(|(lo, hi)| {
                    (
                        lo.iter().map(|x| x - slack).collect(),
                        hi.iter().map(|x| x + slack).collect(),
                    )
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CellLocator {
            index: BoxIndex::new(boxes),
        })
    }

    /// Entries (in schedule order) whose cell contains sample `i` of `cloud`.
    pub(crate) fn containing(
        &self,
        schedule: &Schedule,
        cloud: &SampleCloud,
        i: usize,
    ) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for b in self.index.candidates(cloud.point(i)) {
            if schedule
                .set
                .cell_contains(&schedule.entries[b].cell, cloud, i)?
            {
                out.push(b);
            }
        }
        out.sort_unstable();
        Ok(out)
    }
}

/// (BC1): every sample of the set lies in the cell of some entry.
fn coverage(schedule: &Schedule) -> Result<Clause> {
    let cloud = schedule.set.samples()?;
    let locator = CellLocator::new(schedule, &cloud)?;
    let found = par::map_range(cloud.len(), |i| {
        locator
            .containing(schedule, &cloud, i)
            .map(|c| !c.is_empty())
    });
    let mut missed = 0usize;
    let mut first = None;
    for (i, f) in found.into_iter().enumerate() {
        if !f? {
            missed += 1;
            first.get_or_insert(i);
        }
    }
    let note = format!(
        "{} samples at resolution {:.3e}",
        cloud.len(),
        cloud.resolution
    );
    Ok(match first {
        None => Clause::at_least("bc1", 0.0, 0.0, Witness::default()).with_note(note),
        Some(i) => Clause::at_least("bc1", -(missed as f64), 0.0, Witness::point(cloud.point(i)))
            .with_note(format!("{missed} uncovered of {note}")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paramsets::ParamSet;
    use crate::schedule::ScheduleConstants;
    use crate::seqspace::{Interval, WeightKind};

    fn constants() -> ScheduleConstants {
        ScheduleConstants {
            tau: 1.0,
            spacing: 5,
            alpha: 1.0,
            beta: None,
            delta: None,
            d_const: None,
        }
    }

    fn point_schedule(times: &[u64], anchor: f64) -> Schedule {
        let set = ParamSet::new(crate::paramsets::SetKind::Point {
            coords: vec![anchor],
        });
        let anchors = vec![vec![anchor]; times.len()];
        Schedule::manual(set, constants(), times, &anchors).unwrap()
    }

    fn vecs(coeffs: &[f64]) -> Vec<TruncatedVector> {
        vec![TruncatedVector::new(coeffs.to_vec(), Norm::Sup).unwrap()]
    }

    #[test]
    fn zero_v_passes_with_margin_eps() {
        let w = WeightFamily::rolewicz(0.0, 2.0);
        let s = point_schedule(&[10, 20, 30], 1.0);
        let r = check_basic_criterion(
            &s,
            &w,
            &vecs(&[1.0]),
            &vecs(&[0.0]),
            0.1,
            &BasicOptions::default(),
        )
        .unwrap();
        for id in ["bc2", "bc3", "bc5"] {
            assert_eq!(r.clause(id).unwrap().margin, 0.1, "{id}");
        }
    }

    #[test]
    fn short_u_is_annihilated() {
        let w = WeightFamily::rolewicz(0.0, 2.0);
        let s = point_schedule(&[10, 20], 1.0);
        let r = check_basic_criterion(
            &s,
            &w,
            &vecs(&[3.0, -2.0, 5.0]),
            &vecs(&[1.0]),
            0.1,
            &BasicOptions::default(),
        )
        .unwrap();
        assert_eq!(r.clause("bc4").unwrap().margin, 0.1);
    }

    #[test]
    fn single_entry_at_anchor_inverts_exactly() {
        let w = WeightFamily::exp_power(0.5, 0.0, 3.0).unwrap();
        let s = point_schedule(&[40], 1.3);
        let r = check_basic_criterion(
            &s,
            &w,
            &vecs(&[0.0]),
            &vecs(&[0.5, -1.0, 0.25]),
            0.1,
            &BasicOptions::default(),
        )
        .unwrap();
        assert_eq!(r.clause("bc5").unwrap().margin, 0.1);
        assert!(r.clause("bc1").unwrap().passed());
    }

    #[test]
    fn forward_sum_matches_direct_oracle() {
        let w = WeightFamily::rolewicz(0.0, 2.0);
        let s = point_schedule(&[3, 5], 1.0);
        let v = vecs(&[1.0, 2.0]);
        let r = check_basic_criterion(&s, &w, &vecs(&[0.0]), &v, 10.0, &BasicOptions::default())
            .unwrap();
        // S^3 v = (0,0,0,e^-3,2e^-3), S^5 v = (…,e^-5,2e^-5): overlap-free, sup = 2e^-3
        let expected = 2.0 * (-3f64).exp();
        assert!((10.0 - r.clause("bc2").unwrap().margin - expected).abs() < 1e-15);
    }

    #[test]
    fn cross_fast_path_agrees_with_general_sum() {
        let set = ParamSet::segment(vec![1.0], vec![1.5]);
        let anchors: Vec<Vec<f64>> = vec![vec![1.1], vec![1.3], vec![1.5]];
        let mut s = Schedule::manual(set, constants(), &[20, 40, 60], &anchors).unwrap();
        for (k, e) in s.entries.iter_mut().enumerate() {
            e.cell = crate::paramsets::CellSpec::Interval {
                t0: k as f64 / 3.0,
                t1: (k + 1) as f64 / 3.0,
            };
        }
        let fast = WeightFamily::rolewicz(0.5, 2.0);
        let table = WeightFamily::new(WeightKind::Rolewicz, Interval::new(0.5, 2.0))
            .unwrap()
            .tabulate(200)
            .unwrap();
        let v = vec![TruncatedVector::new(vec![1.0, -0.5, 0.25], Norm::Ellp { p: 2.0 }).unwrap()];
        let opts = BasicOptions::default();
        let a = check_basic_criterion(&s, &fast, &v, &v, 1.0, &opts).unwrap();
        let b = check_basic_criterion(&s, &table, &v, &v, 1.0, &opts).unwrap();
        for id in ["bc2", "bc3", "bc4", "bc5"] {
            let (x, y) = (a.clause(id).unwrap().margin, b.clause(id).unwrap().margin);
            assert!((x - y).abs() < 1e-12, "{id}: {x} vs {y}");
        }
        assert!(a.clause("bc1").unwrap().passed());
    }

    #[test]
    fn budget_overflow_names_the_clause() {
        let w = WeightFamily::rolewicz(0.0, 2.0);
        let s = point_schedule(&[100], 1.0);
        let opts = BasicOptions {
            budget: 50,
            ..BasicOptions::default()
        };
        let err =
            check_basic_criterion(&s, &w, &vecs(&[0.0]), &vecs(&[1.0]), 0.1, &opts).unwrap_err();
        assert!(err.to_string().contains("BC2"));
    }
}
