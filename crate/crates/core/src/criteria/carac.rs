//! The box-and-gap criteria: the standard (multiples of the shift) form, the
//! pairwise `exp(a n^α)` condition and the general weighted form.

use crate::error::{Error, Result};
use crate::par;
use crate::paramsets::ParamSet;
use crate::schedule::Schedule;
use crate::seqspace::{LogNormAcc, Norm, WeightFamily, OVERFLOW_GUARD};

use super::{argmin, BoxIndex, Clause, CriterionReport, Witness};

/// Absolute slack allowed when a sample sits on a box boundary.
pub const COVERAGE_TOLERANCE: f64 = 1e-12;

fn spacing_clause(schedule: &Schedule, spacing: u64) -> Clause {
    let times = schedule.times();
    let n = spacing as f64;
    let first = (times[0] as f64 - n, Witness::entry(0));
    let gaps = times
        .windows(2)
        .enumerate()
        .map(|(k, w)| (w[1] as f64 - w[0] as f64 - n, Witness::entry(k + 1)));
    let (margin, witness) = argmin(std::iter::once(first).chain(gaps));
    Clause::at_least("spacing", margin, 0.0, witness)
}

/// Every sample of `k` lies in some box `Π_i [λ_k(i) − radius_k, λ_k(i)]`.
fn coverage_clause(
    id: &str,
    schedule: &Schedule,
    k: &ParamSet,
    radius: impl Fn(u64) -> f64,
) -> Result<Clause> {
    let boxes = schedule
        .entries
        .iter()
        .map(|e| {
            let r = radius(e.n);
            (e.anchor.iter().map(|a| a - r).collect(), e.anchor.clone())
        })
        .collect();
    let index = BoxIndex::new(boxes);
    let cloud = k.samples()?;
    if cloud.dim() != schedule.dim() {
        return Err(Error::invalid(
            "coverage check",
            format!(
                "set of dimension {} vs anchors of dimension {}",
                cloud.dim(),
                schedule.dim()
            ),
        ));
    }
    let depths = par::map_range(cloud.len(), |i| index.depth(cloud.point(i)));
    let (margin, witness) = argmin(depths.iter().enumerate().map(|(i, (d, b))| {
        let mut w = Witness::point(cloud.point(i));
        w.entry = *b;
        (*d, w)
    }));
    Ok(
        Clause::at_least(id, margin, COVERAGE_TOLERANCE, witness).with_note(format!(
            "{} samples at resolution {:.3e}",
            cloud.len(),
            cloud.resolution
        )),
    )
}

/// Checks the standard criterion on `schedule` for the compact `k`:
/// (i) `k ⊂ ∪_k Π_i [λ_k(i) − τ/n_k, λ_k(i)]` and
/// (ii) `λ_{k+1}(i) n_{k+1} − λ_k(i) n_k ≥ N` for consecutive entries.
pub fn check_caracstandard(
    schedule: &Schedule,
    k: &ParamSet,
    tau: f64,
    spacing: u64,
) -> Result<CriterionReport> {
    if schedule.is_empty() {
        return Err(Error::invalid("schedule", "empty schedule"));
    }
    let coverage = coverage_clause("i_coverage", schedule, k, |n| tau / n as f64)?;
    let e = &schedule.entries;
    let gaps = (0..e.len().saturating_sub(1)).flat_map(|k| {
        (0..e[k].anchor.len()).map(move |i| {
            let lhs = e[k + 1].anchor[i] * e[k + 1].n as f64 - e[k].anchor[i] * e[k].n as f64;
            (lhs - spacing as f64, Witness::pair(k, k + 1, i))
        })
    });
    let (margin, witness) = argmin(gaps);
    let gaps = if e.len() == 1 {
        Clause::at_least("ii_gaps", f64::INFINITY, 0.0, Witness::default())
            .with_note("single entry")
    } else {
        Clause::at_least("ii_gaps", margin, 0.0, witness)
    };
    Ok(CriterionReport::new(
        "caracstandard",
        vec![spacing_clause(schedule, spacing), coverage, gaps],
    ))
}

/// Checks `(λ_j(i) − λ_k(i)) n_j^α + λ_k(i) (n_j − n_k)^α > N` for all pairs `k < j`.
pub fn check_walpha(schedule: &Schedule, alpha: f64, spacing: u64) -> CriterionReport {
    let e = &schedule.entries;
    let q = e.len();
    let per_k = par::map_range(q, |k| {
        let mut worst = (f64::INFINITY, Witness::default());
        for j in k + 1..q {
            let (nk, nj) = (e[k].n as f64, e[j].n as f64);
            let gap = if nj > nk {
                (nj - nk).powf(alpha)
            } else {
                -(nk - nj).powf(alpha)
            };
            for i in 0..e[k].anchor.len() {
                let lhs = (e[j].anchor[i] - e[k].anchor[i]) * nj.powf(alpha) + e[k].anchor[i] * gap;
                if lhs - (spacing as f64) < worst.0 {
                    worst = (lhs - spacing as f64, Witness::pair(k, j, i));
                }
            }
        }
        worst
    });
    let (margin, witness) = argmin(per_k);
    let clause = if q < 2 {
        Clause::strict("pairwise", f64::INFINITY, Witness::default()).with_note("single entry")
    } else {
        Clause::strict("pairwise", margin, witness)
            .with_note("sufficiency shown for the sup norm only; unverified for l^p")
    };
    CriterionReport::new("walpha", vec![clause])
}

/// Turns a log-norm into an `ε − value` clause; huge logs are indeterminate.
fn log_clause(id: &str, log_value: f64, eps: f64, witness: Witness) -> Clause {
    if log_value > OVERFLOW_GUARD {
        return Clause::indeterminate(
            id,
            witness,
            format!("log-magnitude {log_value:.1} beyond the overflow guard"),
        );
    }
    Clause::strict(id, eps - log_value.exp(), witness)
}

/// Checks the general criterion for the weight family `w` with scale `F`:
/// (i) coverage by the boxes `Π_i [λ_k(i) − τ/F(n_k), λ_k(i)]`;
/// (ii) `‖Σ_k e_{n_k} / (w_1⋯w_{n_k})(λ_k(i))‖ < ε`;
/// (iii) for `l = 0..=N`, `‖Σ_{j>k} (w_{n_j−n_k+l+1}⋯w_{n_j+l})(λ_k(i)) / (w_{l+1}⋯w_{n_j+l})(λ_j(i)) e_{n_j−n_k+l}‖ < ε`.
#[allow(clippy::too_many_arguments)]
pub fn check_carac_general(
    schedule: &Schedule,
    w: &WeightFamily,
    scale: &(dyn Fn(u64) -> f64 + Sync),
    tau: f64,
    spacing: u64,
    eps: f64,
    norm: Norm,
) -> Result<CriterionReport> {
    norm.validate()?;
    if schedule.is_empty() {
        return Err(Error::invalid("schedule", "empty schedule"));
    }
    let e = &schedule.entries;
    for entry in e {
        for &a in &entry.anchor {
            w.check_param(a)?;
        }
        w.check_index(entry.n as usize + spacing as usize)?;
    }
    let d = schedule.dim();
    let q = e.len();
    let coverage = coverage_clause("i_coverage", schedule, &schedule.set, |n| tau / scale(n))?;
    let decay = argmin(
        (0..d)
            .map(|i| {
                let mut acc = LogNormAcc::new(norm);
                for entry in e {
                    acc.push(-w.increment(entry.anchor[i], 0, entry.n as usize));
                }
                (
                    acc.log_value(),
                    Witness {
                        coordinate: Some(i),
                        ..Witness::default()
                    },
                )
            })
            .map(|(v, w)| (-v, w)),
    );
    let decay = log_clause("ii_decay", -decay.0, eps, decay.1);
    let cross = if q == 1 {
        Clause::strict("iii_cross", eps, Witness::default()).with_note("single entry")
    } else if let Some(rates) = shift_invariant_rates(schedule, w) {
        // log term = φ(λ_k) n_k − φ(λ_j) n_j, independent of l: suffix norms
        let per = (0..d).map(|i| {
            let mut suffix = vec![f64::NEG_INFINITY; q];
            let mut acc = LogNormAcc::new(norm);
            for k in (0..q).rev() {
                suffix[k] = acc.log_value();
                acc.push(-rates[k][i] * e[k].n as f64);
            }
            argmin((0..q - 1).map(|k| {
                (
                    -(rates[k][i] * e[k].n as f64 + suffix[k]),
                    Witness {
                        entry: Some(k),
                        coordinate: Some(i),
                        ..Witness::default()
                    },
                )
            }))
        });
        let (neg, witness) = argmin(per);
        log_clause("iii_cross", -neg, eps, witness)
    } else {
        let per_k = par::map_range(q - 1, |k| {
            let mut worst = (f64::INFINITY, Witness::default());
            for i in 0..d {
                for l in 0..=spacing as usize {
                    let mut acc = LogNormAcc::new(norm);
                    for entry in &e[k + 1..] {
                        let gap = (entry.n - e[k].n) as usize;
                        acc.push(
                            w.increment(e[k].anchor[i], gap + l, e[k].n as usize)
                                - w.increment(entry.anchor[i], l, entry.n as usize),
                        );
                    }
                    let v = -acc.log_value();
                    if v < worst.0 {
                        worst = (
                            v,
                            Witness {
                                entry: Some(k),
                                coordinate: Some(i),
                                shift: Some(l),
                                ..Witness::default()
                            },
                        );
                    }
                }
            }
            worst
        });
        let (neg, witness) = argmin(per_k);
        log_clause("iii_cross", -neg, eps, witness)
    };
    Ok(CriterionReport::new(
        "carac_general",
        vec![spacing_clause(schedule, spacing), coverage, decay, cross],
    ))
}

/// `φ(λ_k(i))` when `log w_j(a) = φ(a)` for every `j`.
pub(crate) fn shift_invariant_rates(
    schedule: &Schedule,
    w: &WeightFamily,
) -> Option<Vec<Vec<f64>>> {
    schedule
        .entries
        .iter()
        .map(|e| {
            e.anchor
                .iter()
                .map(|&a| w.shift_invariant_rate(a))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::ScheduleConstants;
    use crate::seqspace::{Interval, WeightKind};

    fn constants(spacing: u64) -> ScheduleConstants {
        ScheduleConstants {
            tau: 1.0,
            spacing,
            alpha: 1.0,
            beta: None,
            delta: None,
            d_const: None,
        }
    }

    fn schedule(times: &[u64], anchors: &[f64]) -> Schedule {
        let set = ParamSet::cube(vec![1.0], 1.0);
        let anchors: Vec<Vec<f64>> = anchors.iter().map(|&a| vec![a]).collect();
        Schedule::manual(set, constants(5), times, &anchors).unwrap()
    }

    #[test]
    fn unit_anchors_at_exact_spacing_give_zero_margin() {
        let s = schedule(&[5, 10, 15, 20], &[1.0; 4]);
        let k = ParamSet::new(crate::paramsets::SetKind::Point { coords: vec![1.0] });
        let r = check_caracstandard(&s, &k, 1.0, 5).unwrap();
        let gaps = r.clause("ii_gaps").unwrap();
        assert_eq!(gaps.margin, 0.0);
        assert!(gaps.passed());
    }

    #[test]
    fn decreasing_times_fail_the_gap_clause() {
        let s = schedule(&[20, 15, 10, 5], &[1.0; 4]);
        let k = ParamSet::new(crate::paramsets::SetKind::Point { coords: vec![1.0] });
        let r = check_caracstandard(&s, &k, 1.0, 5).unwrap();
        assert!(r.clause("ii_gaps").unwrap().margin < 0.0);
        assert!(!r.passed());
    }

    #[test]
    fn walpha_at_one_is_telescoped_gap() {
        let s = schedule(&[10, 30, 60], &[1.0, 1.5, 1.2]);
        let r = check_walpha(&s, 1.0, 5);
        // pairs: 1.5·30 − 10 = 35, 1.2·60 − 10 = 62, 1.2·60 − 1.5·30 = 27
        assert!((r.clauses[0].margin - 22.0).abs() < 1e-12);
    }

    #[test]
    fn backward_jump_at_the_saut_bound_then_perturbed() {
        // a_k = 2, a_j = 1.5, α = 1/2: n_j ≥ n_k / (1 − (0.5/2)^2)
        let nk = 1000u64;
        let nj = (nk as f64 / (1.0 - 0.0625)).ceil() as u64;
        let ok = schedule(&[nk, nj + 5000], &[2.0, 1.5]);
        assert!(check_walpha(&ok, 0.5, 1).passed());
        let bad = schedule(&[nk, nj - 10], &[2.0, 1.5]);
        assert!(!check_walpha(&bad, 0.5, 1).passed());
    }

    #[test]
    fn rolewicz_decay_matches_geometric_sum() {
        let w = WeightFamily::rolewicz(0.5, 3.0);
        let s = schedule(&[10, 20, 40, 80], &[1.0; 4]);
        let r =
            check_carac_general(&s, &w, &|n| n as f64, 1.0, 5, 0.1, Norm::Ellp { p: 1.0 }).unwrap();
        let expected: f64 = [10.0f64, 20.0, 40.0, 80.0].iter().map(|n| (-n).exp()).sum();
        assert!((0.1 - r.clause("ii_decay").unwrap().margin - expected).abs() < 1e-15);
    }

    #[test]
    fn fast_and_general_cross_paths_agree() {
        let s = schedule(&[10, 20, 35, 50, 80], &[1.0, 1.2, 1.1, 1.3, 1.25]);
        let fast = WeightFamily::rolewicz(0.5, 3.0);
        let table = WeightFamily::new(WeightKind::Rolewicz, Interval::new(0.5, 3.0))
            .unwrap()
            .tabulate(200)
            .unwrap();
        for norm in [Norm::Sup, Norm::Ellp { p: 2.0 }] {
            let a = check_carac_general(&s, &fast, &|n| n as f64, 1.0, 5, 1.0, norm).unwrap();
            let b = check_carac_general(&s, &table, &|n| n as f64, 1.0, 5, 1.0, norm).unwrap();
            let (ma, mb) = (
                a.clause("iii_cross").unwrap().margin,
                b.clause("iii_cross").unwrap().margin,
            );
            assert!((ma - mb).abs() < 1e-12, "{ma} vs {mb}");
        }
    }

    #[test]
    fn single_entry_cross_clause_is_vacuous() {
        let w = WeightFamily::rolewicz(0.5, 3.0);
        let s = schedule(&[10], &[1.0]);
        let r = check_carac_general(&s, &w, &|n| n as f64, 1.0, 5, 0.1, Norm::Sup).unwrap();
        assert!(r.clause("iii_cross").unwrap().passed());
    }

    #[test]
    fn exp_power_cross_term_matches_walpha_expression() {
        // log term at l = 0 is −[(λ_j − λ_k) n_j^α + λ_k (n_j − n_k)^α]
        let alpha = 0.5;
        let w = WeightFamily::exp_power(alpha, 0.1, 5.0).unwrap();
        let (lk, lj, nk, nj) = (2.0, 1.7, 400usize, 900usize);
        let term = w.increment(lk, nj - nk, nk) - w.increment(lj, 0, nj);
        let expected = -((lj - lk) * (nj as f64).powf(alpha) + lk * ((nj - nk) as f64).powf(alpha));
        assert!((term - expected).abs() < 1e-10);
    }
}
