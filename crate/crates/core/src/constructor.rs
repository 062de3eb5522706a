//! Finite synthesis of approximate common hypercyclic vectors
//! `x = u + Σ_rounds Σ_k S_{λ_k}^{n_k} v` and verification of their orbits.

use serde::{Deserialize, Serialize};

use crate::criteria::{
    check_basic_criterion, BasicOptions, CellLocator, Clause, CriterionReport, Witness,
};
use crate::error::{Error, Result};
use crate::par;
use crate::paramsets::ParamSet;
use crate::schedule::{
    adaptive_curve_schedule, lipschitz_schedule, solve_covering, AdaptiveParams, CoveringParams,
    LipschitzParams, Schedule, MAX_TIME,
};
use crate::seqspace::{
    LogCoeff, Norm, SparseLogVector, TruncatedVector, WeightFamily, OVERFLOW_GUARD,
};

/// Cap on the number of stored coefficients of a candidate.
pub const MAX_COEFFICIENTS: usize = 10_000_000;
/// Entries per round re-checked by the triangle-inequality ledger.
const LEDGER_ENTRIES: usize = 64;
/// Relative slack of the ledger's `sum of parts ≥ whole` check.
const LEDGER_TOLERANCE: f64 = 1e-9;

/// Where each round's schedule comes from. The spacing `N` of the inner
/// parameters is the base value; synthesis raises it to clear the target
/// support and doubles it on failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSource {
    /// Covering solver; the set must not need a pre-subdivision.
    Covering { params: CoveringParams },
    /// Arithmetic-time curve schedule.
    Lipschitz { params: LipschitzParams },
    /// Adaptive curve schedule for affine families.
    Adaptive { params: AdaptiveParams },
}

impl ScheduleSource {
    fn base_spacing(&self) -> u64 {
        match self {
            ScheduleSource::Covering { params } => params.spacing,
            ScheduleSource::Lipschitz { params } => params.spacing,
            ScheduleSource::Adaptive { params } => params.spacing,
        }
    }

    /// Schedule whose first time is at least `offset`, with spacing
    /// `spacing` between consecutive times.
    fn build(
        &self,
        set: &ParamSet,
        w: &WeightFamily,
        spacing: u64,
        offset: u64,
        width: usize,
        doubling: u32,
    ) -> Result<Schedule> {
        match self {
            ScheduleSource::Covering { params } => {
                let p = CoveringParams {
                    spacing: spacing.max(offset),
                    ..*params
                };
                let solution = solve_covering(set, &p)?;
                if solution.pieces.len() != 1 {
                    return Err(Error::invalid(
                        "covering source",
                        format!(
                            "set needs {} pieces; raise d_const so that one schedule covers it",
                            solution.pieces.len()
                        ),
                    ));
                }
                Ok(solution.pieces.into_iter().next().expect("one piece"))
            }
            ScheduleSource::Lipschitz { params } => {
                let step = (params.step << doubling).max(spacing);
                lipschitz_schedule(
                    set,
                    &LipschitzParams {
                        spacing,
                        step,
                        offset,
                        ..*params
                    },
                )
            }
            ScheduleSource::Adaptive { params } => adaptive_curve_schedule(
                set,
                w,
                &AdaptiveParams {
                    spacing,
                    offset,
                    support: width.max(1),
                    ..*params
                },
            ),
        }
    }
}

/// Settings of the synthesis loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisOptions {
    #[serde(default)]
    pub basic: BasicOptions,
    /// Number of spacing doublings tried after a failing round.
    #[serde(default = "default_escalations")]
    pub escalations: u32,
    #[serde(default = "default_max_coefficients")]
    pub max_coefficients: usize,
}

fn default_escalations() -> u32 {
    3
}

fn default_max_coefficients() -> usize {
    MAX_COEFFICIENTS
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            basic: BasicOptions::default(),
            escalations: default_escalations(),
            max_coefficients: default_max_coefficients(),
        }
    }
}

/// One application of the basic criterion to one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub target: Vec<TruncatedVector>,
    /// `None` for a zero target, which adds nothing.
    pub schedule: Option<Schedule>,
    /// Spacing finally used.
    pub spacing: u64,
    /// Largest clause value of the accepted attempt (`ε − worst margin`).
    pub achieved_eps: f64,
    pub report: Option<CriterionReport>,
    /// Index range `[start, end)` occupied by this round's blocks.
    pub start: usize,
    pub end: usize,
}

/// The synthesized vector with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateVector {
    pub norm: Norm,
    pub eps: f64,
    /// Initial vector `u`.
    pub initial: Vec<TruncatedVector>,
    /// Coordinates of `x`, in sign / log-magnitude form.
    pub x: Vec<SparseLogVector>,
    pub rounds: Vec<Round>,
}

impl CandidateVector {
    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Number of stored coefficients over all coordinates.
    pub fn coefficients(&self) -> usize {
        self.x.iter().map(SparseLogVector::len).sum()
    }

    /// Dense copy of `x`, refused beyond `max_len` coefficients.
    pub fn to_truncated(&self, max_len: usize) -> Result<Vec<TruncatedVector>> {
        let len = self
            .x
            .iter()
            .map(SparseLogVector::support_end)
            .max()
            .unwrap_or(0)
            .max(1);
        if len > max_len {
            return Err(Error::capacity(
                "dense candidate",
                format!("length {len} exceeds {max_len}"),
            ));
        }
        self.x
            .iter()
            .map(|xi| {
                let mut c = vec![0.0; len];
                for (m, v) in xi.iter() {
                    c[m] = v.value();
                }
                TruncatedVector::new(c, self.norm)
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("candidate serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid("candidate JSON", e.to_string()))
    }
}

fn sparse_of(x: &TruncatedVector) -> SparseLogVector {
    let mut s = SparseLogVector::new();
    for (m, c) in x.nonzeros() {
        s.add_at(m, LogCoeff::from_value(c));
    }
    s
}

fn check_tuple(what: &str, xs: &[TruncatedVector], d: usize, norm: Norm) -> Result<()> {
    if xs.len() != d {
        return Err(Error::invalid(
            what,
            format!("expected {d} coordinates, got {}", xs.len()),
        ));
    }
    if xs.iter().any(|x| x.norm_tag() != norm) {
        return Err(Error::invalid(
            what,
            "all coordinates must carry the same norm",
        ));
    }
    Ok(())
}

/// Coordinate-wise `[lo, hi]` over the set's samples.
fn set_bounds(set: &ParamSet) -> Result<(Vec<f64>, Vec<f64>)> {
    set.samples()?
        .bounds()
        .ok_or_else(|| Error::invalid("parameter set", "no samples"))
}

/// Smallest time `n' ≥ floor` such that every new block seen from any time
/// `n ≤ prev_end` is damped below `ε/2`: with `f` increasing in the
/// parameter, `min_a f_{n'}(a) − max_b (f_{n'}(b) − f_{n'−P}(b)) ≥ log(2·max|v|/ε)`.
fn clearance(
    w: &WeightFamily,
    lo: &[f64],
    hi: &[f64],
    prev_end: usize,
    floor: u64,
    target_log: f64,
) -> Result<u64> {
    if prev_end == 0 {
        return Ok(floor);
    }
    let ends: Vec<f64> = lo.iter().chain(hi).copied().collect();
    let ok = |n: u64| -> bool {
        let n = n as usize;
        let low = ends
            .iter()
            .map(|&a| w.increment(a, 0, n))
            .fold(f64::INFINITY, f64::min);
        let high = ends
            .iter()
            .map(|&b| w.increment(b, n - prev_end, prev_end))
            .fold(f64::NEG_INFINITY, f64::max);
        low - high >= target_log
    };
    let mut hi_n = floor.max(prev_end as u64 + 1);
    while !ok(hi_n) {
        hi_n = hi_n.saturating_mul(2);
        if hi_n > MAX_TIME {
            return Err(Error::capacity(
                "synthesis",
                "no time below 2^53 clears the earlier blocks",
            ));
        }
    }
    let mut lo_n = floor.max(prev_end as u64 + 1);
    if ok(lo_n) {
        return Ok(lo_n);
    }
    while hi_n - lo_n > 1 {
        let mid = lo_n + (hi_n - lo_n) / 2;
        if ok(mid) {
            hi_n = mid;
        } else {
            lo_n = mid;
        }
    }
    Ok(hi_n)
}

/// Builds `x = u + Σ_rounds Σ_k S_{λ_k}^{n_k} v_r`, one round per target.
/// Each round starts past the support of everything built so far (so the
/// shifts `T^{n_k}` of the round annihilate it) and late enough that the new
/// blocks are damped when seen from earlier rounds. A round is accepted when
/// every clause of the basic criterion passes; otherwise the spacing is
/// doubled, up to `escalations` times.
pub fn synthesize(
    w: &WeightFamily,
    u: &[TruncatedVector],
    targets: &[Vec<TruncatedVector>],
    set: &ParamSet,
    eps: f64,
    source: &ScheduleSource,
    opts: &SynthesisOptions,
) -> Result<CandidateVector> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid("epsilon", "must be positive"));
    }
    let d = set.dim();
    let norm = u
        .first()
        .map(TruncatedVector::norm_tag)
        .ok_or_else(|| Error::invalid("u", "needs one coordinate per dimension"))?;
    check_tuple("u", u, d, norm)?;
    for v in targets {
        check_tuple("target", v, d, norm)?;
    }
    let (lo, hi) = set_bounds(set)?;
    let mut x: Vec<SparseLogVector> = u.iter().map(sparse_of).collect();
    let mut prev_end = u
        .iter()
        .map(TruncatedVector::support_end)
        .max()
        .unwrap_or(0);
    let mut rounds = Vec::with_capacity(targets.len());
    for (r, v) in targets.iter().enumerate() {
        let width = v
            .iter()
            .map(TruncatedVector::support_end)
            .max()
            .unwrap_or(0);
        if width == 0 {
            rounds.push(Round {
                target: v.clone(),
                schedule: None,
                spacing: 0,
                achieved_eps: 0.0,
                report: None,
                start: prev_end,
                end: prev_end,
            });
            continue;
        }
        let log_v = v
            .iter()
            .map(|vi| vi.coeffs().iter().fold(0.0f64, |a, b| a.max(b.abs())))
            .fold(0.0, f64::max)
            .ln();
        let base = source.base_spacing() + width as u64;
        let mut last_failure: Option<(String, String)> = None;
        let mut accepted = None;
        for doubling in 0..=opts.escalations {
            let spacing = base << doubling;
            let offset = clearance(
                w,
                &lo,
                &hi,
                prev_end,
                prev_end as u64 + spacing,
                log_v + (2.0 / eps).ln(),
            )?;
            let schedule = source.build(set, w, spacing, offset, width, doubling)?;
            if schedule.entries.iter().map(|e| e.n).min().unwrap_or(0) < prev_end as u64 {
                return Err(Error::invalid(
                    "schedule source",
                    "first time does not clear the earlier blocks",
                ));
            }
            let end = schedule.last_time() as usize + width;
            if end > opts.basic.budget {
                return Err(Error::capacity(
                    "synthesis",
                    format!(
                        "round {} needs length {end} beyond budget {}",
                        r + 1,
                        opts.basic.budget
                    ),
                ));
            }
            let added = schedule
                .len()
                .saturating_mul(v.iter().map(|vi| vi.nonzeros().count()).sum());
            let stored: usize = x.iter().map(SparseLogVector::len).sum();
            if stored.saturating_add(added) > opts.max_coefficients {
                return Err(Error::capacity(
                    "synthesis",
                    format!(
                        "round {} would store {} coefficients, cap {}",
                        r + 1,
                        stored + added,
                        opts.max_coefficients
                    ),
                ));
            }
            let report = check_basic_criterion(&schedule, w, u, v, eps, &opts.basic)?;
            if report.passed() {
                accepted = Some((schedule, report, spacing));
                break;
            }
            let bad = report
                .clauses
                .iter()
                .find(|c| !c.passed())
                .expect("a failing clause");
            last_failure = Some((
                bad.id.clone(),
                format!("margin {:.3e} at spacing {spacing}", bad.margin),
            ));
        }
        let Some((schedule, report, spacing)) = accepted else {
            let (clause, detail) = last_failure.expect("at least one attempt");
            return Err(Error::Synthesis {
                round: r + 1,
                clause,
                detail,
            });
        };
        let start = schedule
            .entries
            .iter()
            .map(|e| e.n as usize)
            .min()
            .expect("non-empty");
        let end = schedule
            .entries
            .iter()
            .map(|e| e.n as usize)
            .max()
            .expect("non-empty")
            + width;
        for entry in &schedule.entries {
            let n = entry.n as usize;
            for (i, vi) in v.iter().enumerate() {
                for (m, c) in vi.nonzeros() {
                    let log = c.abs().ln() - w.increment(entry.anchor[i], m, n);
                    x[i].add_at(m + n, LogCoeff::new(log, c < 0.0));
                }
            }
        }
        let worst = report
            .clauses
            .iter()
            .filter(|c| c.id != "bc1")
            .map(|c| c.margin)
            .fold(f64::INFINITY, f64::min);
        rounds.push(Round {
            target: v.clone(),
            spacing,
            achieved_eps: eps - worst,
            report: Some(report),
            schedule: Some(schedule),
            start,
            end,
        });
        prev_end = end;
    }
    Ok(CandidateVector {
        norm,
        eps,
        initial: u.to_vec(),
        x,
        rounds,
    })
}

/// Log-norm of `T_λ^n` applied to the coordinates of `x` restricted to the
/// index range `[from, to)`, minus `v` when given.
#[allow(clippy::too_many_arguments)]
fn shifted_log_norm(
    w: &WeightFamily,
    lambda: &[f64],
    x: &[SparseLogVector],
    n: usize,
    from: usize,
    to: usize,
    v: Option<&[TruncatedVector]>,
    norm: Norm,
) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for (i, xi) in x.iter().enumerate() {
        let mut y = SparseLogVector::new();
        for (p, c) in xi.tail(from.max(n)) {
            if p >= to {
                break;
            }
            y.add_at(p - n, c.scale_log(w.increment(lambda[i], p - n, n)));
        }
        if let Some(v) = v {
            for (m, c) in v[i].nonzeros() {
                y.add_at(m, LogCoeff::from_value(-c));
            }
        }
        worst = worst.max(y.log_norm(norm));
    }
    worst
}

/// One row of the triangle-inequality ledger at an anchor `λ = λ_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub round: usize,
    pub entry: usize,
    /// `‖T^{n_k} x − v‖`.
    pub whole: f64,
    /// Initial vector and earlier rounds (the (BC4) part).
    pub earlier: f64,
    /// Own block: `‖T^{n_k} S_{λ_k}^{n_k} v − v‖` (the (BC5) part).
    pub own: f64,
    /// Other blocks of the same round (the (BC3) part).
    pub cross: f64,
    /// Later rounds.
    pub later: f64,
}

impl LedgerRow {
    /// Whether `earlier + own + cross + later ≥ whole` up to rounding.
    pub fn consistent(&self) -> bool {
        let parts = self.earlier + self.own + self.cross + self.later;
        parts >= self.whole * (1.0 - LEDGER_TOLERANCE) - f64::MIN_POSITIVE
    }
}

/// Triangle-inequality ledger at up to 64 evenly spaced anchors per round.
pub fn triangle_ledger(candidate: &CandidateVector, w: &WeightFamily) -> Vec<LedgerRow> {
    let norm = candidate.norm;
    let x = &candidate.x;
    let mut rows = Vec::new();
    for (r, round) in candidate.rounds.iter().enumerate() {
        let Some(schedule) = &round.schedule else {
            continue;
        };
        let q = schedule.len();
        let picks: Vec<usize> = if q <= LEDGER_ENTRIES {
            (0..q).collect()
        } else {
            (0..LEDGER_ENTRIES)
                .map(|i| i * (q - 1) / (LEDGER_ENTRIES - 1))
                .collect()
        };
        let width = round
            .target
            .iter()
            .map(TruncatedVector::support_end)
            .max()
            .unwrap_or(0);
        let batch = par::map(&picks, |&k| {
            let e = &schedule.entries[k];
            let n = e.n as usize;
            let lam = &e.anchor;
            let v = Some(round.target.as_slice());
            let whole = shifted_log_norm(w, lam, x, n, 0, usize::MAX, v, norm).exp();
            let earlier = shifted_log_norm(w, lam, x, n, 0, round.start, None, norm).exp();
            let own = shifted_log_norm(w, lam, x, n, n, n + width, v, norm).exp();
            let cross = shifted_log_norm(w, lam, x, n, round.start, n, None, norm).exp()
                + shifted_log_norm(w, lam, x, n, n + width, round.end, None, norm).exp();
            let later = shifted_log_norm(w, lam, x, n, round.end, usize::MAX, None, norm).exp();
            LedgerRow {
                round: r + 1,
                entry: k,
                whole,
                earlier,
                own,
                cross,
                later,
            }
        });
        rows.extend(batch);
    }
    rows
}

/// For every sampled `λ` and every round: the smallest `‖T_λ^{n_k} x − v‖`
/// over the round's entries whose cell contains `λ`. One clause per round
/// (`round<r>`, strict `< ε`), a coverage clause per round (`round<r>_bc1`)
/// when some sample lies in no cell, and a `ledger` clause checking the
/// triangle-inequality ledger.
pub fn verify_orbits(
    candidate: &CandidateVector,
    w: &WeightFamily,
    set: &ParamSet,
    targets: &[Vec<TruncatedVector>],
    eps: f64,
    samples: usize,
) -> Result<CriterionReport> {
    if targets.len() != candidate.rounds.len() {
        return Err(Error::invalid(
            "targets",
            format!(
                "{} targets for {} rounds",
                targets.len(),
                candidate.rounds.len()
            ),
        ));
    }
    for (t, r) in targets.iter().zip(&candidate.rounds) {
        if *t != r.target {
            return Err(Error::invalid(
                "targets",
                "targets differ from the candidate's rounds",
            ));
        }
    }
    let cloud = set.clone().with_budget(samples.max(2)).samples()?;
    for p in cloud.points() {
        for &a in p {
            w.check_param(a)?;
        }
    }
    let x = &candidate.x;
    let norm = candidate.norm;
    let mut clauses = Vec::new();
    for (r, round) in candidate.rounds.iter().enumerate() {
        let id = format!("round{}", r + 1);
        let Some(schedule) = &round.schedule else {
            clauses.push(Clause::strict(&id, eps, Witness::default()).with_note("zero target"));
            continue;
        };
        if schedule.set.kind != set.kind || schedule.set.prefix != set.prefix {
            return Err(Error::invalid(
                "parameter set",
                "differs from the set the schedule was built on",
            ));
        }
        let locator = CellLocator::new(schedule, &cloud)?;
        let per = par::map_range(cloud.len(), |i| -> Result<(f64, Witness)> {
            let cells = locator.containing(schedule, &cloud, i)?;
            let lam = cloud.point(i);
            let mut best = (f64::INFINITY, Witness::point(lam));
            for k in cells {
                let n = schedule.entries[k].n as usize;
                let log = shifted_log_norm(w, lam, x, n, 0, usize::MAX, Some(&round.target), norm);
                if log < best.0 {
                    best = (
                        log,
                        Witness {
                            entry: Some(k),
                            point: Some(lam.to_vec()),
                            ..Witness::default()
                        },
                    );
                }
            }
            Ok(best)
        });
        let per = per.into_iter().collect::<Result<Vec<_>>>()?;
        let uncovered: Vec<&(f64, Witness)> =
            per.iter().filter(|(l, _)| *l == f64::INFINITY).collect();
        if let Some((_, wit)) = uncovered.first() {
            clauses.push(
                Clause::at_least(
                    &format!("{id}_bc1"),
                    -(uncovered.len() as f64),
                    0.0,
                    wit.clone(),
                )
                .with_note(format!(
                    "{} of {} samples in no cell",
                    uncovered.len(),
                    cloud.len()
                )),
            );
        }
        let (log, witness) = per.iter().filter(|(l, _)| *l < f64::INFINITY).fold(
            (f64::NEG_INFINITY, Witness::default()),
            |acc, (l, wit)| if *l > acc.0 { (*l, wit.clone()) } else { acc },
        );
        let clause = if log > OVERFLOW_GUARD || log.is_nan() {
            Clause::indeterminate(&id, witness, "orbit error beyond the overflow guard")
        } else {
            Clause::strict(&id, eps - log.exp(), witness)
        };
        clauses.push(clause.with_note(format!("{} samples", cloud.len())));
    }
    let ledger = triangle_ledger(candidate, w);
    let bad = ledger.iter().filter(|row| !row.consistent()).count();
    let slack = ledger
        .iter()
        .enumerate()
        .map(|(i, row)| (row.earlier + row.own + row.cross + row.later - row.whole, i))
        .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a });
    let witness = ledger
        .get(slack.1)
        .map_or(Witness::default(), |row| Witness {
            entry: Some(row.entry),
            ..Witness::default()
        });
    let ledger_clause = if bad == 0 {
        Clause::at_least("ledger", slack.0.max(0.0), 0.0, witness)
    } else {
        Clause::at_least("ledger", slack.0, 0.0, witness)
            .with_note(format!("{bad} inconsistent rows"))
    };
    clauses.push(ledger_clause.with_note(format!("{} anchor rows", ledger.len())));
    Ok(CriterionReport::new("orbits", clauses))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paramsets::SetKind;

    fn e(i: usize) -> TruncatedVector {
        TruncatedVector::basis(i, Norm::Sup)
    }

    fn point_source() -> ScheduleSource {
        ScheduleSource::Covering {
            params: CoveringParams {
                tau: 1.0,
                delta: 0.1,
                spacing: 5,
                alpha: 0.5,
                beta: 1.0,
                d_const: 1.0,
                max_depth: 64,
            },
        }
    }

    fn point(a: f64) -> ParamSet {
        ParamSet::new(SetKind::Point { coords: vec![a] })
    }

    #[test]
    fn zero_target_leaves_u_unchanged() {
        let w = WeightFamily::rolewicz(0.0, 3.0);
        let u = vec![TruncatedVector::new(vec![0.5, -2.0], Norm::Sup).unwrap()];
        let zero = vec![TruncatedVector::zeros(3, Norm::Sup)];
        let c = synthesize(
            &w,
            &u,
            &[zero],
            &point(1.0),
            0.1,
            &point_source(),
            &SynthesisOptions::default(),
        )
        .unwrap();
        assert_eq!(c.to_truncated(10).unwrap()[0].coeffs()[..2], [0.5, -2.0]);
        assert_eq!(c.coefficients(), 2);
    }

    #[test]
    fn single_point_synthesis_is_exact() {
        let a0 = 1.3;
        let w = WeightFamily::rolewicz(0.0, 3.0);
        let u = vec![TruncatedVector::new(vec![0.0, 0.7], Norm::Sup).unwrap()];
        let targets = vec![vec![e(0)]];
        let set = point(a0);
        let c = synthesize(
            &w,
            &u,
            &targets,
            &set,
            0.1,
            &point_source(),
            &SynthesisOptions::default(),
        )
        .unwrap();
        let n1 = c.rounds[0].schedule.as_ref().unwrap().entries[0].n as usize;
        assert!(n1 > 2);
        let coeff = c.x[0].get(n1);
        assert!((coeff.log_mag + a0 * n1 as f64).abs() < 1e-12 && !coeff.negative);
        assert_eq!(c.x[0].len(), 2);
        let report = verify_orbits(&c, &w, &set, &targets, 0.1, 10).unwrap();
        assert!(report.passed(), "{}", report.table());
        assert_eq!(report.clause("round1").unwrap().margin, 0.1);
    }

    #[test]
    fn injected_fault_fails_its_round() {
        let a0 = 1.3;
        let w = WeightFamily::rolewicz(0.0, 3.0);
        let u = vec![TruncatedVector::zeros(1, Norm::Sup)];
        let targets = vec![vec![e(0)], vec![e(1)]];
        let set = point(a0);
        let mut c = synthesize(
            &w,
            &u,
            &targets,
            &set,
            0.1,
            &point_source(),
            &SynthesisOptions::default(),
        )
        .unwrap();
        assert!(verify_orbits(&c, &w, &set, &targets, 0.1, 10)
            .unwrap()
            .passed());
        let n = c.rounds[1].schedule.as_ref().unwrap().entries[0].n as usize;
        c.x[0].add_at(n + 1, LogCoeff::new(0.2f64.ln() - a0 * n as f64, false));
        let report = verify_orbits(&c, &w, &set, &targets, 0.1, 10).unwrap();
        assert!(report.clause("round1").unwrap().passed());
        assert!(!report.clause("round2").unwrap().passed());
    }

    #[test]
    fn adaptive_rounds_on_a_short_segment() {
        let w = WeightFamily::rolewicz(0.5, 3.0);
        let set = ParamSet::segment(vec![1.0, 2.0], vec![1.02, 1.98]);
        let source = ScheduleSource::Adaptive {
            params: AdaptiveParams {
                theta: 0.09,
                spacing: 3,
                offset: 0,
                support: 1,
                cross_budget: 0.05,
                window: 64,
                max_cells: 100_000,
            },
        };
        let u = vec![
            TruncatedVector::zeros(1, Norm::Sup),
            TruncatedVector::zeros(1, Norm::Sup),
        ];
        let two = TruncatedVector::new(vec![1.0, 1.0], Norm::Sup).unwrap();
        let targets = vec![vec![e(0), e(0)], vec![two, e(0)]];
        let c = synthesize(
            &w,
            &u,
            &targets,
            &set,
            0.1,
            &source,
            &SynthesisOptions::default(),
        )
        .unwrap();
        assert!(c.rounds[1].start >= c.rounds[0].end);
        let report = verify_orbits(&c, &w, &set, &targets, 0.1, 200).unwrap();
        assert!(report.passed(), "{}", report.table());
        let back = CandidateVector::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn hopeless_epsilon_names_round_and_clause() {
        let w = WeightFamily::rolewicz(0.5, 3.0);
        let set = ParamSet::segment(vec![1.0, 2.0], vec![1.2, 1.8]);
        let source = ScheduleSource::Lipschitz {
            params: LipschitzParams {
                tau: 2.0,
                spacing: 4,
                step: 6,
                offset: 0,
                max_cells: 100_000,
            },
        };
        let u = vec![
            TruncatedVector::zeros(1, Norm::Sup),
            TruncatedVector::zeros(1, Norm::Sup),
        ];
        let opts = SynthesisOptions {
            escalations: 1,
            ..SynthesisOptions::default()
        };
        let err = synthesize(&w, &u, &[vec![e(0), e(0)]], &set, 0.1, &source, &opts).unwrap_err();
        match err {
            Error::Synthesis { round, clause, .. } => {
                assert_eq!((round, clause.as_str()), (1, "bc5"))
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn synthesis_is_deterministic() {
        let w = WeightFamily::rolewicz(0.0, 3.0);
        let u = vec![TruncatedVector::zeros(1, Norm::Sup)];
        let targets = vec![vec![e(0)], vec![e(2)]];
        let a = synthesize(
            &w,
            &u,
            &targets,
            &point(0.8),
            0.1,
            &point_source(),
            &SynthesisOptions::default(),
        )
        .unwrap();
        let b = synthesize(
            &w,
            &u,
            &targets,
            &point(0.8),
            0.1,
            &point_source(),
            &SynthesisOptions::default(),
        )
        .unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }
}
