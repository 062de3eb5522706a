use hclab::criteria::{
    check_basic_criterion, check_carac_general, check_caracstandard, check_walpha, CriterionReport,
};
use hclab::paramsets::{ParamSet, SetKind};
use hclab::schedule::{Schedule, ScheduleConstants};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{
    load, resolve_set, tuple, CheckConfig, ScheduleInput, SweepConfig, VerifyConfig,
};
use crate::output::{clause_status, csv_text, fmt_f, table, Failure, Outcome, RunContext};

pub fn run(config: &VerifyConfig, ctx: &RunContext) -> Result<Outcome, Failure> {
    let schedules = match (&config.schedule_file, &config.schedule) {
        (Some(file), None) => load::<ScheduleInput>(&ctx.resolve(file))?.0.into_vec(),
        (None, Some(inline)) => inline.clone().into_vec(),
        (Some(_), Some(_)) => {
            return Err(Failure::Config(
                "give either schedule_file or schedule, not both".into(),
            ))
        }
        (None, None) if config.sweep.is_some() => Vec::new(),
        (None, None) => {
            return Err(Failure::Config(
                "no schedule_file, schedule or sweep given".into(),
            ))
        }
    };
    if !schedules.is_empty() && config.checks.is_empty() {
        return Err(Failure::Config("schedule given without any checks".into()));
    }
    let mut reports = Vec::new();
    for (p, s) in schedules.iter().enumerate() {
        for check in &config.checks {
            reports.push((p + 1, run_check(s, check, ctx)?));
        }
    }
    let mut rows = Vec::new();
    for (piece, r) in &reports {
        for c in &r.clauses {
            rows.push(vec![
                piece.to_string(),
                r.criterion.clone(),
                c.id.clone(),
                clause_status(c.status),
                fmt_f(c.margin),
            ]);
        }
    }
    let sweep = config.sweep.map(|s| sweep(&s, ctx.seed));
    let mut passed = reports.iter().all(|(_, r)| r.passed());
    if let Some(s) = &sweep {
        passed &= s.disagreements == 0;
        rows.push(vec![
            "sweep".into(),
            "walpha_vs_caracstandard".into(),
            "agreement".into(),
            status(s.disagreements == 0),
            format!(
                "{}/{} ({} exact ties)",
                s.count - s.ties - s.disagreements,
                s.count - s.ties,
                s.ties
            ),
        ]);
    }
    let header = ["schedule", "criterion", "clause", "status", "margin"];
    ctx.write("clauses.csv", &csv_text(&header, &rows)?)?;
    let summary = json!({
        "reports": reports.iter().map(|(p, r)| json!({ "schedule": p, "report": r })).collect::<Vec<_>>(),
        "sweep": sweep.as_ref().map(|s| json!({ "count": s.count, "disagreements": s.disagreements, "passing": s.passing, "ties": s.ties })),
    });
    let mut text = String::new();
    for (p, r) in &reports {
        text.push_str(&format!("schedule {p}: {}", r.table()));
        if !text.ends_with('\n') {
            text.push('\n');
        }
    }
    if sweep.is_some() || reports.is_empty() {
        text.push_str(&table(&header, &rows[rows.len().saturating_sub(1)..]));
    }
    Ok(Outcome {
        passed,
        summary,
        table: text,
    })
}

fn status(ok: bool) -> String {
    if ok { "pass" } else { "fail" }.into()
}

fn run_check(
    s: &Schedule,
    check: &CheckConfig,
    ctx: &RunContext,
) -> Result<CriterionReport, Failure> {
    let report = match check {
        CheckConfig::Caracstandard { tau, spacing, set } => {
            let set = match set {
                Some(k) => resolve_set(k, ctx)?,
                None => s.set.clone(),
            };
            check_caracstandard(s, &set, *tau, *spacing)?
        }
        CheckConfig::Walpha { alpha, spacing } => check_walpha(s, *alpha, *spacing),
        CheckConfig::General {
            weights,
            tau,
            spacing,
            eps,
            scale_exponent,
            norm,
        } => {
            let p = *scale_exponent;
            check_carac_general(
                s,
                weights,
                &move |n: u64| (n as f64).powf(p),
                *tau,
                *spacing,
                *eps,
                *norm,
            )?
        }
        CheckConfig::Basic {
            weights,
            u,
            v,
            eps,
            norm,
            options,
        } => check_basic_criterion(
            s,
            weights,
            &tuple(u, *norm)?,
            &tuple(v, *norm)?,
            *eps,
            options,
        )?,
    };
    Ok(report)
}

struct SweepResult {
    count: usize,
    disagreements: usize,
    passing: usize,
    ties: usize,
}

/// Random schedules with slowly drifting anchors, so that both verdicts occur;
/// the pairwise and consecutive conditions must agree at exponent 1.
fn sweep(config: &SweepConfig, seed: u64) -> SweepResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spacing = config.spacing;
    let (mut disagreements, mut passing, mut ties) = (0, 0, 0);
    for _ in 0..config.count {
        let q = rng.gen_range(2..=config.max_entries.max(2));
        let d = rng.gen_range(1..=2);
        let mut times = vec![rng.gen_range(spacing..spacing + 90)];
        for _ in 1..q {
            let last = *times.last().expect("nonempty");
            times.push(last + rng.gen_range(spacing / 2 + 1..spacing * 4));
        }
        let mut anchors = vec![(0..d)
            .map(|_| rng.gen_range(1.0..2.0))
            .collect::<Vec<f64>>()];
        for _ in 1..q {
            let prev = anchors.last().expect("nonempty").clone();
            anchors.push(
                prev.iter()
                    .map(|a| (a + rng.gen_range(-0.05..0.02)).clamp(1.0, 2.0))
                    .collect(),
            );
        }
        let set = ParamSet::new(SetKind::Point {
            coords: anchors[0].clone(),
        });
        let constants = ScheduleConstants {
            tau: 1.0,
            spacing,
            alpha: 1.0,
            beta: None,
            delta: None,
            d_const: None,
        };
        let s = Schedule::manual(set.clone(), constants, &times, &anchors)
            .expect("well-formed schedule");
        let pairwise = check_walpha(&s, 1.0, spacing).passed();
        let consecutive = check_caracstandard(&s, &set, 1.0, spacing)
            .expect("valid schedule")
            .clause("ii_gaps")
            .is_some_and(|c| c.passed());
        // An exact tie `λ_k n_k − λ_{k−1} n_{k−1} = N` passes the consecutive
        // form (≥) and fails the pairwise form (>); such schedules are counted apart.
        let tie = (1..q).any(|k| {
            (0..d).any(|i| {
                anchors[k][i] * times[k] as f64 - anchors[k - 1][i] * times[k - 1] as f64
                    == spacing as f64
            })
        });
        if tie {
            ties += 1;
            continue;
        }
        disagreements += (pairwise != consecutive) as usize;
        passing += pairwise as usize;
    }
    SweepResult {
        count: config.count,
        disagreements,
        passing,
        ties,
    }
}
