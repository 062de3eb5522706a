use hclab::paramsets::address_label;
use hclab::schedule::{
    adaptive_curve_schedule, build_sequence, lipschitz_schedule, recursion_constants,
    solve_covering, RecursionParams, Schedule,
};
use serde_json::json;

use crate::config::{resolve_set, ScheduleConfig};
use crate::output::{csv_text, fmt_f, table, Failure, Outcome, RunContext};

pub fn run(config: &ScheduleConfig, ctx: &RunContext) -> Result<Outcome, Failure> {
    match config {
        ScheduleConfig::Sequence { params } => sequence(params, ctx),
        ScheduleConfig::Covering { set, params } => {
            let set = resolve_set(set, ctx)?;
            let solution = solve_covering(&set, params)?;
            let worst = solution.worst_margins();
            let summary = json!({
                "presubdivision_depth": solution.presubdivision_depth,
                "target_c": solution.target_c,
                "constants": solution.constants,
                "pieces": solution.pieces.len(),
                "cells": solution.pieces.iter().map(Schedule::len).sum::<usize>(),
                "worst_margins": worst,
            });
            emit(&solution.pieces, solution.verified(), summary, ctx)
        }
        ScheduleConfig::Lipschitz { set, params } => {
            let set = resolve_set(set, ctx)?;
            let s = lipschitz_schedule(&set, params)?;
            let summary = json!({ "origin": s.origin, "cells": s.len(), "margins": s.margins });
            let ok = s.verified();
            emit(&[s], ok, summary, ctx)
        }
        ScheduleConfig::Adaptive {
            set,
            weights,
            params,
        } => {
            let set = resolve_set(set, ctx)?;
            let s = adaptive_curve_schedule(&set, weights, params)?;
            let summary = json!({ "origin": s.origin, "cells": s.len(), "margins": s.margins });
            let ok = s.verified();
            emit(&[s], ok, summary, ctx)
        }
    }
}

/// Writes `schedule.csv` (all pieces, with a piece column) and `schedule.json`.
fn emit(
    pieces: &[Schedule],
    passed: bool,
    summary: serde_json::Value,
    ctx: &RunContext,
) -> Result<Outcome, Failure> {
    let mut csv = String::new();
    for (p, s) in pieces.iter().enumerate() {
        let body = s.to_csv();
        let mut lines = body.lines();
        let header = lines.next().unwrap_or_default();
        if p == 0 {
            csv.push_str(&format!("piece,{header}\n"));
        }
        for line in lines {
            csv.push_str(&format!("{},{line}\n", p + 1));
        }
    }
    ctx.write("schedule.csv", &csv)?;
    ctx.write_json("schedule.json", &pieces)?;
    let rows: Vec<Vec<String>> = pieces
        .iter()
        .enumerate()
        .map(|(p, s)| {
            let worst = s.margins.values().copied().fold(f64::INFINITY, f64::min);
            vec![
                (p + 1).to_string(),
                s.len().to_string(),
                s.entries[0].n.to_string(),
                s.last_time().to_string(),
                fmt_f(worst),
            ]
        })
        .collect();
    let shown = if rows.len() > 20 {
        &rows[..20]
    } else {
        &rows[..]
    };
    let mut text = table(
        &["piece", "cells", "first n", "last n", "worst margin"],
        shown,
    );
    if rows.len() > 20 {
        text.push_str(&format!("... {} more pieces\n", rows.len() - 20));
    }
    Ok(Outcome {
        passed,
        summary,
        table: text,
    })
}

/// The recursion with its spacing and growth-bound checks.
fn sequence(params: &RecursionParams, ctx: &RunContext) -> Result<Outcome, Failure> {
    params.validate()?;
    let seq = build_sequence(params)?;
    let spacing_ok = seq.windows(2).all(|w| w[1] >= w[0] + params.gap);
    let max = seq.iter().copied().max().unwrap_or(0);
    // The certified bound covers the plain recursion (scale 1) only.
    let bound = if params.scale == 1.0 {
        let c = recursion_constants(params.alpha, params.rho, params.r)?;
        Some((
            c.c1,
            c.c2,
            c.c1 * params.n1 as f64
                + c.c2 * (params.r as f64).powi(params.m as i32) * params.gap as f64,
        ))
    } else {
        None
    };
    let bound_ok = bound.is_none_or(|(_, _, b)| max as f64 <= b);
    let rows: Vec<Vec<String>> = seq
        .iter()
        .enumerate()
        .map(|(k, n)| {
            vec![
                (k + 1).to_string(),
                address_label(k, params.r, params.m),
                n.to_string(),
            ]
        })
        .collect();
    ctx.write("sequence.csv", &csv_text(&["k", "address", "n"], &rows)?)?;
    let summary = json!({
        "terms": seq.len(),
        "max": max,
        "spacing_ok": spacing_ok,
        "c1": bound.map(|b| b.0),
        "c2": bound.map(|b| b.1),
        "bound": bound.map(|b| b.2),
        "bound_ok": bound_ok,
    });
    let mut lines = vec![
        vec!["terms".into(), seq.len().to_string()],
        vec!["max n".into(), max.to_string()],
        vec![
            "spacing".into(),
            if spacing_ok { "ok" } else { "VIOLATED" }.into(),
        ],
    ];
    if let Some((c1, c2, b)) = bound {
        lines.push(vec![
            "c1, c2".into(),
            format!("{}, {}", fmt_f(c1), fmt_f(c2)),
        ]);
        lines.push(vec![
            "c1 n1 + c2 r^m A".into(),
            format!(
                "{} ({})",
                fmt_f(b),
                if bound_ok { "holds" } else { "VIOLATED" }
            ),
        ]);
    }
    Ok(Outcome {
        passed: spacing_ok && bound_ok,
        summary,
        table: table(&["quantity", "value"], &lines),
    })
}
