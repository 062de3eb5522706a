use hclab::constructor::{synthesize, verify_orbits};
use serde_json::json;

use crate::config::{resolve_set, tuple, ConstructConfig};
use crate::output::{clause_status, csv_text, fmt_f, table, Failure, Outcome, RunContext};

pub fn run(config: &ConstructConfig, ctx: &RunContext) -> Result<Outcome, Failure> {
    let set = resolve_set(&config.set, ctx)?;
    let u = tuple(&config.initial, config.norm)?;
    let targets = config
        .targets
        .iter()
        .map(|t| tuple(t, config.norm))
        .collect::<Result<Vec<_>, _>>()?;
    let candidate = synthesize(
        &config.weights,
        &u,
        &targets,
        &set,
        config.eps,
        &config.source,
        &config.options,
    )?;
    ctx.write("candidate.json", &(candidate.to_json() + "\n"))?;
    let rows: Vec<Vec<String>> = candidate
        .rounds
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let (cells, first, last) = match &r.schedule {
                Some(s) => (
                    s.len(),
                    s.entries[0].n.to_string(),
                    s.last_time().to_string(),
                ),
                None => (0, String::new(), String::new()),
            };
            vec![
                (k + 1).to_string(),
                cells.to_string(),
                first,
                last,
                r.spacing.to_string(),
                r.start.to_string(),
                r.end.to_string(),
                fmt_f(r.achieved_eps),
            ]
        })
        .collect();
    let header = [
        "round",
        "cells",
        "first_n",
        "last_n",
        "spacing",
        "start",
        "end",
        "achieved_eps",
    ];
    ctx.write("rounds.csv", &csv_text(&header, &rows)?)?;
    let report = verify_orbits(
        &candidate,
        &config.weights,
        &set,
        &targets,
        config.eps,
        config.verify_samples,
    )?;
    let clause_rows: Vec<Vec<String>> = report
        .clauses
        .iter()
        .map(|c| vec![c.id.clone(), clause_status(c.status), fmt_f(c.margin)])
        .collect();
    ctx.write(
        "orbits.csv",
        &csv_text(&["clause", "status", "margin"], &clause_rows)?,
    )?;
    let summary = json!({
        "rounds": candidate.rounds.len(),
        "coefficients": candidate.coefficients(),
        "verification": report,
    });
    let mut text = table(&header, &rows);
    text.push_str(&report.table());
    Ok(Outcome {
        passed: report.passed(),
        summary,
        table: text,
    })
}
