use hclab::probes::{ordering_cost, ordering_csv, OrderingParams};
use serde_json::json;

use crate::config::OrderingsConfig;
use crate::output::{fmt_f, table, Failure, Outcome, RunContext};

/// Greedy schedules for each ordering. Admissibility is reported, not
/// required: the run passes when some ordering meets the global separation
/// test.
pub fn run(config: &OrderingsConfig, ctx: &RunContext) -> Result<Outcome, Failure> {
    if config.orderings.is_empty() {
        return Err(Failure::Config("no orderings requested".into()));
    }
    let mut params = OrderingParams::new(config.m, config.alpha, config.spacing);
    params.n1 = config.n1;
    params.d_const = config.d_const.unwrap_or(params.d_const);
    params.slack = config.slack.unwrap_or(params.slack);
    let mut rows = Vec::new();
    for &o in &config.orderings {
        rows.push(ordering_cost(&params, o)?);
    }
    ctx.write("orderings.csv", &ordering_csv(&rows))?;
    let best = rows.iter().map(|r| r.n_final).min().unwrap_or(1).max(1);
    let text_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let opt = |x: Option<String>| x.unwrap_or_else(|| "-".into());
            vec![
                r.ordering.name().into(),
                r.n_final.to_string(),
                format!("{:.2}", r.n_final as f64 / best as f64),
                fmt_f(r.ratio),
                if r.admissible { "yes" } else { "no" }.into(),
                opt(r.saut2_min_d.map(|d| format!("{d:.3}"))),
                opt(r
                    .saut2_holds
                    .map(|h| if h { "yes" } else { "no" }.to_string())),
            ]
        })
        .collect();
    let header = [
        "ordering",
        "n_final",
        "vs best",
        "n^a / 2^m",
        "admissible",
        "min D",
        "separation",
    ];
    let passed = rows.iter().any(|r| r.saut2_holds == Some(true));
    let summary = json!({ "params": params, "rows": rows, "best_n_final": best });
    Ok(Outcome {
        passed,
        summary,
        table: table(&header, &text_rows),
    })
}
