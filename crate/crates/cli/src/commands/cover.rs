use hclab::paramsets::{box_dim_estimate, build_cover, check_cover};
use serde_json::json;

use crate::config::{resolve_set, CoverConfig};
use crate::output::{fmt_f, table, Failure, Outcome, RunContext};

pub fn run(config: &CoverConfig, ctx: &RunContext) -> Result<Outcome, Failure> {
    let set = resolve_set(&config.set, ctx)?;
    let cover = build_cover(&set, config.depth)?;
    let parent = if config.depth > 0 {
        Some(build_cover(&set, config.depth - 1)?)
    } else {
        None
    };
    let check = check_cover(&cover, parent.as_ref());
    ctx.write("cover.csv", &cover.cells_csv())?;
    let estimate = if config.box_depths.is_empty() {
        None
    } else {
        Some(box_dim_estimate(&set, &config.box_depths)?)
    };
    let mut rows = vec![
        vec!["cells".into(), cover.cells.len().to_string()],
        vec!["branching r".into(), cover.r.to_string()],
        vec!["gamma".into(), fmt_f(cover.constants.gamma)],
        vec!["rho".into(), fmt_f(cover.constants.rho)],
        vec!["C(set)".into(), fmt_f(cover.constants.c_lambda)],
        vec!["max diam / bound".into(), fmt_f(check.max_diam_ratio)],
        vec![
            "uncovered samples".into(),
            check.uncovered_samples.to_string(),
        ],
        vec![
            "nesting violations".into(),
            check.nesting_violations.to_string(),
        ],
    ];
    if let Some(e) = &estimate {
        rows.push(vec!["box-dimension slope".into(), fmt_f(e.slope)]);
    }
    let summary = json!({
        "depth": config.depth,
        "cells": cover.cells.len(),
        "constants": cover.constants,
        "samples": cover.cloud.len(),
        "check": check,
        "box_dimension": estimate,
    });
    Ok(Outcome {
        passed: check.holds(),
        summary,
        table: table(&["quantity", "value"], &rows),
    })
}
