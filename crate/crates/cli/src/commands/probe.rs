use hclab::probes::{
    admissible_diameter, diameter_csv, gauge_series, separation_bound, GaugeFn, ProbeStatus,
    SeriesClass,
};
use serde_json::json;

use crate::config::{tuple, ProbeConfig};
use crate::output::{csv_text, fmt_f, table, Failure, Outcome, RunContext};

/// Probes pass unless some row is a definite failure; rows whose
/// precondition is unmet are reported as not applicable.
pub fn run(config: &ProbeConfig, ctx: &RunContext) -> Result<Outcome, Failure> {
    match config {
        ProbeConfig::Separation {
            weights,
            u,
            v,
            delta,
            pairs,
            norm,
        } => {
            let (u, v) = (tuple(u, *norm)?, tuple(v, *norm)?);
            let mut results = Vec::new();
            for p in pairs {
                results.push(separation_bound(
                    weights, &p.lambda, &p.mu, p.n, &u, &v, *delta,
                )?);
            }
            let rows: Vec<Vec<String>> = pairs
                .iter()
                .zip(&results)
                .map(|(p, r)| {
                    vec![
                        p.n.to_string(),
                        join(&p.lambda),
                        join(&p.mu),
                        status(r.status),
                        fmt_f(r.lhs),
                        fmt_f(r.rhs),
                        fmt_f(r.psi),
                        fmt_f(r.distance_lambda),
                        fmt_f(r.distance_mu),
                    ]
                })
                .collect();
            let header = [
                "n",
                "lambda",
                "mu",
                "status",
                "lhs",
                "rhs",
                "psi",
                "distance_lambda",
                "distance_mu",
            ];
            ctx.write("separation.csv", &csv_text(&header, &rows)?)?;
            let passed = results.iter().all(|r| r.status != ProbeStatus::Fail);
            Ok(Outcome {
                passed,
                summary: json!({ "probe": "separation", "rows": results }),
                table: table(&header, &rows),
            })
        }
        ProbeConfig::Diameter {
            weights,
            u,
            v,
            delta,
            times,
            grid,
            norm,
        } => {
            let (u, v) = (tuple(u, *norm)?, tuple(v, *norm)?);
            let mut results = Vec::new();
            for &n in times {
                results.push(admissible_diameter(weights, &u, &v, n, *delta, grid)?);
            }
            ctx.write("diameter.csv", &diameter_csv(&results))?;
            let rows: Vec<Vec<String>> = results
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        fmt_f(r.diameter),
                        fmt_f(r.bound),
                        r.hits.to_string(),
                        status(r.status),
                    ]
                })
                .collect();
            let passed = results.iter().all(|r| r.status != ProbeStatus::Fail);
            let text = table(&["n", "diameter", "bound", "hits", "status"], &rows);
            Ok(Outcome {
                passed,
                summary: json!({ "probe": "diameter", "rows": results }),
                table: text,
            })
        }
        ProbeConfig::Gauge {
            cases,
            delta,
            n_max,
        } => {
            let mut results = Vec::new();
            for case in cases {
                let psi = case.psi;
                results.push(gauge_series(
                    case.phi,
                    move |l| psi.log_at(l),
                    *delta,
                    *n_max,
                )?);
            }
            let rows: Vec<Vec<String>> = cases
                .iter()
                .zip(&results)
                .map(|(c, g)| {
                    vec![
                        gauge_name(c.phi),
                        fmt_f(c.psi.c),
                        fmt_f(c.psi.alpha),
                        class(g.class),
                        fmt_f(g.exponent),
                        fmt_f(g.log_exponent),
                        fmt_f(g.partial_sum),
                    ]
                })
                .collect();
            let header = [
                "phi",
                "psi_c",
                "psi_alpha",
                "class",
                "exponent",
                "log_exponent",
                "partial_sum",
            ];
            ctx.write("gauge.csv", &csv_text(&header, &rows)?)?;
            let passed = results.iter().all(|g| g.class != SeriesClass::Inconclusive);
            Ok(Outcome {
                passed,
                summary: json!({ "probe": "gauge", "rows": results }),
                table: table(&header, &rows),
            })
        }
    }
}

fn join(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn status(s: ProbeStatus) -> String {
    match s {
        ProbeStatus::Pass => "pass",
        ProbeStatus::Fail => "fail",
        ProbeStatus::NotApplicable => "not-applicable",
    }
    .into()
}

fn class(c: SeriesClass) -> String {
    match c {
        SeriesClass::Convergent => "convergent",
        SeriesClass::Divergent => "divergent",
        SeriesClass::Inconclusive => "inconclusive",
    }
    .into()
}

fn gauge_name(phi: GaugeFn) -> String {
    match phi {
        GaugeFn::Power { s } => format!("x^{s}"),
        GaugeFn::XOverLog2 => "x/log^2 x".into(),
    }
}
