//! Browser bindings: three small experiments that return JSON strings for
//! the static page in `static/`. The plain functions are the tested
//! surface; the `wasm_bindgen` wrappers only convert errors.

use hclab::probes::{
    gauge_series, ordering_cost, CellOrdering, GaugeFn, OrderingParams, PowerScale, SeriesClass,
};
use hclab::schedule::{build_sequence, recursion_constants, RecursionParams};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest depth the page may request; keeps each call well under a second.
pub const MAX_WEB_DEPTH: usize = 6;

#[derive(Serialize)]
struct GaugeView {
    class: SeriesClass,
    /// Analytic answer: `Σ n^{−sα}` converges iff `sα > 1`.
    expected: Option<SeriesClass>,
    exponent: f64,
    log_exponent: f64,
    partial_sum: f64,
}

/// Classifies `Σ φ(2δ/ψ(n))` for `φ = x^s` (or `x/log²x` when `s` is not
/// positive) and `ψ(n) = c·n^α`.
pub fn gauge(s: f64, c: f64, alpha: f64, delta: f64) -> Result<String, String> {
    let phi = if s > 0.0 {
        GaugeFn::Power { s }
    } else {
        GaugeFn::XOverLog2
    };
    let psi = PowerScale { c, alpha };
    let g = gauge_series(phi, |l| psi.log_at(l), delta, 10_000).map_err(|e| e.to_string())?;
    let expected = match phi {
        GaugeFn::Power { s } if (s * alpha - 1.0).abs() > 1e-9 => Some(if s * alpha > 1.0 {
            SeriesClass::Convergent
        } else {
            SeriesClass::Divergent
        }),
        GaugeFn::Power { .. } => Some(SeriesClass::Divergent),
        GaugeFn::XOverLog2 if alpha == 1.0 => Some(SeriesClass::Convergent),
        GaugeFn::XOverLog2 => None,
    };
    let view = GaugeView {
        class: g.class,
        expected,
        exponent: g.exponent,
        log_exponent: g.log_exponent,
        partial_sum: g.partial_sum,
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct OrderingRow {
    ordering: &'static str,
    n_final: u64,
    ratio: f64,
    admissible: bool,
    min_d: Option<f64>,
    separation: Option<bool>,
}

/// Greedy final times of the three cell orderings of `[1,2]²` at depth `m`.
pub fn orderings(m: usize, alpha: f64, spacing: u64) -> Result<String, String> {
    if m > MAX_WEB_DEPTH {
        return Err(format!("depth {m} above the page limit {MAX_WEB_DEPTH}"));
    }
    let params = OrderingParams::new(m, alpha, spacing);
    let rows = [
        CellOrdering::First,
        CellOrdering::Second,
        CellOrdering::Third,
    ]
    .into_iter()
    .map(|o| {
        let e = ordering_cost(&params, o).map_err(|e| e.to_string())?;
        Ok(OrderingRow {
            ordering: o.name(),
            n_final: e.n_final,
            ratio: e.ratio,
            admissible: e.admissible,
            min_d: e.saut2_min_d,
            separation: e.saut2_holds,
        })
    })
    .collect::<Result<Vec<_>, String>>()?;
    serde_json::to_string(&rows).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct SequenceView {
    terms: Vec<u64>,
    bound: f64,
    c1: f64,
    c2: f64,
}

/// The lexicographic recursion with its certified bound `c1·n1 + c2·r^m·A`.
pub fn sequence(
    alpha: f64,
    rho: f64,
    r: usize,
    m: usize,
    n1: u64,
    gap: u64,
) -> Result<String, String> {
    if m > MAX_WEB_DEPTH {
        return Err(format!("depth {m} above the page limit {MAX_WEB_DEPTH}"));
    }
    let terms = build_sequence(&RecursionParams::new(alpha, rho, r, m, n1, gap))
        .map_err(|e| e.to_string())?;
    let k = recursion_constants(alpha, rho, r).map_err(|e| e.to_string())?;
    let bound = k.c1 * n1 as f64 + k.c2 * (r as f64).powi(m as i32) * gap as f64;
    serde_json::to_string(&SequenceView {
        terms,
        bound,
        c1: k.c1,
        c2: k.c2,
    })
    .map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = gauge)]
pub fn gauge_js(s: f64, c: f64, alpha: f64, delta: f64) -> Result<String, JsValue> {
    gauge(s, c, alpha, delta).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = orderings)]
pub fn orderings_js(m: usize, alpha: f64, spacing: u64) -> Result<String, JsValue> {
    orderings(m, alpha, spacing).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = sequence)]
pub fn sequence_js(
    alpha: f64,
    rho: f64,
    r: usize,
    m: usize,
    n1: u64,
    gap: u64,
) -> Result<String, JsValue> {
    sequence(alpha, rho, r, m, n1, gap).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn gauge_matches_the_analytic_answer() {
        for (s, alpha) in [(3.0, 0.5), (1.5, 0.5), (0.5, 1.0)] {
            let v: Value = serde_json::from_str(&gauge(s, 1.0, alpha, 0.25).unwrap()).unwrap();
            assert_eq!(v["class"], v["expected"], "s {s} alpha {alpha}");
        }
        let v: Value = serde_json::from_str(&gauge(0.0, 1.0, 1.0, 0.25).unwrap()).unwrap();
        assert_eq!(v["class"], "convergent");
    }

    #[test]
    fn nested_blocks_win_at_depth_four() {
        let rows: Value = serde_json::from_str(&orderings(4, 0.4, 10).unwrap()).unwrap();
        let n = |i: usize| rows[i]["n_final"].as_u64().unwrap();
        assert!(n(2) < n(1) && n(1) < n(0));
        assert!(orderings(7, 0.4, 10).is_err());
    }

    #[test]
    fn sequence_stays_under_its_bound() {
        let v: Value = serde_json::from_str(&sequence(0.5, 0.1, 4, 3, 100, 10).unwrap()).unwrap();
        let terms = v["terms"].as_array().unwrap();
        assert_eq!(terms.len(), 64);
        assert!(terms
            .iter()
            .all(|t| t.as_f64().unwrap() <= v["bound"].as_f64().unwrap()));
        assert!(sequence(0.5, 0.5, 4, 3, 100, 10)
            .unwrap_err()
            .contains("rho^(1/alpha)*r < 1"));
    }
}
