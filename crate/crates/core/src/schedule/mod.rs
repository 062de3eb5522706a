//! Integer time schedules: the lexicographic recursion, its certified growth
//! constants, the covering-with-schedule solver and the Lipschitz-curve
//! schedule.

mod covering;
mod curve;
mod sequence;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paramsets::{CellSpec, ParamSet};

pub use covering::{solve_covering, verify_covering, CoveringParams, CoveringSolution};
pub use curve::{adaptive_curve_schedule, lipschitz_schedule, AdaptiveParams, LipschitzParams};
pub use sequence::{
    build_sequence, recursion_constants, refined_constants, RecursionConstants, RecursionParams,
    RefinedRow, MAX_TIME,
};

/// Constants a schedule was built for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConstants {
    pub tau: f64,
    /// Required minimal spacing `N`.
    pub spacing: u64,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_const: Option<f64>,
}

/// How a schedule was produced, with the intermediate quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum ScheduleOrigin {
    Covering {
        r: usize,
        m: usize,
        n1: u64,
        gap: u64,
        s: u32,
        kappa: f64,
        c1: f64,
        c2: f64,
    },
    Lipschitz {
        step: u64,
        offset: u64,
        lipschitz: f64,
        step_threshold: f64,
    },
    Adaptive {
        theta: f64,
        offset: u64,
    },
    Manual,
}

/// One triple `(n_k, λ_k, Λ_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    /// Address in `I_r^m`, or `[k]` for curve schedules.
    pub index: Vec<u32>,
    pub n: u64,
    pub anchor: Vec<f64>,
    pub cell: CellSpec,
    /// Upper bound on the cell's diameter.
    pub diameter: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub margins: BTreeMap<String, f64>,
}

/// Ordered list of times, anchors and cells over a parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub set: ParamSet,
    pub constants: ScheduleConstants,
    pub origin: ScheduleOrigin,
    pub entries: Vec<ScheduleEntry>,
    /// Worst margin per verified property; negative means violated.
    #[serde(default)]
    pub margins: BTreeMap<String, f64>,
}

impl Schedule {
    /// A schedule from explicit times and anchors, every cell being the whole set.
    pub fn manual(
        set: ParamSet,
        constants: ScheduleConstants,
        times: &[u64],
        anchors: &[Vec<f64>],
    ) -> Result<Self> {
        if times.len() != anchors.len() || times.is_empty() {
            return Err(Error::invalid(
                "schedule",
                format!("{} times for {} anchors", times.len(), anchors.len()),
            ));
        }
        let entries = times
            .iter()
            .zip(anchors)
            .enumerate()
            .map(|(k, (&n, anchor))| ScheduleEntry {
                index: vec![k as u32 + 1],
                n,
                anchor: anchor.clone(),
                cell: CellSpec::Address { digits: Vec::new() },
                diameter: 0.0,
                margins: BTreeMap::new(),
            })
            .collect();
        Ok(Schedule {
            set,
            constants,
            origin: ScheduleOrigin::Manual,
            entries,
            margins: BTreeMap::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn times(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e.n).collect()
    }

    pub fn last_time(&self) -> u64 {
        self.entries.iter().map(|e| e.n).max().unwrap_or(0)
    }

    pub fn dim(&self) -> usize {
        self.entries.first().map_or(0, |e| e.anchor.len())
    }

    /// Whether every recorded property margin is nonnegative.
    pub fn verified(&self) -> bool {
        !self.margins.is_empty() && self.margins.values().all(|m| *m >= 0.0)
    }

    /// CSV: index, time, anchor coordinates, diameter bound and per-entry margins.
    pub fn to_csv(&self) -> String {
        let keys: Vec<&String> = {
            let mut keys: Vec<&String> =
                self.entries.iter().flat_map(|e| e.margins.keys()).collect();
            keys.sort();
            keys.dedup();
            keys
        };
        let mut out = String::from("index,n");
        for i in 1..=self.dim() {
            let _ = write!(out, ",anchor_{i}");
        }
        out.push_str(",diameter");
        for k in &keys {
            let _ = write!(out, ",margin_{k}");
        }
        out.push('\n');
        for e in &self.entries {
            let label: Vec<String> = e.index.iter().map(u32::to_string).collect();
            let _ = write!(out, "{},{}", label.join("."), e.n);
            for x in &e.anchor {
                let _ = write!(out, ",{x}");
            }
            let _ = write!(out, ",{}", e.diameter);
            for k in &keys {
                match e.margins.get(*k) {
                    Some(v) => {
                        let _ = write!(out, ",{v}");
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedules always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid("schedule JSON", e.to_string()))
    }
}

/// Sup-norm distance bound between two boxes: `max ‖λ − μ‖` over `λ ∈ [lo1,hi1]`, `μ ∈ [lo2,hi2]`.
pub(crate) fn box_far_distance(lo1: &[f64], hi1: &[f64], lo2: &[f64], hi2: &[f64]) -> f64 {
    (0..lo1.len())
        .map(|i| (hi2[i] - lo1[i]).max(hi1[i] - lo2[i]))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manual_schedule_round_trips() {
        let k = ScheduleConstants {
            tau: 1.0,
            spacing: 3,
            alpha: 1.0,
            beta: None,
            delta: None,
            d_const: None,
        };
        let s = Schedule::manual(
            ParamSet::cube(vec![1.0], 1.0),
            k,
            &[3, 6],
            &[vec![1.5], vec![2.0]],
        )
        .unwrap();
        let back = Schedule::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        let csv = s.to_csv();
        assert_eq!(csv.lines().next().unwrap(), "index,n,anchor_1,diameter");
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn far_distance_of_boxes() {
        let d = box_far_distance(&[0.0, 0.0], &[1.0, 1.0], &[2.0, 0.5], &[3.0, 0.75]);
        assert_eq!(d, 3.0);
    }
}
