//! Instrumentation for the negative side of the theory: orbit separation
//! and diameter bounds, gauge series, the backward-jump bound and the cost
//! of ordering a dyadic covering.

mod gauge;
mod ordering;
mod separation;

use serde::{Deserialize, Serialize};

pub use gauge::{gauge_series, GaugeFn, GaugeSeries, PowerScale, SeriesClass};
pub use ordering::{
    ordering_cells, ordering_cost, ordering_csv, saut_bound, CellOrdering, OrderingExperiment,
    OrderingParams,
};
pub use separation::{
    admissible_diameter, diameter_csv, orbit_distance, psi, separation_bound, DiameterResult,
    ParamGrid, SeparationResult,
};

/// Outcome of a probe whose precondition may fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeStatus {
    Pass,
    Fail,
    /// The precondition does not hold; this is never counted as a pass.
    NotApplicable,
}
