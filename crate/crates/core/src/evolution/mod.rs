//! Time integration, characteristics, multipeakon dynamics and the
//! sign/growth monitors.

mod characteristics;
mod monitors;
mod multipeakon;
mod solver;

pub use characteristics::{characteristics_evolve, CharacteristicHistory, CharacteristicState};
pub use monitors::{
    apriori_monitors, apriori_monitors_with, positivity_certificate, positivity_certificate_tol,
    positivity_certificate_with, AprioriReport, CheckOutcome, PositivityReport,
    SnapshotMonitor, DEFAULT_SLOPE_TOLERANCE,
};
pub use multipeakon::{
    multipeakon_evolve, multipeakon_rhs, MultipeakonHistory, MultipeakonOutcome, COLLISION_GAP,
};
pub use solver::{dp_rhs, evolve, require_completed, DpOperator};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::functionals::InvariantRecord;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const DEFAULT_CFL: f64 = 0.15;
pub const DEFAULT_BLOWUP_THRESHOLD: f64 = -100.0;

/// Explicit step or `cfl·dx/max(1, ‖u‖∞)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum TimeStep {
    #[default]
    Auto,
    Fixed(f64),
}

impl Serialize for TimeStep {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TimeStep::Auto => s.serialize_str("auto"),
            TimeStep::Fixed(h) => s.serialize_f64(*h),
        }
    }
}

impl<'de> Deserialize<'de> for TimeStep {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) if s == "auto" => Ok(TimeStep::Auto),
            Raw::Text(s) => Err(serde::de::Error::custom(format!("dt must be \"auto\" or a number, got {s:?}"))),
            Raw::Number(h) => Ok(TimeStep::Fixed(h)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub dt: TimeStep,
    pub t_end: f64,
    pub cfl: f64,
    pub dealias: bool,
    pub blowup_slope_threshold: f64,
    pub record_every: usize,
    /// Keep the field at every recorded step.
    pub keep_snapshots: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: TimeStep::Auto,
            t_end: 1.0,
            cfl: DEFAULT_CFL,
            dealias: true,
            blowup_slope_threshold: DEFAULT_BLOWUP_THRESHOLD,
            record_every: 100,
            keep_snapshots: true,
        }
    }
}

impl SolverConfig {
    pub const FIELDS: &'static [&'static str] =
        &["dt", "t_end", "cfl", "dealias", "blowup_slope_threshold", "record_every", "keep_snapshots"];

    pub fn validate(&self) -> Result<()> {
        if let TimeStep::Fixed(h) = self.dt {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::InvalidParameter(format!("dt must be positive, got {h}")));
            }
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidParameter(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::InvalidParameter(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter("record_every must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    BlowupDetected { t: f64, min_slope: f64 },
    Error { t: f64, message: String },
}

/// Recorded states of one run; `records[i]` describes `snapshots[i]` at `times[i]`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<Field>,
    pub records: Vec<InvariantRecord>,
    pub termination: Termination,
    pub steps: usize,
    /// `(t, inf u_x)` after every step.
    pub step_slopes: Vec<(f64, f64)>,
}

impl Trajectory {
    pub fn new() -> Self {
        Self {
            times: Vec::new(),
            snapshots: Vec::new(),
            records: Vec::new(),
            termination: Termination::Completed,
            steps: 0,
            step_slopes: Vec::new(),
        }
    }

    /// Builds a trajectory from externally produced snapshots.
    pub fn from_snapshots(times: Vec<f64>, snapshots: Vec<Field>) -> Result<Self> {
        if times.len() != snapshots.len() {
            return Err(Error::InvalidParameter("times and snapshots differ in length".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("snapshot times must strictly increase".into()));
        }
        let records = times.iter().zip(&snapshots).map(|(&t, u)| crate::functionals::invariant_suite(u, t)).collect();
        Ok(Self { times, snapshots, records, termination: Termination::Completed, steps: 0, step_slopes: Vec::new() })
    }

    fn push(&mut self, t: f64, u: Field, rec: InvariantRecord, keep: bool) {
        self.times.push(t);
        if keep || self.snapshots.is_empty() {
            self.snapshots.push(u);
        } else {
            *self.snapshots.last_mut().expect("nonempty") = u;
        }
        self.records.push(rec);
    }

    pub fn final_field(&self) -> &Field {
        self.snapshots.last().expect("trajectory has an initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has an initial state")
    }

    pub fn blew_up(&self) -> bool {
        matches!(self.termination, Termination::BlowupDetected { .. })
    }

    /// Pairs of `(time, snapshot)` when every recorded state was kept.
    pub fn states(&self) -> impl Iterator<Item = (f64, &Field)> {
        self.times.iter().copied().zip(self.snapshots.iter())
    }

    pub fn has_all_snapshots(&self) -> bool {
        self.snapshots.len() == self.times.len()
    }
}

impl Default for Trajectory {
    fn default() -> Self {
        Self::new()
    }
}
