//! JSON plan files.
//!
//! ```json
//! {"D": 1, "L": 100, "alpha": 1.5, "T": 2.5, "g": 0.25, "h": 0.1, "W": 0.1,
//!  "R": 4, "n_periods": 10000, "M": 10000,
//!  "axes": [{"param": "W", "values": [0.05, 0.1, 0.2]}],
//!  "observables": ["magnetization", "order_parameter"]}
//! ```
//!
//! `alpha` (and axis values) accept `"inf"`. Either `T` or `omega` must be
//! given; if both are, they must satisfy `ωT = 2π`.

use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{FieldPath, SamplingSchedule};
use crate::error::{Error, PlanIssue, Result};
use crate::experiments::{
    Axis, DriveSpec, Observable, SweepPlan, DEFAULT_DELTA, DEFAULT_SEED, DEFAULT_SMOOTHING, DEFAULT_WINDOW,
};
use crate::lattice::Alpha;

/// Default initial noise when a plan omits `W`.
pub const DEFAULT_NOISE: f64 = 0.1;

/// Relative tolerance on `ωT = 2π` when a plan gives both.
const DRIVE_CONSISTENCY: f64 = 1e-9;

/// On-disk form of a [`SweepPlan`]; every optional key has a default.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(rename = "D")]
    pub dim: Option<usize>,
    #[serde(rename = "L")]
    pub len: Option<usize>,
    pub alpha: Option<Alpha>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    pub g: Option<f64>,
    pub h: Option<f64>,
    #[serde(rename = "W", default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
    #[serde(rename = "Delta", default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub n_periods: Option<u64>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subharmonic: Option<usize>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub realizations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub axes: Vec<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observables: Option<Vec<Observable>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<SamplingSchedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smoothing: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_path: Option<FieldPath>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thermal_hold: Option<usize>,
}

impl PlanFile {
    /// Applies defaults and validates, collecting every issue.
    pub fn resolve(self) -> Result<SweepPlan> {
        let mut issues = Vec::new();
        let mut required = |key: &str, present: bool| {
            if !present {
                issues.push(PlanIssue {
                    path: key.into(),
                    message: "required field is missing".into(),
                });
            }
        };
        required("D", self.dim.is_some());
        required("L", self.len.is_some());
        required("alpha", self.alpha.is_some());
        required("g", self.g.is_some());
        required("h", self.h.is_some());
        required("n_periods", self.n_periods.is_some());

        let drive = match (self.period, self.omega) {
            (Some(t), None) => Some(DriveSpec::Period(t)),
            (None, Some(w)) => Some(DriveSpec::Omega(w)),
            (Some(t), Some(w)) => {
                if ((w * t - TAU) / TAU).abs() > DRIVE_CONSISTENCY {
                    issues.push(PlanIssue {
                        path: "omega".into(),
                        message: format!("T = {t} and omega = {w} are inconsistent: omega·T must equal 2π"),
                    });
                }
                Some(DriveSpec::Period(t))
            }
            (None, None) => {
                issues.push(PlanIssue {
                    path: "T".into(),
                    message: "one of `T` or `omega` is required".into(),
                });
                None
            }
        };
        let Some(drive) = drive.filter(|_| !issues.iter().any(|i| i.message.starts_with("required"))) else {
            return Err(Error::Plan(issues));
        };

        let mut plan = SweepPlan::new(
            self.dim.unwrap(),
            self.len.unwrap(),
            self.alpha.unwrap(),
            drive,
            self.g.unwrap(),
            self.h.unwrap(),
            self.noise.unwrap_or(DEFAULT_NOISE),
        );
        plan.name = self.name;
        plan.delta = self.delta.unwrap_or(DEFAULT_DELTA);
        plan.n_periods = self.n_periods.unwrap();
        plan.window = self.window.unwrap_or(DEFAULT_WINDOW);
        plan.subharmonic = self.subharmonic.unwrap_or(plan.subharmonic);
        plan.realizations = self.realizations.unwrap_or(1);
        plan.seed = self.seed.unwrap_or(DEFAULT_SEED);
        plan.axes = self.axes;
        if let Some(obs) = self.observables {
            plan.observables = obs;
        }
        plan.schedule = self.schedule.unwrap_or_default();
        plan.smoothing = self.smoothing.unwrap_or(DEFAULT_SMOOTHING);
        plan.field_path = self.field_path;
        plan.thermal_hold = self.thermal_hold.unwrap_or(0);

        issues.extend(plan.validate());
        if issues.is_empty() {
            Ok(plan)
        } else {
            Err(Error::Plan(issues))
        }
    }
}

impl From<&SweepPlan> for PlanFile {
    fn from(p: &SweepPlan) -> Self {
        let (period, omega) = match p.drive {
            DriveSpec::Period(t) => (Some(t), None),
            DriveSpec::Omega(w) => (None, Some(w)),
        };
        PlanFile {
            name: p.name.clone(),
            dim: Some(p.dim),
            len: Some(p.len),
            alpha: Some(p.alpha),
            period,
            omega,
            g: Some(p.g),
            h: Some(p.h),
            noise: Some(p.noise),
            delta: Some(p.delta),
            n_periods: Some(p.n_periods),
            window: Some(p.window),
            subharmonic: Some(p.subharmonic),
            realizations: Some(p.realizations),
            seed: Some(p.seed),
            axes: p.axes.clone(),
            observables: Some(p.observables.clone()),
            schedule: Some(p.schedule),
            smoothing: Some(p.smoothing),
            field_path: p.field_path,
            thermal_hold: Some(p.thermal_hold),
        }
    }
}

/// Parses and validates plan text. Syntax errors and unknown keys are
/// reported with the JSON path where they occur.
pub fn parse_plan_str(text: &str) -> Result<SweepPlan> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: PlanFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Plan(vec![PlanIssue {
            path: if path == "." { "plan".into() } else { path },
            message: e.into_inner().to_string(),
        }])
    })?;
    file.resolve()
}

pub fn parse_plan(path: &Path) -> Result<SweepPlan> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_plan_str(&text)
}

pub fn plan_to_json(plan: &SweepPlan) -> String {
    serde_json::to_string_pretty(&PlanFile::from(plan)).expect("plan files always serialize")
}
