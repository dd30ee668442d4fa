//! Declarative parameter sweeps with realization averaging.
//!
//! A [`SweepPlan`] fixes base parameters plus up to two axes. Every
//! `(grid point, realization)` pair is an independent task with its own
//! random streams, so results do not depend on the worker count.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dynamics::{
    DriveParams, FieldPath, FieldSolver, Observer, Probe, SamplingSchedule, Trajectory,
};
use crate::error::{Error, PlanIssue, Result};
use crate::lattice::{build_kernel, Alpha, InteractionKernel, LatticeSpec};
use crate::observables::{
    extract_timescales, moving_average, subharmonic_order_parameter, TimeSeries, TimescalePair, D_INFINITY,
    THERMAL_FRACTION,
};
use crate::state::{init_polarized_noisy, perturb_copy, Purpose, RngStream};

/// Plan fields that an axis may sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Param {
    #[serde(rename = "D")]
    Dim,
    #[serde(rename = "L")]
    Len,
    #[serde(rename = "alpha")]
    Alpha,
    #[serde(rename = "T")]
    Period,
    #[serde(rename = "omega")]
    Omega,
    #[serde(rename = "g")]
    G,
    #[serde(rename = "h")]
    H,
    #[serde(rename = "W")]
    Noise,
    #[serde(rename = "Delta")]
    Delta,
}

impl Param {
    pub fn key(self) -> &'static str {
        match self {
            Param::Dim => "D",
            Param::Len => "L",
            Param::Alpha => "alpha",
            Param::Period => "T",
            Param::Omega => "omega",
            Param::G => "g",
            Param::H => "h",
            Param::Noise => "W",
            Param::Delta => "Delta",
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// A grid value; `+inf` is written as `"inf"` in JSON (for `alpha`).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AxisValue(pub f64);

impl Serialize for AxisValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        Alpha::from_f64(self.0).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for AxisValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        Alpha::deserialize(deserializer).map(|a| AxisValue(a.as_f64()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: Param,
    pub values: Vec<AxisValue>,
}

impl Axis {
    pub fn new(param: Param, values: impl IntoIterator<Item = f64>) -> Self {
        Axis {
            param,
            values: values.into_iter().map(AxisValue).collect(),
        }
    }
}

/// How the drive frequency was specified; the other is derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriveSpec {
    Period(f64),
    Omega(f64),
}

/// Diagnostics a sweep can request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Magnetization,
    EnergyPeriod,
    EnergyFirstHalf,
    Decorrelator,
    OrderParameter,
    Timescales,
    Plateau,
}

impl Observable {
    fn needs_copy(self) -> bool {
        matches!(self, Observable::Decorrelator | Observable::Timescales | Observable::Plateau)
    }
}

/// Fully resolved sweep description. See the `cli::plan` module for its JSON form.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub name: Option<String>,
    pub dim: usize,
    pub len: usize,
    pub alpha: Alpha,
    pub drive: DriveSpec,
    pub g: f64,
    pub h: f64,
    /// Initial polar-angle noise `W`.
    pub noise: f64,
    /// Perturbation `Δ` of the twin copy.
    pub delta: f64,
    pub n_periods: u64,
    /// Fourier window `M` in periods.
    pub window: usize,
    /// Subharmonic order `n` of the order parameter.
    pub subharmonic: usize,
    pub realizations: usize,
    pub seed: u64,
    pub axes: Vec<Axis>,
    pub observables: Vec<Observable>,
    pub schedule: SamplingSchedule,
    /// Moving-average window (in recorded samples) applied before
    /// extracting timescales and plateaus.
    pub smoothing: usize,
    pub field_path: Option<FieldPath>,
    /// Stop a realization once this many consecutive smoothed decorrelator
    /// samples sit above the thermal threshold (0 runs the full horizon).
    pub thermal_hold: usize,
}

pub const DEFAULT_DELTA: f64 = 0.01;
pub const DEFAULT_WINDOW: usize = 10_000;
pub const DEFAULT_SMOOTHING: usize = 16;
pub const DEFAULT_SEED: u64 = 0x5eed;

impl SweepPlan {
    /// A plan with the given lattice and drive and library defaults elsewhere.
    pub fn new(dim: usize, len: usize, alpha: Alpha, drive: DriveSpec, g: f64, h: f64, noise: f64) -> Self {
        SweepPlan {
            name: None,
            dim,
            len,
            alpha,
            drive,
            g,
            h,
            noise,
            delta: DEFAULT_DELTA,
            n_periods: DEFAULT_WINDOW as u64,
            window: DEFAULT_WINDOW,
            subharmonic: 4,
            realizations: 1,
            seed: DEFAULT_SEED,
            axes: Vec::new(),
            observables: vec![Observable::Magnetization, Observable::OrderParameter],
            schedule: SamplingSchedule::default(),
            smoothing: DEFAULT_SMOOTHING,
            field_path: None,
            thermal_hold: 0,
        }
    }

    pub fn wants(&self, o: Observable) -> bool {
        self.observables.contains(&o)
    }

    fn needs_copy(&self) -> bool {
        self.observables.iter().any(|o| o.needs_copy())
    }

    /// Number of grid points (1 without axes).
    pub fn n_points(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    /// Axis coordinates of grid point `index`; the last axis varies fastest.
    pub fn point_coords(&self, mut index: usize) -> Vec<(Param, f64)> {
        let mut out = vec![(Param::G, 0.0); self.axes.len()];
        for (slot, axis) in out.iter_mut().zip(&self.axes).rev() {
            let k = index % axis.values.len();
            index /= axis.values.len();
            *slot = (axis.param, axis.values[k].0);
        }
        out
    }

    /// Base parameters with the point's axis values applied.
    pub fn resolve_point(&self, index: usize) -> Result<PointParams> {
        let mut p = self.clone();
        for (param, value) in self.point_coords(index) {
            match param {
                Param::Dim => p.dim = as_count(param, value)?,
                Param::Len => p.len = as_count(param, value)?,
                Param::Alpha => p.alpha = Alpha::from_f64(value),
                Param::Period => p.drive = DriveSpec::Period(value),
                Param::Omega => p.drive = DriveSpec::Omega(value),
                Param::G => p.g = value,
                Param::H => p.h = value,
                Param::Noise => p.noise = value,
                Param::Delta => p.delta = value,
            }
        }
        let spec = LatticeSpec::new(p.dim, p.len, p.alpha)?;
        let drive = match p.drive {
            DriveSpec::Period(t) => DriveParams::from_period(t, p.g, p.h)?,
            DriveSpec::Omega(w) => DriveParams::from_omega(w, p.g, p.h)?,
        };
        if p.noise.is_nan() || p.noise < 0.0 {
            return Err(Error::InvalidArgument(format!("W must be >= 0, got {}", p.noise)));
        }
        if p.delta.is_nan() || p.delta < 0.0 {
            return Err(Error::InvalidArgument(format!("Delta must be >= 0, got {}", p.delta)));
        }
        Ok(PointParams {
            spec,
            drive,
            noise: p.noise,
            delta: p.delta,
        })
    }

    /// Every invariant violation, located by field path.
    pub fn validate(&self) -> Vec<PlanIssue> {
        let mut issues = Vec::new();
        self.check_shape(&mut |path: &str, message: String| {
            issues.push(PlanIssue { path: path.into(), message })
        });
        self.check_points(&mut issues);
        issues
    }

    fn check_shape(&self, issue: &mut impl FnMut(&str, String)) {
        if self.realizations == 0 {
            issue("R", "at least one realization is required".into());
        }
        if self.wants(Observable::OrderParameter) {
            if self.window == 0 {
                issue("M", "Fourier window must be at least 1".into());
            }
            if self.window as u64 > self.n_periods {
                issue("M", format!("Fourier window {} exceeds n_periods = {}", self.window, self.n_periods));
            }
            if self.subharmonic < 2 {
                issue("subharmonic", format!("must be at least 2, got {}", self.subharmonic));
            } else if !self.window.is_multiple_of(self.subharmonic) {
                issue(
                    "M",
                    format!("must be a multiple of the subharmonic order {}", self.subharmonic),
                );
            }
        }
        if self.smoothing == 0 {
            issue("smoothing", "moving-average window must be at least 1".into());
        }
        if let Err(e) = self.schedule.validate() {
            issue("schedule", e);
        }
        if self.observables.is_empty() {
            issue("observables", "at least one observable is required".into());
        }
        if self.axes.len() > 2 {
            issue("axes", format!("at most two axes are supported, got {}", self.axes.len()));
        }
        for (i, axis) in self.axes.iter().enumerate() {
            if axis.values.is_empty() {
                issue(&format!("axes[{i}].values"), "grid must not be empty".into());
            }
            if self.axes[..i].iter().any(|a| a.param == axis.param) {
                issue(&format!("axes[{i}].param"), format!("`{}` is swept twice", axis.param));
            }
        }
        let drive_axes = self
            .axes
            .iter()
            .filter(|a| matches!(a.param, Param::Period | Param::Omega))
            .count();
        if drive_axes > 1 {
            issue("axes", "T and omega cannot both be swept".into());
        }
    }

    fn check_points(&self, issues: &mut Vec<PlanIssue>) {
        // Each grid point must resolve; identical failures are reported once.
        let mut seen = std::collections::BTreeSet::new();
        for index in 0..self.n_points() {
            let Err(e) = self.resolve_point(index) else { continue };
            let message = e.to_string();
            if !seen.insert(message.clone()) {
                continue;
            }
            let path = if self.axes.is_empty() {
                path_for_error(&e).to_string()
            } else {
                let coords = self
                    .point_coords(index)
                    .iter()
                    .map(|(p, v)| format!("{p}={v}"))
                    .collect::<Vec<_>>()
                    .join(",");
                format!("{}[{coords}]", path_for_error(&e))
            };
            issues.push(PlanIssue { path, message });
        }
    }
}

fn path_for_error(e: &Error) -> &'static str {
    match e {
        Error::Lattice(msg) if msg.contains("dimension must") => "D",
        Error::Lattice(msg) if msg.contains("alpha") => "alpha",
        Error::Lattice(_) => "L",
        Error::Drive(msg) if msg.starts_with("period") => "T",
        Error::Drive(msg) if msg.starts_with("omega") => "omega",
        Error::Drive(_) => "g",
        Error::InvalidArgument(msg) if msg.starts_with("W ") => "W",
        Error::InvalidArgument(msg) if msg.starts_with("Delta") => "Delta",
        Error::InvalidArgument(msg) if msg.starts_with("D ") => "D",
        Error::InvalidArgument(msg) if msg.starts_with("L ") => "L",
        _ => "plan",
    }
}

fn as_count(param: Param, value: f64) -> Result<usize> {
    if value.fract() != 0.0 || value < 0.0 || !value.is_finite() {
        return Err(Error::InvalidArgument(format!("{param} must be a non-negative integer, got {value}")));
    }
    Ok(value as usize)
}

/// Concrete parameters of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointParams {
    pub spec: LatticeSpec,
    pub drive: DriveParams,
    pub noise: f64,
    pub delta: f64,
}

/// Everything recorded for one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationRecord {
    pub series: Vec<TimeSeries>,
    pub order_parameter: Option<f64>,
    pub timescales: Option<TimescalePair>,
    pub plateau: Option<f64>,
    /// Last simulated period (earlier than `n_periods` after an early stop).
    pub final_period: u64,
}

impl RealizationRecord {
    pub fn series(&self, label: &str) -> Option<&TimeSeries> {
        self.series.iter().find(|s| s.label() == label)
    }
}

/// Probes recorded for a plan; magnetization is always present.
fn probes(plan: &SweepPlan) -> Vec<Probe> {
    let mut out = vec![Probe::Magnetization];
    if plan.wants(Observable::EnergyPeriod) {
        out.push(Probe::EnergyPeriodAveraged);
    }
    if plan.wants(Observable::EnergyFirstHalf) {
        out.push(Probe::EnergyFirstHalf);
    }
    if plan.needs_copy() {
        out.push(Probe::Decorrelator);
    }
    out
}

/// Recording times: the schedule merged with every period of the Fourier window.
fn recording_times(plan: &SweepPlan) -> Vec<u64> {
    let mut times = plan.schedule.times(plan.n_periods);
    if plan.wants(Observable::OrderParameter) {
        let dense = (plan.window as u64).min(plan.n_periods + 1);
        times.extend(0..dense);
        times.sort_unstable();
        times.dedup();
    }
    times
}

/// Simulates realization `r` of one grid point.
pub fn run_realization(
    plan: &SweepPlan,
    point: &PointParams,
    kernel: &Arc<InteractionKernel>,
    r: usize,
) -> Result<RealizationRecord> {
    let init = init_polarized_noisy(&point.spec, point.noise, RngStream::new(plan.seed, r as u64, Purpose::Init))?;
    let path = plan.field_path.unwrap_or_else(|| FieldPath::default_for(kernel));
    let solver = FieldSolver::new(kernel.clone(), path);
    let mut traj = Trajectory::new(solver, point.drive, init.clone())?;
    if plan.needs_copy() {
        let copy = perturb_copy(&init, point.delta, RngStream::new(plan.seed, r as u64, Purpose::Perturb))?;
        traj = traj.with_copy(copy)?;
    }

    let mut probes = probes(plan);
    let decorrelator_slot = probes.iter().position(|p| *p == Probe::Decorrelator);
    let mut series: Vec<TimeSeries> = probes.iter().map(|p| TimeSeries::new(p.label())).collect();
    let hold = if decorrelator_slot.is_some() { plan.thermal_hold } else { 0 };
    let threshold = THERMAL_FRACTION * D_INFINITY;
    let mut above = 0usize;
    // Trailing mean of the raw decorrelator, for the early-stop test.
    let mut trail: std::collections::VecDeque<f64> = Default::default();

    let mut done = 0u64;
    for t in recording_times(plan) {
        traj.run(t - done)?;
        done = t;
        let mut observers: Vec<&mut dyn Observer> = probes.iter_mut().map(|p| p as &mut dyn Observer).collect();
        let values = traj.observe(&mut observers)?;
        for (s, &v) in series.iter_mut().zip(&values) {
            s.push(t, v)?;
        }
        if let (Some(slot), true) = (decorrelator_slot, hold > 0) {
            trail.push_back(values[slot]);
            if trail.len() > plan.smoothing {
                trail.pop_front();
            }
            let smoothed = trail.iter().sum::<f64>() / trail.len() as f64;
            above = if smoothed >= threshold { above + 1 } else { 0 };
            if above >= hold && t >= plan.window as u64 {
                // The trailing mean is only a cheap trigger; stop only if the
                // centered smoothing used for extraction agrees on the tail.
                let smooth = moving_average(&series[slot], plan.smoothing)?;
                let tail = &smooth.values()[smooth.len().saturating_sub(hold)..];
                if tail.iter().all(|&v| v >= threshold) {
                    break;
                }
                above = 0;
            }
        }
    }

    let magnetization = &series[0];
    let order_parameter = if plan.wants(Observable::OrderParameter) {
        Some(subharmonic_order_parameter(magnetization, plan.window, plan.subharmonic)?)
    } else {
        None
    };
    let (timescales, plateau) = match decorrelator_slot {
        Some(slot) => {
            let smooth = moving_average(&series[slot], plan.smoothing)?;
            let tau = plan
                .wants(Observable::Timescales)
                .then(|| extract_timescales(&smooth, D_INFINITY))
                .transpose()?;
            let plateau = plan.wants(Observable::Plateau).then(|| decorrelator_plateau(&smooth)).flatten();
            (tau, plateau)
        }
        None => (None, None),
    };
    Ok(RealizationRecord {
        series,
        order_parameter,
        timescales,
        plateau,
        final_period: done,
    })
}

/// Height of the prethermal plateau of a smoothed decorrelator record.
///
/// The record is resampled on a log-time grid (one point per 1/8 decade)
/// after the first 10 % crossing; the plateau is the value at the flattest
/// stretch, the window of three consecutive log points with the smallest
/// spread. `None` if `d` never leaves the chaotic growth regime.
pub fn decorrelator_plateau(d: &TimeSeries) -> Option<f64> {
    let start = d
        .values()
        .iter()
        .position(|&v| v >= crate::observables::PRETHERMAL_FRACTION * D_INFINITY)?;
    let t = &d.times()[start..];
    let v = &d.values()[start..];
    let t0 = (t[0].max(1)) as f64;
    let t_end = *t.last()? as f64;
    let steps = ((t_end / t0).log10() * 8.0).floor() as usize;
    if steps < 3 {
        return None;
    }
    let log_points: Vec<f64> = (0..=steps)
        .map(|k| {
            let target = t0 * 10f64.powf(k as f64 / 8.0);
            let i = t.partition_point(|&x| (x as f64) < target).min(t.len() - 1);
            v[i]
        })
        .collect();
    log_points
        .windows(3)
        .map(|w| {
            let hi = w.iter().cloned().fold(f64::MIN, f64::max);
            let lo = w.iter().cloned().fold(f64::MAX, f64::min);
            (hi - lo, w[1])
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, v)| v)
}

/// Mean, standard deviation and raw values of one scalar over realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct Stat {
    pub raw: Vec<Option<f64>>,
    pub mean: Option<f64>,
    /// Sample standard deviation (`n − 1`); zero for a single value.
    pub std: Option<f64>,
    /// Number of defined values.
    pub count: usize,
}

impl Stat {
    pub fn from_raw(raw: Vec<Option<f64>>) -> Self {
        let defined: Vec<f64> = raw.iter().flatten().copied().collect();
        let count = defined.len();
        let (mean, std) = if count == 0 {
            (None, None)
        } else {
            let mean = defined.iter().sum::<f64>() / count as f64;
            let std = if count > 1 {
                (defined.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
            } else {
                0.0
            };
            (Some(mean), Some(std))
        };
        Stat { raw, mean, std, count }
    }
}

/// Aggregated results of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub index: usize,
    pub coords: Vec<(Param, f64)>,
    pub stats: BTreeMap<String, Stat>,
    /// Realization-averaged series, on the union of recorded times.
    pub mean_series: Vec<TimeSeries>,
    pub records: Vec<Option<RealizationRecord>>,
    pub failures: Vec<String>,
}

impl PointResult {
    pub fn stat(&self, key: &str) -> Option<&Stat> {
        self.stats.get(key)
    }

    pub fn mean_series(&self, label: &str) -> Option<&TimeSeries> {
        self.mean_series.iter().find(|s| s.label() == label)
    }

    pub fn realizations_ok(&self) -> usize {
        self.records.iter().filter(|r| r.is_some()).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub plan: SweepPlan,
    pub points: Vec<PointResult>,
}

pub const STAT_ORDER_PARAMETER: &str = "order_parameter";
pub const STAT_TAU_PTH: &str = "tau_pth";
pub const STAT_TAU_TH: &str = "tau_th";
pub const STAT_PLATEAU: &str = "plateau";

fn aggregate(plan: &SweepPlan, index: usize, outcomes: Vec<Result<RealizationRecord>>) -> PointResult {
    let mut failures = Vec::new();
    let records: Vec<Option<RealizationRecord>> = outcomes
        .into_iter()
        .enumerate()
        .map(|(r, o)| match o {
            Ok(rec) => Some(rec),
            Err(e) => {
                failures.push(
                    Error::Task {
                        point: index,
                        realization: r,
                        source: Box::new(e),
                    }
                    .to_string(),
                );
                None
            }
        })
        .collect();
    let mut stats = BTreeMap::new();
    let collect = |f: &dyn Fn(&RealizationRecord) -> Option<f64>| {
        Stat::from_raw(records.iter().map(|r| r.as_ref().and_then(f)).collect())
    };
    if plan.wants(Observable::OrderParameter) {
        stats.insert(STAT_ORDER_PARAMETER.to_string(), collect(&|r| r.order_parameter));
    }
    if plan.wants(Observable::Timescales) {
        stats.insert(STAT_TAU_PTH.to_string(), collect(&|r| r.timescales.and_then(|t| t.tau_pth)));
        stats.insert(STAT_TAU_TH.to_string(), collect(&|r| r.timescales.and_then(|t| t.tau_th)));
    }
    if plan.wants(Observable::Plateau) {
        stats.insert(STAT_PLATEAU.to_string(), collect(&|r| r.plateau));
    }
    let mean_series = average_series(&records);
    PointResult {
        index,
        coords: plan.point_coords(index),
        stats,
        mean_series,
        records,
        failures,
    }
}

/// Per-label average over the realizations that recorded each time.
fn average_series(records: &[Option<RealizationRecord>]) -> Vec<TimeSeries> {
    let Some(first) = records.iter().flatten().next() else {
        return Vec::new();
    };
    first
        .series
        .iter()
        .map(|template| {
            let label = template.label();
            let mut acc: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
            for rec in records.iter().flatten() {
                if let Some(s) = rec.series(label) {
                    for (&t, &v) in s.times().iter().zip(s.values()) {
                        let e = acc.entry(t).or_insert((0.0, 0));
                        e.0 += v;
                        e.1 += 1;
                    }
                }
            }
            let (times, values) = acc.into_iter().map(|(t, (s, c))| (t, s / c as f64)).unzip();
            TimeSeries::from_parts(label, times, values).expect("BTreeMap keys are increasing")
        })
        .collect()
}

/// All realizations of a single resolved point, sequentially.
pub fn run_point(plan: &SweepPlan, index: usize) -> Result<PointResult> {
    let point = plan.resolve_point(index)?;
    let kernel = Arc::new(build_kernel(&point.spec));
    let outcomes = (0..plan.realizations)
        .map(|r| run_realization(plan, &point, &kernel, r))
        .collect();
    Ok(aggregate(plan, index, outcomes))
}

/// Worker-pool settings for [`run_sweep`].
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses rayon's global pool.
    pub threads: Option<usize>,
}

/// Evaluates every `(grid point, realization)` task in parallel.
///
/// Points whose parameters do not resolve, and realizations that fail, are
/// kept as failures in the result rather than aborting the sweep.
pub fn run_sweep(plan: &SweepPlan, options: RunOptions) -> Result<SweepResult> {
    let issues = plan.validate();
    if !issues.is_empty() {
        return Err(Error::Plan(issues));
    }
    let run = || {
        let resolved: Vec<Result<(PointParams, Arc<InteractionKernel>)>> = (0..plan.n_points())
            .into_par_iter()
            .map(|i| {
                let p = plan.resolve_point(i)?;
                let k = Arc::new(build_kernel(&p.spec));
                Ok((p, k))
            })
            .collect();
        let tasks: Vec<(usize, usize)> = (0..plan.n_points())
            .flat_map(|i| (0..plan.realizations).map(move |r| (i, r)))
            .collect();
        let outcomes: Vec<Result<RealizationRecord>> = tasks
            .par_iter()
            .map(|&(i, r)| match &resolved[i] {
                Ok((p, k)) => run_realization(plan, p, k, r),
                Err(e) => Err(Error::InvalidArgument(e.to_string())),
            })
            .collect();
        let mut outcomes = outcomes.into_iter();
        (0..plan.n_points())
            .map(|i| {
                let chunk: Vec<_> = outcomes.by_ref().take(plan.realizations).collect();
                aggregate(plan, i, chunk)
            })
            .collect::<Vec<_>>()
    };
    let points = match options.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    Ok(SweepResult {
        plan: plan.clone(),
        points,
    })
}

/// Least-squares line `ln τ = intercept + slope · ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFit {
    pub slope: f64,
    /// Standard error of the slope; `None` with only two points.
    pub slope_stderr: Option<f64>,
    pub intercept: f64,
    pub points: usize,
}

/// Fits `ln τ` against `ω` over points with a defined, positive `τ`.
pub fn fit_exponential(points: &[(f64, Option<f64>)]) -> Option<ExpFit> {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|&(w, tau)| tau.filter(|&t| t > 0.0).map(|t| (w, t.ln())))
        .collect();
    let n = xy.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = (n > 2).then(|| {
        let rss: f64 = xy.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        (rss / (nf - 2.0) / sxx).sqrt()
    });
    Some(ExpFit {
        slope,
        slope_stderr,
        intercept,
        points: n,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyRow {
    pub omega: f64,
    pub tau_pth: Option<f64>,
    pub tau_th: Option<f64>,
    /// Realizations whose decorrelator crossed the thermal threshold.
    pub thermalized: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyScan {
    pub result: SweepResult,
    pub rows: Vec<FrequencyRow>,
    pub fit: Option<ExpFit>,
}

/// Tabulates `(ω, τ_pth, τ_th)` from a finished sweep with a single `T` or
/// `omega` axis and fits `ln τ_th` against `ω`.
///
/// A point's `τ_th` enters the fit only if every realization crossed.
pub fn frequency_table(result: SweepResult) -> Result<FrequencyScan> {
    let plan = &result.plan;
    if plan.axes.len() != 1 || !matches!(plan.axes[0].param, Param::Omega | Param::Period) {
        return Err(Error::InvalidArgument(
            "a frequency scan needs exactly one axis, over omega or T".into(),
        ));
    }
    if !plan.wants(Observable::Timescales) {
        return Err(Error::InvalidArgument("a frequency scan needs the timescales observable".into()));
    }
    let rows: Vec<FrequencyRow> = result
        .points
        .iter()
        .map(|p| {
            let (param, value) = p.coords[0];
            let omega = if param == Param::Omega { value } else { std::f64::consts::TAU / value };
            let pth = p.stat(STAT_TAU_PTH);
            let th = p.stat(STAT_TAU_TH);
            let thermalized = th.map_or(0, |s| s.count);
            FrequencyRow {
                omega,
                tau_pth: pth.and_then(|s| s.mean),
                tau_th: th.filter(|s| s.count == plan.realizations).and_then(|s| s.mean),
                thermalized,
            }
        })
        .collect();
    let fit = fit_exponential(&rows.iter().map(|r| (r.omega, r.tau_th)).collect::<Vec<_>>());
    Ok(FrequencyScan { result, rows, fit })
}

pub fn frequency_scan(plan: &SweepPlan, options: RunOptions) -> Result<FrequencyScan> {
    if plan.axes.len() != 1 || !matches!(plan.axes[0].param, Param::Omega | Param::Period) {
        return Err(Error::InvalidArgument(
            "a frequency scan needs exactly one axis, over omega or T".into(),
        ));
    }
    frequency_table(run_sweep(plan, options)?)
}
