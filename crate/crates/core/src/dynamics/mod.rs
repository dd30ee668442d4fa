//! Exact stroboscopic evolution.
//!
//! Over the first half-period every `S^z_j` is conserved, so the effective
//! field is constant and each spin precesses about z by `κ_i T/2`. The second
//! half is a uniform rotation about x by `2πg`. One period is therefore the
//! product of two rotation matrices, with no integration error.

mod field;
mod schedule;

use std::f64::consts::TAU;
use std::sync::Arc;

use rayon::prelude::*;

pub use field::{
    effective_field_direct, effective_field_direct_into, effective_field_fft, FieldPath, FieldSolver,
    FieldWorkspace,
};
pub use schedule::SamplingSchedule;

use crate::error::{Error, Result};
use crate::lattice::InteractionKernel;
use crate::observables::{self, TimeSeries};
use crate::state::SpinConfig;
use crate::trig::sin_cos_turns;

/// Sites per rayon task in the rotation loop; smaller lattices run inline.
const PAR_CHUNK: usize = 16_384;

/// Period `T` (with `ω = 2π/T`), kick strength `g` and longitudinal field `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    period: f64,
    omega: f64,
    g: f64,
    h: f64,
}

impl DriveParams {
    pub fn from_period(period: f64, g: f64, h: f64) -> Result<Self> {
        if !period.is_finite() || period <= 0.0 {
            return Err(Error::Drive(format!("period must be positive and finite, got {period}")));
        }
        Self::checked(period, TAU / period, g, h)
    }

    pub fn from_omega(omega: f64, g: f64, h: f64) -> Result<Self> {
        if !omega.is_finite() || omega <= 0.0 {
            return Err(Error::Drive(format!("omega must be positive and finite, got {omega}")));
        }
        Self::checked(TAU / omega, omega, g, h)
    }

    fn checked(period: f64, omega: f64, g: f64, h: f64) -> Result<Self> {
        if !g.is_finite() || !h.is_finite() {
            return Err(Error::Drive(format!("g and h must be finite, got g = {g}, h = {h}")));
        }
        Ok(DriveParams { period, omega, g, h })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Cosine and sine of the x-rotation angle `2πg`.
    pub fn kick(&self) -> (f64, f64) {
        let (s, c) = sin_cos_turns(self.g);
        (c, s)
    }
}

/// First half-period: rotate `(sx, sy)` about z by `κ_i T/2`. `sz` is untouched.
pub fn precess_z(config: &mut SpinConfig, kappa: &[f64], period: f64) {
    let half = 0.5 * period;
    let rotate = |sx: &mut [f64], sy: &mut [f64], kappa: &[f64]| {
        for ((x, y), &k) in sx.iter_mut().zip(sy.iter_mut()).zip(kappa) {
            let (s, c) = (k * half).sin_cos();
            let (x0, y0) = (*x, *y);
            *x = c * x0 - s * y0;
            *y = s * x0 + c * y0;
        }
    };
    let n = config.len();
    if n >= 2 * PAR_CHUNK {
        config
            .sx
            .par_chunks_mut(PAR_CHUNK)
            .zip(config.sy.par_chunks_mut(PAR_CHUNK))
            .zip(kappa.par_chunks(PAR_CHUNK))
            .for_each(|((sx, sy), k)| rotate(sx, sy, k));
    } else {
        rotate(&mut config.sx, &mut config.sy, kappa);
    }
}

/// Second half-period: rotate `(sy, sz)` about x by `2πg`.
pub fn kick_x(config: &mut SpinConfig, cos: f64, sin: f64) {
    for (y, z) in config.sy.iter_mut().zip(config.sz.iter_mut()) {
        let (y0, z0) = (*y, *z);
        *y = cos * y0 - sin * z0;
        *z = sin * y0 + cos * z0;
    }
}

/// One full period: z-precession with the pre-step field `kappa`, then the
/// x-kick. The order matters.
pub fn stroboscopic_step(config: &mut SpinConfig, kappa: &[f64], params: &DriveParams) -> Result<()> {
    config.check_len(kappa.len())?;
    precess_z(config, kappa, params.period());
    let (c, s) = params.kick();
    kick_x(config, c, s);
    Ok(())
}

/// State handed to observers at a recording time `t = nT`.
#[derive(Debug)]
pub struct Snapshot<'a> {
    pub period: u64,
    pub params: &'a DriveParams,
    pub primary: &'a SpinConfig,
    /// Effective field of `primary` at this time (including `h`).
    pub primary_field: &'a [f64],
    pub copy: Option<&'a SpinConfig>,
    pub copy_field: Option<&'a [f64]>,
}

pub trait Observer {
    fn name(&self) -> &str;
    fn observe(&mut self, snapshot: &Snapshot<'_>) -> std::result::Result<f64, String>;
}

/// Built-in scalar diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Probe {
    Magnetization,
    /// Magnetization of the perturbed copy.
    CopyMagnetization,
    EnergyPeriodAveraged,
    EnergyFirstHalf,
    Decorrelator,
}

impl Probe {
    pub fn label(self) -> &'static str {
        match self {
            Probe::Magnetization => "magnetization",
            Probe::CopyMagnetization => "copy_magnetization",
            Probe::EnergyPeriodAveraged => "energy_period",
            Probe::EnergyFirstHalf => "energy_first_half",
            Probe::Decorrelator => "decorrelator",
        }
    }
}

impl Observer for Probe {
    fn name(&self) -> &str {
        self.label()
    }

    fn observe(&mut self, s: &Snapshot<'_>) -> std::result::Result<f64, String> {
        let copy = || s.copy.ok_or_else(|| "no perturbed copy is being evolved".to_string());
        Ok(match self {
            Probe::Magnetization => observables::magnetization(s.primary),
            Probe::CopyMagnetization => observables::magnetization(copy()?),
            Probe::EnergyPeriodAveraged => {
                observables::energy_period_averaged_from_field(s.primary, s.primary_field, s.params)
            }
            Probe::EnergyFirstHalf => {
                observables::energy_first_half_from_field(s.primary, s.primary_field, s.params.h())
            }
            Probe::Decorrelator => observables::decorrelator(s.primary, copy()?).map_err(|e| e.to_string())?,
        })
    }
}

/// A configuration (optionally with a perturbed twin) advancing under one drive.
pub struct Trajectory {
    solver: FieldSolver,
    params: DriveParams,
    primary: SpinConfig,
    copy: Option<SpinConfig>,
    field: Vec<f64>,
    copy_field: Vec<f64>,
    fields_current: bool,
    period: u64,
}

impl Trajectory {
    pub fn new(solver: FieldSolver, params: DriveParams, primary: SpinConfig) -> Result<Self> {
        let n = solver.kernel().spec().n_sites();
        primary.check_len(n)?;
        Ok(Trajectory {
            solver,
            params,
            primary,
            copy: None,
            field: vec![0.0; n],
            copy_field: Vec::new(),
            fields_current: false,
            period: 0,
        })
    }

    /// Uses the default field path for the kernel.
    pub fn from_kernel(kernel: Arc<InteractionKernel>, params: DriveParams, primary: SpinConfig) -> Result<Self> {
        Self::new(FieldSolver::with_default_path(kernel), params, primary)
    }

    /// Evolves `copy` alongside the primary under identical parameters.
    pub fn with_copy(mut self, copy: SpinConfig) -> Result<Self> {
        copy.check_len(self.primary.len())?;
        self.copy_field = vec![0.0; copy.len()];
        self.copy = Some(copy);
        self.fields_current = false;
        Ok(self)
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn params(&self) -> &DriveParams {
        &self.params
    }

    pub fn primary(&self) -> &SpinConfig {
        &self.primary
    }

    pub fn copy(&self) -> Option<&SpinConfig> {
        self.copy.as_ref()
    }

    pub fn into_configs(self) -> (SpinConfig, Option<SpinConfig>) {
        (self.primary, self.copy)
    }

    fn refresh_fields(&mut self) -> Result<()> {
        if self.fields_current {
            return Ok(());
        }
        let h = self.params.h();
        match &self.copy {
            Some(copy) => self.solver.field_pair_into(
                &self.primary.sz,
                &copy.sz,
                h,
                &mut self.field,
                &mut self.copy_field,
            )?,
            None => self.solver.field_into(&self.primary.sz, h, &mut self.field)?,
        }
        self.fields_current = true;
        Ok(())
    }

    /// Current state together with its effective fields.
    pub fn snapshot(&mut self) -> Result<Snapshot<'_>> {
        self.refresh_fields()?;
        Ok(Snapshot {
            period: self.period,
            params: &self.params,
            primary: &self.primary,
            primary_field: &self.field,
            copy: self.copy.as_ref(),
            copy_field: self.copy.as_ref().map(|_| self.copy_field.as_slice()),
        })
    }

    /// Advances both configurations by one period.
    pub fn step(&mut self) -> Result<()> {
        self.refresh_fields()?;
        stroboscopic_step(&mut self.primary, &self.field, &self.params)?;
        if let Some(copy) = &mut self.copy {
            stroboscopic_step(copy, &self.copy_field, &self.params)?;
        }
        self.fields_current = false;
        self.period += 1;
        Ok(())
    }

    pub fn run(&mut self, periods: u64) -> Result<()> {
        for _ in 0..periods {
            self.step()?;
        }
        Ok(())
    }

    /// Runs every observer on the current state.
    pub fn observe(&mut self, observers: &mut [&mut dyn Observer]) -> Result<Vec<f64>> {
        let snap = self.snapshot()?;
        observers
            .iter_mut()
            .map(|o| {
                o.observe(&snap).map_err(|message| Error::Observer {
                    name: o.name().to_string(),
                    period: snap.period,
                    message,
                })
            })
            .collect()
    }
}

/// Advances `trajectory` by `n_periods`, invoking every observer at the
/// scheduled times (relative to the trajectory's current period). Returns one
/// series per observer, labelled with its name.
pub fn evolve(
    trajectory: &mut Trajectory,
    n_periods: u64,
    schedule: &SamplingSchedule,
    observers: &mut [&mut dyn Observer],
) -> Result<Vec<TimeSeries>> {
    let start = trajectory.period();
    let mut series: Vec<TimeSeries> = observers.iter().map(|o| TimeSeries::new(o.name())).collect();
    let mut done = 0;
    for t in schedule.times(n_periods) {
        trajectory.run(t - done)?;
        done = t;
        let values = trajectory.observe(observers)?;
        for (s, v) in series.iter_mut().zip(values) {
            s.push(start + t, v)?;
        }
    }
    trajectory.run(n_periods - done)?;
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_kernel, Alpha, LatticeSpec};
    use crate::state::{init_polarized_noisy, Purpose, RngStream};

    fn kernel(dim: usize, len: usize, alpha: Alpha) -> Arc<InteractionKernel> {
        Arc::new(build_kernel(&LatticeSpec::new(dim, len, alpha).unwrap()))
    }

    #[test]
    fn drive_params_validation() {
        assert!(DriveParams::from_period(0.0, 0.25, 0.1).is_err());
        assert!(DriveParams::from_omega(-1.0, 0.25, 0.1).is_err());
        assert!(DriveParams::from_period(2.5, f64::NAN, 0.1).is_err());
        let p = DriveParams::from_omega(2.8, 0.255, 0.1).unwrap();
        assert!((p.omega() * p.period() - TAU).abs() < 1e-15);
        let p = DriveParams::from_period(2.5, 0.25, 0.1).unwrap();
        assert!((p.omega() * p.period() - TAU).abs() < 1e-15);
        assert_eq!(p.kick(), (0.0, 1.0));
    }

    #[test]
    fn no_kick_leaves_sz_alone() {
        let spec = LatticeSpec::new(1, 32, Alpha::Finite(1.5)).unwrap();
        let k = build_kernel(&spec);
        let mut c = init_polarized_noisy(&spec, 0.2, RngStream::new(1, 0, Purpose::Init)).unwrap();
        let before = c.clone();
        let kappa = effective_field_direct(&c, &k, 0.1).unwrap();
        let p = DriveParams::from_period(2.0, 0.0, 0.1).unwrap();
        stroboscopic_step(&mut c, &kappa, &p).unwrap();
        assert_eq!(c.sz, before.sz);
        for i in 0..32 {
            let (s, co) = (kappa[i] * 1.0).sin_cos();
            assert!((c.sx[i] - (co * before.sx[i] - s * before.sy[i])).abs() < 1e-15);
            assert!((c.sy[i] - (s * before.sx[i] + co * before.sy[i])).abs() < 1e-15);
        }
    }

    #[test]
    fn precession_alone_keeps_sz_bitwise() {
        let spec = LatticeSpec::new(2, 8, Alpha::Finite(3.0)).unwrap();
        let mut c = init_polarized_noisy(&spec, 0.3, RngStream::new(2, 0, Purpose::Init)).unwrap();
        let sz = c.sz.clone();
        let kappa: Vec<f64> = (0..64).map(|i| 0.1 * i as f64).collect();
        precess_z(&mut c, &kappa, 2.5);
        assert_eq!(c.sz, sz);
    }

    #[test]
    fn quarter_kick_cycles_through_four_states() {
        let k = kernel(1, 6, Alpha::Infinite);
        let p = DriveParams::from_period(2.0, 0.25, 0.0).unwrap();
        let mut t = Trajectory::from_kernel(k, p, SpinConfig::polarized(6)).unwrap();
        let expected = [[0.0, -1.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        for e in expected {
            t.step().unwrap();
            for i in 0..6 {
                assert_eq!(t.primary().spin(i), e);
            }
        }
    }

    #[test]
    fn half_kick_flips() {
        let k = kernel(2, 4, Alpha::Finite(3.0));
        let p = DriveParams::from_period(2.5, 0.5, 0.1).unwrap();
        let mut t = Trajectory::from_kernel(k, p, SpinConfig::polarized(16)).unwrap();
        for step in 1..=6 {
            t.step().unwrap();
            let z = if step % 2 == 1 { -1.0 } else { 1.0 };
            for i in 0..16 {
                let s = t.primary().spin(i);
                assert!(s[0].abs() < 1e-15 && s[1].abs() < 1e-15 && s[2] == z);
            }
        }
    }

    #[test]
    fn zero_periods_observes_once() {
        let k = kernel(1, 8, Alpha::Infinite);
        let p = DriveParams::from_period(2.5, 0.25, 0.1).unwrap();
        let mut t = Trajectory::from_kernel(k, p, SpinConfig::polarized(8)).unwrap();
        let mut m = Probe::Magnetization;
        let series = evolve(&mut t, 0, &SamplingSchedule::default(), &mut [&mut m]).unwrap();
        assert_eq!(series[0].times(), &[0]);
        assert_eq!(series[0].values(), &[1.0]);
        assert_eq!(t.period(), 0);
    }

    #[test]
    fn energy_conserved_without_drive() {
        let spec = LatticeSpec::new(2, 8, Alpha::Finite(2.5)).unwrap();
        let c = init_polarized_noisy(&spec, 0.2, RngStream::new(3, 0, Purpose::Init)).unwrap();
        let p = DriveParams::from_period(1.7, 0.0, 0.0).unwrap();
        let mut t = Trajectory::from_kernel(Arc::new(build_kernel(&spec)), p, c).unwrap();
        let mut e = Probe::EnergyPeriodAveraged;
        let series = evolve(&mut t, 200, &SamplingSchedule::every_period(), &mut [&mut e]).unwrap();
        let e0 = series[0].values()[0];
        for &v in series[0].values() {
            assert!(((v - e0) / e0).abs() < 1e-10);
        }
    }

    #[test]
    fn observer_failure_reports_period() {
        struct Failing;
        impl Observer for Failing {
            fn name(&self) -> &str {
                "failing"
            }
            fn observe(&mut self, s: &Snapshot<'_>) -> std::result::Result<f64, String> {
                if s.period >= 3 { Err("boom".into()) } else { Ok(0.0) }
            }
        }
        let k = kernel(1, 4, Alpha::Infinite);
        let p = DriveParams::from_period(2.5, 0.25, 0.1).unwrap();
        let mut t = Trajectory::from_kernel(k, p, SpinConfig::polarized(4)).unwrap();
        let err = evolve(&mut t, 10, &SamplingSchedule::every_period(), &mut [&mut Failing]).unwrap_err();
        assert!(matches!(err, Error::Observer { period: 3, .. }), "{err}");

        // The decorrelator needs a copy.
        let k = kernel(1, 4, Alpha::Infinite);
        let mut t = Trajectory::from_kernel(k, p, SpinConfig::polarized(4)).unwrap();
        assert!(evolve(&mut t, 1, &SamplingSchedule::every_period(), &mut [&mut Probe::Decorrelator]).is_err());
    }

    #[test]
    fn paired_evolution_matches_separate_runs() {
        let spec = LatticeSpec::new(1, 40, Alpha::Finite(1.5)).unwrap();
        let k = Arc::new(build_kernel(&spec));
        let a = init_polarized_noisy(&spec, 0.1, RngStream::new(9, 0, Purpose::Init)).unwrap();
        let b = init_polarized_noisy(&spec, 0.1, RngStream::new(9, 1, Purpose::Init)).unwrap();
        let p = DriveParams::from_period(2.5, 0.26, 0.1).unwrap();
        let mut pair = Trajectory::from_kernel(k.clone(), p, a.clone()).unwrap().with_copy(b.clone()).unwrap();
        let mut ta = Trajectory::from_kernel(k.clone(), p, a).unwrap();
        let mut tb = Trajectory::from_kernel(k, p, b).unwrap();
        pair.run(50).unwrap();
        ta.run(50).unwrap();
        tb.run(50).unwrap();
        let da = observables::decorrelator(pair.primary(), ta.primary()).unwrap();
        let db = observables::decorrelator(pair.copy().unwrap(), tb.primary()).unwrap();
        assert!(da < 1e-10 && db < 1e-10, "{da} {db}");
    }
}
