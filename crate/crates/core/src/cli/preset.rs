//! Ready-made plans for the standard protocols.
//!
//! A preset id expands to one plan per lattice dimension (or per scenario
//! for `fig2`), since `L` changes together with `D`. The `paper` scale uses
//! the full realization counts and horizons; `desk` keeps every parameter
//! but cuts realizations, horizons and grid density to run on a laptop.

use std::str::FromStr;

use crate::dynamics::SamplingSchedule;
use crate::error::{Error, Result};
use crate::experiments::{Axis, DriveSpec, Observable, Param, SweepPlan};
use crate::lattice::Alpha;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scale {
    #[default]
    Desk,
    Paper,
}

impl FromStr for Scale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "paper" => Ok(Scale::Paper),
            _ => Err(Error::InvalidArgument(format!("unknown scale `{s}`; use desk or paper"))),
        }
    }
}

pub const PRESET_IDS: [&str; 10] = [
    "fig2", "fig3", "fig4", "fig5a", "fig5b", "fig5c", "fig5d", "fig5e", "fig5f", "fig6",
];

/// Lattice sizes per dimension: `(D, L)`.
const FIG3_LATTICES: [(usize, usize); 3] = [(1, 200), (2, 20), (3, 7)];
const FIG5_LATTICES: [(usize, usize); 3] = [(1, 150), (2, 12), (3, 6)];
const FIG6_LATTICES: [(usize, usize); 3] = [(1, 2000), (2, 50), (3, 20)];
/// Interaction range used for each dimension in the frequency and noise scans.
const RANGE_BY_DIM: [Alpha; 3] = [Alpha::Finite(1.5), Alpha::Finite(4.0), Alpha::Infinite];

fn range(dim: usize) -> Alpha {
    RANGE_BY_DIM[dim - 1]
}

/// Grid `start, start + step, …` up to `stop` inclusive, rounded to 10⁻⁹.
fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| ((start + k as f64 * step) * 1e9).round() / 1e9).collect()
}

fn thin(values: Vec<f64>, scale: Scale, keep_every: usize) -> Vec<f64> {
    match scale {
        Scale::Paper => values,
        Scale::Desk => values.into_iter().step_by(keep_every).collect(),
    }
}

fn log_schedule(dense: u64) -> SamplingSchedule {
    SamplingSchedule {
        dense_periods: dense,
        dense_stride: 1,
        per_decade: 64,
        snap: 4,
    }
}

fn named(mut plan: SweepPlan, name: String) -> (String, SweepPlan) {
    plan.name = Some(name.clone());
    (name, plan)
}

/// Quantum-vs-classical period doubling: three (α, W) scenarios, each
/// scanned over ω.
fn fig2(scale: Scale) -> Vec<(String, SweepPlan)> {
    [("i", Alpha::Infinite, 0.1), ("ii", Alpha::Finite(1.5), 0.1), ("iii", Alpha::Finite(1.5), 0.2)]
        .into_iter()
        .map(|(tag, alpha, w)| {
            let mut p = SweepPlan::new(1, 100, alpha, DriveSpec::Omega(3.0), 0.515, 0.1, w);
            p.delta = 0.01;
            p.subharmonic = 2;
            p.window = 1000;
            p.axes = vec![Axis::new(Param::Omega, [3.0, 4.0, 5.0])];
            p.observables = vec![
                Observable::Magnetization,
                Observable::EnergyPeriod,
                Observable::Decorrelator,
                Observable::OrderParameter,
                Observable::Timescales,
                Observable::Plateau,
            ];
            p.schedule = SamplingSchedule {
                dense_periods: 1000,
                dense_stride: 1,
                per_decade: 64,
                snap: 2,
            };
            (p.realizations, p.n_periods) = match scale {
                Scale::Paper => (100, 1_000_000),
                Scale::Desk => (20, 100_000),
            };
            named(p, format!("fig2-{tag}"))
        })
        .collect()
}

/// Interaction-range dependence of the 4-DTC at ω = 2.2.
fn fig3(scale: Scale) -> Vec<(String, SweepPlan)> {
    FIG3_LATTICES
        .iter()
        .map(|&(dim, len)| {
            let mut p = SweepPlan::new(dim, len, Alpha::Infinite, DriveSpec::Omega(2.2), 0.26, 0.1, 0.1);
            let alphas: Vec<f64> = match dim {
                1 => vec![1.25, 1.5, 2.0, 3.0, f64::INFINITY],
                2 => vec![2.5, 3.0, 4.0, 6.0, f64::INFINITY],
                _ => vec![3.5, 4.0, 6.0, f64::INFINITY],
            };
            p.axes = vec![Axis::new(Param::Alpha, alphas)];
            p.observables = vec![
                Observable::Magnetization,
                Observable::EnergyFirstHalf,
                Observable::Decorrelator,
                Observable::OrderParameter,
                Observable::Timescales,
                Observable::Plateau,
            ];
            p.schedule = log_schedule(10_000);
            p.thermal_hold = 64;
            (p.realizations, p.n_periods) = match scale {
                Scale::Paper => (50, 1_000_000),
                Scale::Desk => (8, 100_000),
            };
            named(p, format!("fig3-d{dim}"))
        })
        .collect()
}

/// Frequency scaling of τ_pth and τ_th.
fn fig4(scale: Scale) -> Vec<(String, SweepPlan)> {
    fig3(scale)
        .into_iter()
        .map(|(_, mut p)| {
            p.alpha = range(p.dim);
            p.axes = vec![Axis::new(Param::Omega, [2.2, 2.5, 2.8, 3.1])];
            p.n_periods = 1_000_000;
            let name = format!("fig4-d{}", p.dim);
            named(p, name)
        })
        .collect()
}

/// Phase diagrams from the subharmonic order parameter over the first 10⁴
/// periods: (g, α) at T = 2.5 for `a`–`c`, (g, T) for `d`–`f`.
fn fig5(panel: char, scale: Scale) -> Vec<(String, SweepPlan)> {
    let (dim, len) = match panel {
        'a' | 'd' => FIG5_LATTICES[0],
        'b' | 'e' => FIG5_LATTICES[1],
        _ => FIG5_LATTICES[2],
    };
    let g_axis = Axis::new(Param::G, thin(grid(0.2, 0.3, 0.005), scale, 2));
    let mut p = SweepPlan::new(dim, len, range(dim), DriveSpec::Period(2.5), 0.25, 0.1, 0.1);
    p.axes = if matches!(panel, 'a' | 'b' | 'c') {
        let alphas: Vec<f64> = match dim {
            1 => grid(1.25, 3.0, 0.25),
            2 => grid(2.5, 8.0, 0.5),
            _ => grid(3.5, 8.0, 0.5),
        };
        let mut alphas = thin(alphas, scale, 2);
        alphas.push(f64::INFINITY);
        vec![g_axis, Axis::new(Param::Alpha, alphas)]
    } else {
        vec![g_axis, Axis::new(Param::Period, thin(grid(0.5, 4.0, 0.25), scale, 2))]
    };
    p.n_periods = 10_000;
    p.window = 10_000;
    p.observables = vec![Observable::Magnetization, Observable::OrderParameter];
    p.schedule = log_schedule(10_000);
    p.realizations = match scale {
        Scale::Paper => 50,
        Scale::Desk => 2,
    };
    vec![named(p, format!("fig5{panel}"))]
}

/// Initial-noise transition of the order parameter over the first 5000 periods.
fn fig6(scale: Scale) -> Vec<(String, SweepPlan)> {
    FIG6_LATTICES
        .iter()
        .filter(|&&(dim, _)| scale == Scale::Paper || dim == 1)
        .map(|&(dim, len)| {
            let mut p = SweepPlan::new(dim, len, range(dim), DriveSpec::Period(2.5), 0.25, 0.1, 0.1);
            p.axes = vec![Axis::new(Param::Noise, thin(grid(0.05, 0.3, 0.01), scale, 5))];
            p.n_periods = 5000;
            p.window = 5000;
            p.observables = vec![Observable::Magnetization, Observable::OrderParameter];
            p.schedule = log_schedule(5000);
            p.realizations = match scale {
                Scale::Paper => 20,
                Scale::Desk => 4,
            };
            named(p, format!("fig6-d{dim}"))
        })
        .collect()
}

/// Named plans for preset `id`.
pub fn preset(id: &str, scale: Scale) -> Result<Vec<(String, SweepPlan)>> {
    Ok(match id {
        "fig2" => fig2(scale),
        "fig3" => fig3(scale),
        "fig4" => fig4(scale),
        "fig5a" | "fig5b" | "fig5c" | "fig5d" | "fig5e" | "fig5f" => fig5(id.chars().last().unwrap(), scale),
        "fig6" => fig6(scale),
        _ => {
            return Err(Error::UnknownPreset {
                id: id.into(),
                available: PRESET_IDS.iter().map(|s| s.to_string()).collect(),
            })
        }
    })
}
