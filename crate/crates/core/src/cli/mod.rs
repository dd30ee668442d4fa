//! Command-line front end: plan files, tables, snapshots and presets.

pub mod plan;
pub mod preset;
pub mod snapshot;
pub mod tables;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::dynamics::{FieldPath, FieldSolver, Trajectory};
use crate::error::{Error, Result};
use crate::experiments::{run_sweep, RunOptions, SweepPlan, SweepResult};
use crate::lattice::build_kernel;
use crate::state::{init_polarized_noisy, write_snapshot_csv, Purpose, RngStream};

pub use plan::{parse_plan, parse_plan_str, plan_to_json, PlanFile};
pub use preset::{preset, Scale, PRESET_IDS};
pub use snapshot::{render_snapshot, render_spacetime, spin_color, Image};
pub use tables::emit_tables;

#[derive(Debug, Parser)]
#[command(name = "dtc", version, about = "Driven classical spin lattices: sweeps, tables and snapshots")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags that override plan-file fields.
#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Master seed, overriding the plan's.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true, env = "DTC_THREADS")]
    pub threads: Option<usize>,
    /// Effective-field evaluation, overriding the plan's.
    #[arg(long, global = true, value_parser = parse_field_path)]
    pub field_path: Option<FieldPath>,
}

fn parse_field_path(s: &str) -> std::result::Result<FieldPath, String> {
    s.parse()
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a plan file and write its tables.
    Run { plan: PathBuf },
    /// Run (or just write out) the plans of a preset.
    Preset {
        id: String,
        #[arg(long, default_value = "desk")]
        scale: String,
        /// Write the preset's plan files instead of running them.
        #[arg(long)]
        print: bool,
    },
    /// List preset ids.
    Presets,
    /// Evolve one realization of a plan and write PNG/CSV snapshots.
    Snapshot {
        plan: PathBuf,
        /// Comma-separated stroboscopic periods to capture.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        periods: Vec<u64>,
        #[arg(long, default_value_t = 0)]
        realization: usize,
        /// First-axis index of the plane to draw in D = 3.
        #[arg(long)]
        slice: Option<usize>,
        /// Pixels per site.
        #[arg(long, default_value_t = 1)]
        pixel: usize,
    },
}

impl GlobalOpts {
    fn apply(&self, plan: &mut SweepPlan) {
        if let Some(seed) = self.seed {
            plan.seed = seed;
        }
        if let Some(path) = self.field_path {
            plan.field_path = Some(path);
        }
    }

    fn run_options(&self) -> RunOptions {
        RunOptions { threads: self.threads }
    }
}

fn summarize(result: &SweepResult, out: &mut impl Write) -> std::io::Result<()> {
    for point in &result.points {
        let coords: Vec<String> = point.coords.iter().map(|(p, v)| format!("{p}={v}")).collect();
        let stats: Vec<String> = point
            .stats
            .iter()
            .map(|(k, s)| match (s.mean, s.std) {
                (Some(m), Some(sd)) => format!("{k}={m:.4}±{sd:.4} (n={})", s.count),
                _ => format!("{k}=undefined"),
            })
            .collect();
        writeln!(out, "[{}] {}", coords.join(" "), stats.join("  "))?;
        for f in &point.failures {
            writeln!(out, "  failed: {f}")?;
        }
    }
    Ok(())
}

fn run_plan(plan: &SweepPlan, global: &GlobalOpts, dir: &Path, out: &mut impl Write) -> Result<()> {
    let result = run_sweep(plan, global.run_options())?;
    let files = emit_tables(&result, dir)?;
    summarize(&result, out).map_err(|e| Error::io(dir, e))?;
    writeln!(out, "wrote {} files to {}", files.len(), dir.display()).map_err(|e| Error::io(dir, e))?;
    Ok(())
}

fn snapshot(
    plan: &SweepPlan,
    periods: &[u64],
    realization: usize,
    slice: Option<usize>,
    pixel: usize,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    let point = plan.resolve_point(0)?;
    let mut periods = periods.to_vec();
    periods.sort_unstable();
    periods.dedup();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let kernel = Arc::new(build_kernel(&point.spec));
    let path = plan.field_path.unwrap_or_else(|| FieldPath::default_for(&kernel));
    let init = init_polarized_noisy(&point.spec, point.noise, RngStream::new(plan.seed, realization as u64, Purpose::Init))?;
    let mut traj = Trajectory::new(FieldSolver::new(kernel, path), point.drive, init)?;

    let mut written = Vec::new();
    let mut frames = Vec::new();
    for &n in &periods {
        traj.run(n - traj.period())?;
        let config = traj.primary();
        let png = dir.join(format!("snapshot_{n}.png"));
        render_snapshot(config, &point.spec, slice)?.upscale(pixel).write_png(&png)?;
        let csv_path = dir.join(format!("snapshot_{n}.csv"));
        let file = std::fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
        write_snapshot_csv(config, &point.spec, std::io::BufWriter::new(file))?;
        written.extend([png, csv_path]);
        if point.spec.dim() == 1 {
            frames.push(config.clone());
        }
    }
    if frames.len() > 1 {
        let png = dir.join("spacetime.png");
        render_spacetime(&frames, &point.spec)?.upscale(pixel).write_png(&png)?;
        written.push(png);
    }
    Ok(written)
}

/// Executes a parsed command line, writing progress to `out`.
pub fn execute(cli: Cli, out: &mut impl Write) -> Result<()> {
    let g = &cli.global;
    let io = |e| Error::io(&g.out, e);
    match cli.command {
        Command::Run { plan } => {
            let mut p = parse_plan(&plan)?;
            g.apply(&mut p);
            run_plan(&p, g, &g.out, out)
        }
        Command::Preset { id, scale, print } => {
            let scale: Scale = scale.parse()?;
            for (name, mut p) in preset(&id, scale)? {
                g.apply(&mut p);
                if print {
                    std::fs::create_dir_all(&g.out).map_err(io)?;
                    let path = g.out.join(format!("{name}.json"));
                    std::fs::write(&path, plan_to_json(&p) + "\n").map_err(|e| Error::io(&path, e))?;
                    writeln!(out, "{}", path.display()).map_err(io)?;
                } else {
                    writeln!(out, "== {name}").map_err(io)?;
                    run_plan(&p, g, &g.out.join(&name), out)?;
                }
            }
            Ok(())
        }
        Command::Presets => {
            for id in PRESET_IDS {
                writeln!(out, "{id}").map_err(io)?;
            }
            Ok(())
        }
        Command::Snapshot {
            plan,
            periods,
            realization,
            slice,
            pixel,
        } => {
            let mut p = parse_plan(&plan)?;
            g.apply(&mut p);
            for path in snapshot(&p, &periods, realization, slice, pixel, &g.out)? {
                writeln!(out, "{}", path.display()).map_err(io)?;
            }
            Ok(())
        }
    }
}
