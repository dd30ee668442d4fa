//! CSV tables and the run manifest.
//!
//! Floats are written with 17 significant digits so tables read back
//! bit-exactly; undefined values are empty fields. Files contain no
//! timestamps, so identical runs produce identical bytes.

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::cli::plan::PlanFile;
use crate::error::{Error, Result};
use crate::experiments::{frequency_table, ExpFit, PointResult, SweepResult};
use crate::lattice::Alpha;

pub fn format_value(v: f64) -> String {
    if v.is_infinite() && v > 0.0 {
        Alpha::Infinite.to_string()
    } else {
        format!("{v:.16e}")
    }
}

fn format_opt(v: Option<f64>) -> String {
    v.map(format_value).unwrap_or_default()
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

fn axis_header(result: &SweepResult) -> Vec<String> {
    result.plan.axes.iter().map(|a| a.param.key().to_string()).collect()
}

fn axis_fields(point: &PointResult) -> Vec<String> {
    point.coords.iter().map(|&(_, v)| format_value(v)).collect()
}

#[derive(Serialize)]
struct Manifest<'a> {
    generator: &'static str,
    version: &'static str,
    plan: PlanFile,
    seed: u64,
    grid_points: usize,
    realizations: usize,
    files: &'a [String],
    failures: Vec<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit: Option<FitRecord>,
}

#[derive(Serialize)]
struct FitRecord {
    slope: f64,
    slope_stderr: Option<f64>,
    intercept: f64,
    points: usize,
}

impl From<ExpFit> for FitRecord {
    fn from(f: ExpFit) -> Self {
        FitRecord {
            slope: f.slope,
            slope_stderr: f.slope_stderr,
            intercept: f.intercept,
            points: f.points,
        }
    }
}

/// Writes every table of `result` into `out_dir` (created if needed) and
/// returns the written paths, manifest last.
///
/// * `<stat>.csv`: axes, `<stat>_mean`, `<stat>_std`, `R_effective`
/// * `<stat>_raw.csv`: axes, realization, value
/// * `series_<label>.csv`: realization-averaged series as `point,n,value`
/// * `frequency_scan.csv`: for plans with a single `T`/`omega` axis and timescales
/// * `manifest.json`: resolved plan, seed, version, files and failures
pub fn emit_tables(result: &SweepResult, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    let axes = axis_header(result);

    let stat_keys: Vec<String> = result
        .points
        .first()
        .map(|p| p.stats.keys().cloned().collect())
        .unwrap_or_default();
    for key in &stat_keys {
        let path = out_dir.join(format!("{key}.csv"));
        let mut w = writer(&path)?;
        let mut header = axes.clone();
        header.extend([format!("{key}_mean"), format!("{key}_std"), "R_effective".into()]);
        w.write_record(&header)?;
        for point in &result.points {
            let mut row = axis_fields(point);
            match point.stat(key) {
                Some(s) => row.extend([format_opt(s.mean), format_opt(s.std), s.count.to_string()]),
                None => row.extend([String::new(), String::new(), "0".into()]),
            }
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        written.push(path);

        let path = out_dir.join(format!("{key}_raw.csv"));
        let mut w = writer(&path)?;
        let mut header = axes.clone();
        header.extend(["realization".into(), key.clone()]);
        w.write_record(&header)?;
        for point in &result.points {
            if let Some(s) = point.stat(key) {
                for (r, v) in s.raw.iter().enumerate() {
                    let mut row = axis_fields(point);
                    row.extend([r.to_string(), format_opt(*v)]);
                    w.write_record(&row)?;
                }
            }
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }

    let labels: Vec<String> = result
        .points
        .iter()
        .find(|p| !p.mean_series.is_empty())
        .map(|p| p.mean_series.iter().map(|s| s.label().to_string()).collect())
        .unwrap_or_default();
    for label in &labels {
        let path = out_dir.join(format!("series_{label}.csv"));
        let mut w = writer(&path)?;
        w.write_record(["point", "n", "value"])?;
        for point in &result.points {
            if let Some(s) = point.mean_series(label) {
                for (&t, &v) in s.times().iter().zip(s.values()) {
                    w.write_record([point.index.to_string(), t.to_string(), format_value(v)])?;
                }
            }
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }

    let mut fit = None;
    if let Ok(scan) = frequency_table(result.clone()) {
        let path = out_dir.join("frequency_scan.csv");
        let mut w = writer(&path)?;
        w.write_record(["omega", "tau_pth", "tau_th", "thermalized"])?;
        for row in &scan.rows {
            w.write_record([
                format_value(row.omega),
                format_opt(row.tau_pth),
                format_opt(row.tau_th),
                row.thermalized.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        written.push(path);
        fit = scan.fit.map(FitRecord::from);
    }

    let manifest_path = out_dir.join("manifest.json");
    let files: Vec<String> = written
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    let manifest = Manifest {
        generator: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        plan: PlanFile::from(&result.plan),
        seed: result.plan.seed,
        grid_points: result.points.len(),
        realizations: result.plan.realizations,
        files: &files,
        failures: result.points.iter().flat_map(|p| p.failures.iter().map(String::as_str)).collect(),
        fit,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(&manifest_path, text).map_err(|e| Error::io(&manifest_path, e))?;
    written.push(manifest_path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{run_sweep, Axis, DriveSpec, Observable, Param, RunOptions, SweepPlan};

    fn tiny_plan() -> SweepPlan {
        let mut p = SweepPlan::new(1, 16, Alpha::Finite(1.5), DriveSpec::Period(2.5), 0.25, 0.1, 0.1);
        p.n_periods = 40;
        p.window = 40;
        p
    }

    fn read(path: &Path) -> String {
        std::fs::read_to_string(path).unwrap()
    }

    #[test]
    fn single_point_gives_single_row() {
        let dir = tempfile::tempdir().unwrap();
        let result = run_sweep(&tiny_plan(), RunOptions::default()).unwrap();
        let files = emit_tables(&result, dir.path()).unwrap();
        let names: Vec<_> = files.iter().map(|p| p.file_name().unwrap().to_str().unwrap()).collect();
        assert_eq!(
            names,
            ["order_parameter.csv", "order_parameter_raw.csv", "series_magnetization.csv", "manifest.json"]
        );
        let table = read(&dir.path().join("order_parameter.csv"));
        let lines: Vec<_> = table.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "order_parameter_mean,order_parameter_std,R_effective");
        assert!(!table.contains('\r'));
        let series = read(&dir.path().join("series_magnetization.csv"));
        assert_eq!(series.lines().count(), 1 + 41);
        assert!(series.lines().nth(1).unwrap().starts_with("0,0,"));
    }

    #[test]
    fn means_read_back_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let mut p = tiny_plan();
        p.realizations = 3;
        p.axes = vec![Axis::new(Param::Alpha, [1.5, f64::INFINITY])];
        let result = run_sweep(&p, RunOptions::default()).unwrap();
        emit_tables(&result, dir.path()).unwrap();
        let mut rdr = csv::Reader::from_path(dir.path().join("order_parameter.csv")).unwrap();
        assert_eq!(
            rdr.headers().unwrap(),
            vec!["alpha", "order_parameter_mean", "order_parameter_std", "R_effective"]
        );
        let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
        assert_eq!(&rows[1][0], "inf");
        for (row, point) in rows.iter().zip(&result.points) {
            let stat = point.stat("order_parameter").unwrap();
            assert_eq!(row[1].parse::<f64>().unwrap().to_bits(), stat.mean.unwrap().to_bits());
            assert_eq!(row[2].parse::<f64>().unwrap().to_bits(), stat.std.unwrap().to_bits());
            assert_eq!(&row[3], "3");
        }
    }

    #[test]
    fn undefined_values_are_empty_fields() {
        let dir = tempfile::tempdir().unwrap();
        let mut p = tiny_plan();
        p.observables = vec![Observable::Timescales];
        p.axes = vec![Axis::new(Param::Omega, [2.5])];
        let result = run_sweep(&p, RunOptions::default()).unwrap();
        emit_tables(&result, dir.path()).unwrap();
        // 40 periods is far too short to thermalize.
        let table = read(&dir.path().join("tau_th.csv"));
        assert_eq!(table.lines().nth(1).unwrap(), format!("{},,,0", format_value(2.5)));
        let scan = read(&dir.path().join("frequency_scan.csv"));
        assert!(scan.lines().nth(1).unwrap().ends_with(",,0"));
        let manifest: serde_json::Value = serde_json::from_str(&read(&dir.path().join("manifest.json"))).unwrap();
        assert!(manifest.get("fit").is_none());
    }

    #[test]
    fn reruns_are_byte_identical() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let mut p = tiny_plan();
        p.realizations = 2;
        p.observables = vec![Observable::OrderParameter, Observable::Decorrelator, Observable::EnergyPeriod];
        let fa = emit_tables(&run_sweep(&p, RunOptions::default()).unwrap(), a.path()).unwrap();
        let fb = emit_tables(&run_sweep(&p, RunOptions { threads: Some(2) }).unwrap(), b.path()).unwrap();
        assert_eq!(fa.len(), fb.len());
        for (x, y) in fa.iter().zip(&fb) {
            assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap(), "{}", x.display());
        }
    }
}
