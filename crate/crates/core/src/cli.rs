// SPDX-License-Identifier: MIT OR Apache-2.0

//! Command-line front end.
//!
//! Every command writes its data file `<stem>.<ext>` next to a manifest
//! `<stem>.manifest.json` describing the run that produced it.

use crate::config::{PowerSection, RunConfig};
use crate::error::{Error, Result};
use crate::experiment::{
    calibrate, estimate_risk, linear_grid, power_curve, CalibrationResult, PowerDesign, Scenario, TestThresholds,
};
use crate::generators::SignalSpec;
use crate::model::DataMatrix;
use crate::rates::{alpha_range, phase_curves};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::Instant;

const DEFAULT_CALIBRATION_REPS: usize = 2000;
const DEFAULT_POWER_REPS: usize = 1000;
const DEFAULT_POWER_POINTS: usize = 10;

/// Change-point tests under heavy-tailed noise.
#[derive(Debug, Parser)]
#[command(name = "heavytail-cpt", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by all commands.
#[derive(Clone, Debug, Args)]
pub struct CommonArgs {
    /// TOML configuration file.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (created if absent).
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    /// Master seed; overrides `[run] seed`.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Monte Carlo replicates; overrides `[run] reps`.
    #[arg(long, value_name = "N")]
    pub reps: Option<usize>,
    /// Suppress progress output.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Calibrate a test's thresholds on its null noise.
    Calibrate(CommonArgs),
    /// Run a test on a data CSV (rows are coordinates, columns t1..tn).
    Test {
        #[command(flatten)]
        common: CommonArgs,
        /// Data CSV; overrides `[data] path`.
        #[arg(long, value_name = "PATH")]
        data: Option<PathBuf>,
    },
    /// Export the phase-transition exponent curves.
    PhaseDiagram {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 0.5)]
        alpha_min: f64,
        #[arg(long, default_value_t = 10.0)]
        alpha_max: f64,
        #[arg(long, default_value_t = 0.5)]
        step: f64,
    },
    /// Estimate a power curve over a grid of signal strengths.
    Power(CommonArgs),
    /// Estimate type I, type II and total risk at one alternative.
    Risk(CommonArgs),
}

/// Exit code for an error: 2 for configuration or data problems, 3 for numerical failures.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::CalibrationFailure(_) | Error::ResourceLimit(_) => 3,
        Error::InvalidArgument(_) | Error::Config(_) | Error::Io(_) => 2,
    }
}

/// Provenance record written beside every output file.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<PathBuf>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub output_file: String,
    pub tool_version: String,
    pub wall_clock_seconds: f64,
    pub started_unix_seconds: u64,
    /// SHA-256 of each input file, keyed by path.
    pub input_hashes: Vec<(String, String)>,
    /// Command-specific summary.
    pub summary: serde_json::Value,
}

struct Run {
    command: &'static str,
    common: CommonArgs,
    config: RunConfig,
    seed: u64,
    inputs: Vec<PathBuf>,
    start: Instant,
    started_unix: u64,
}

impl Run {
    fn new(command: &'static str, common: CommonArgs, require_config: bool) -> Result<Self> {
        let config = match &common.config {
            Some(path) => RunConfig::load(path)?,
            None if require_config => return Err(Error::config(format!("{command} requires --config PATH"))),
            None => RunConfig::parse("")?,
        };
        let seed = common.seed.unwrap_or(config.run.seed);
        let inputs = common.config.iter().cloned().collect();
        let started_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Ok(Self {
            command,
            common,
            config,
            seed,
            inputs,
            start: Instant::now(),
            started_unix,
        })
    }

    fn reps(&self, default: usize) -> usize {
        self.common.reps.or(self.config.run.reps).unwrap_or(default)
    }

    fn note(&self, msg: &str) {
        if !self.common.quiet {
            eprintln!("[{}] {msg}", self.command);
        }
    }

    fn out_dir(&self) -> Result<&Path> {
        std::fs::create_dir_all(&self.common.out)?;
        Ok(&self.common.out)
    }

    /// Writes `bytes` to `<stem>.<ext>` plus its manifest; returns the data path.
    fn emit(&self, stem: &str, ext: &str, bytes: &[u8], summary: serde_json::Value) -> Result<PathBuf> {
        let dir = self.out_dir()?;
        let file = format!("{stem}.{ext}");
        let path = dir.join(&file);
        std::fs::write(&path, bytes)?;
        let input_hashes = self
            .inputs
            .iter()
            .map(|p| Ok((p.display().to_string(), sha256_file(p)?)))
            .collect::<Result<Vec<_>>>()?;
        let manifest = RunManifest {
            command: self.command.into(),
            config_path: self.common.config.clone(),
            seed: self.seed,
            output_dir: dir.to_path_buf(),
            output_file: file,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            wall_clock_seconds: self.start.elapsed().as_secs_f64(),
            started_unix_seconds: self.started_unix,
            input_hashes,
            summary,
        };
        let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::config(e.to_string()))?;
        std::fs::write(dir.join(format!("{stem}.manifest.json")), json)?;
        self.note(&format!("wrote {}", path.display()));
        Ok(path)
    }
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

fn csv_error(e: csv::Error) -> Error {
    Error::config(format!("csv: {e}"))
}

fn to_json(value: &impl Serialize) -> serde_json::Value {
    serde_json::to_value(value).unwrap_or(serde_json::Value::Null)
}

/// Dispatches a parsed command line; returns the primary output path.
pub fn run(cli: Cli) -> Result<PathBuf> {
    match cli.command {
        Command::Calibrate(common) => cmd_calibrate(common),
        Command::Test { common, data } => cmd_test(common, data),
        Command::PhaseDiagram {
            common,
            alpha_min,
            alpha_max,
            step,
        } => cmd_phase_diagram(common, alpha_min, alpha_max, step),
        Command::Power(common) => cmd_power(common),
        Command::Risk(common) => cmd_risk(common),
    }
}

fn calibrate_run(run: &Run) -> Result<CalibrationResult> {
    let cfg = &run.config;
    let data = cfg.data()?;
    let test = cfg.test()?;
    let noise = cfg.noise()?;
    let reps = run.reps(DEFAULT_CALIBRATION_REPS);
    run.note(&format!(
        "calibrating {} at p={}, n={}, eps={}, R={reps}",
        test.id(),
        data.p,
        data.n,
        cfg.run.eps
    ));
    calibrate(test, noise, data.p, data.n, cfg.run.eps, reps, run.seed)
}

/// Thresholds from `[calibration] multiplier` when given, otherwise by simulation.
fn thresholds_for(run: &Run) -> Result<(TestThresholds, serde_json::Value)> {
    let cfg = &run.config;
    let data = cfg.data()?;
    let test = cfg.test()?;
    if let Some(m) = cfg.calibration.as_ref().and_then(|c| c.multiplier) {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::config(format!(
                "calibration.multiplier must be positive; got {m}"
            )));
        }
        let thr = test.profile(data.p, data.n)?.scaled(m);
        return Ok((thr, serde_json::json!({ "multiplier": m, "source": "config" })));
    }
    let cal = calibrate_run(run)?;
    let info = serde_json::json!({
        "multiplier": cal.multiplier,
        "source": "simulated",
        "reps": cal.reps,
        "achieved": cal.achieved,
    });
    Ok((cal.thresholds, info))
}

fn cmd_calibrate(common: CommonArgs) -> Result<PathBuf> {
    let run = Run::new("calibrate", common, true)?;
    let cal = calibrate_run(&run)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["test", "eps", "threshold_id", "value"])
        .map_err(csv_error)?;
    let id = cal.test.id();
    let eps = cal.eps.to_string();
    w.write_record([id, eps.as_str(), "multiplier", cal.multiplier.to_string().as_str()])
        .map_err(csv_error)?;
    for (tid, value) in cal.thresholds.table() {
        w.write_record([id, eps.as_str(), tid.as_str(), value.to_string().as_str()])
            .map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::config(e.to_string()))?;
    let summary = serde_json::json!({
        "test": to_json(&cal.test),
        "null": to_json(&cal.null),
        "p": cal.p,
        "n": cal.n,
        "reps": cal.reps,
        "achieved": cal.achieved,
        "achieved_se": cal.achieved_se,
    });
    run.emit("calibration", "csv", &bytes, summary)
}

/// Reads a `p x n` matrix whose header is `t1..tn`; errors name the 1-based data row.
pub fn read_data_csv(path: &Path, p: usize, n: usize) -> Result<DataMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::config(format!("cannot read data {}: {e}", path.display())))?;
    let header = reader.headers().map_err(csv_error)?.clone();
    if header.len() != n {
        return Err(Error::config(format!(
            "data header has {} columns but config n = {n}",
            header.len()
        )));
    }
    for (i, name) in header.iter().enumerate() {
        if name != format!("t{}", i + 1) {
            return Err(Error::config(format!(
                "data header column {} is {name:?}; expected \"t{}\"",
                i + 1,
                i + 1
            )));
        }
    }
    let mut rows = Vec::with_capacity(p);
    for (k, record) in reader.records().enumerate() {
        let row = k + 1;
        let record = record.map_err(|e| Error::config(format!("data row {row}: {e}")))?;
        if record.len() != n {
            return Err(Error::config(format!(
                "data row {row}: expected {n} fields, found {}",
                record.len()
            )));
        }
        let values = record
            .iter()
            .enumerate()
            .map(|(j, f)| {
                f.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                    Error::config(format!("data row {row}, column {}: not a finite number: {f:?}", j + 1))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(values);
    }
    if rows.len() != p {
        return Err(Error::config(format!(
            "data has {} rows but config p = {p}",
            rows.len()
        )));
    }
    DataMatrix::from_rows(&rows)
}

fn cmd_test(common: CommonArgs, data: Option<PathBuf>) -> Result<PathBuf> {
    let mut run = Run::new("test", common, true)?;
    let section = run.config.data()?.clone();
    let path = data
        .or(section.path.clone())
        .ok_or_else(|| Error::config("test requires --data PATH or [data] path"))?;
    let x = read_data_csv(&path, section.p, section.n)?;
    run.inputs.push(path);
    let (thr, info) = thresholds_for(&run)?;
    let decision = run.config.test()?.run(&x, &thr)?;
    run.note(&format!("reject = {}", decision.reject));
    let summary = serde_json::json!({ "reject": decision.reject, "calibration": info });
    run.emit("decision", "json", decision.to_json().as_bytes(), summary)
}

fn cmd_phase_diagram(common: CommonArgs, alpha_min: f64, alpha_max: f64, step: f64) -> Result<PathBuf> {
    let run = Run::new("phase-diagram", common, false)?;
    let (lo, hi, step) = match &run.config.phase {
        Some(ph) if run.common.config.is_some() => (ph.alpha_min, ph.alpha_max, ph.step),
        _ => (alpha_min, alpha_max, step),
    };
    let rows = phase_curves(&alpha_range(lo, hi, step)?);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["alpha", "curve_id", "value"]).map_err(csv_error)?;
    for r in &rows {
        w.write_record([r.alpha.to_string(), r.curve_id.clone(), r.value.to_string()])
            .map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::config(e.to_string()))?;
    let summary = serde_json::json!({ "alpha_min": lo, "alpha_max": hi, "step": step, "rows": rows.len() });
    run.emit("curves", "csv", &bytes, summary)
}

fn rho_grid(power: &PowerSection) -> Result<Vec<f64>> {
    if let Some(grid) = &power.rho {
        return Ok(grid.clone());
    }
    let max = power
        .rho_max
        .ok_or_else(|| Error::config("power needs either rho or rho_max"))?;
    if !(max.is_finite() && max > 0.0) {
        return Err(Error::config(format!("power.rho_max must be positive; got {max}")));
    }
    Ok(linear_grid(0.0, max, power.points.unwrap_or(DEFAULT_POWER_POINTS)))
}

fn cmd_power(common: CommonArgs) -> Result<PathBuf> {
    let run = Run::new("power", common, true)?;
    let cfg = &run.config;
    let data = cfg.data()?;
    let section = cfg.power()?;
    let rhos = rho_grid(section)?;
    let design = PowerDesign {
        p: data.p,
        n: data.n,
        t0: section.t0,
        s: section.s,
        noise: cfg.noise()?.clone(),
    };
    design.signal(0.0)?;
    let (thr, info) = thresholds_for(&run)?;
    let reps = run.reps(DEFAULT_POWER_REPS);
    run.note(&format!("power over {} grid points, R={reps}", rhos.len()));
    let curve = power_curve(cfg.test()?, &thr, &design, &rhos, reps, run.seed)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &curve.rows {
        w.serialize(r).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::config(e.to_string()))?;
    let summary = serde_json::json!({
        "reps": reps,
        "beta": section.beta,
        "rho_star": curve.rho_star(section.beta),
        "max_isotonic_deviation_se": curve.max_isotonic_deviation(),
        "calibration": info,
    });
    run.emit("power", "csv", &bytes, summary)
}

fn cmd_risk(common: CommonArgs) -> Result<PathBuf> {
    let run = Run::new("risk", common, true)?;
    let cfg = &run.config;
    let data = cfg.data()?;
    let alt = cfg.alt()?;
    let noise = cfg.noise()?.clone();
    let design = PowerDesign {
        p: data.p,
        n: data.n,
        t0: alt.t0,
        s: alt.s,
        noise: noise.clone(),
    };
    let null = Scenario {
        signal: SignalSpec::Null {
            p: data.p,
            n: data.n,
            base: None,
        },
        noise: noise.clone(),
    };
    let alternative = Scenario {
        signal: design.signal(alt.rho)?,
        noise,
    };
    let (thr, info) = thresholds_for(&run)?;
    let reps = run.reps(DEFAULT_POWER_REPS);
    let risk = estimate_risk(cfg.test()?, &thr, &null, &alternative, reps, run.seed)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.serialize(risk).map_err(csv_error)?;
    let bytes = w.into_inner().map_err(|e| Error::config(e.to_string()))?;
    run.emit(
        "risk",
        "csv",
        &bytes,
        serde_json::json!({ "rho": alt.rho, "calibration": info }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_partition_errors() {
        assert_eq!(exit_code(&Error::config("x")), 2);
        assert_eq!(exit_code(&Error::invalid("x")), 2);
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), 2);
        assert_eq!(exit_code(&Error::CalibrationFailure("x".into())), 3);
        assert_eq!(exit_code(&Error::ResourceLimit("x".into())), 3);
    }

    #[test]
    fn data_csv_errors_name_the_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        std::fs::write(&path, "t1,t2,t3\n1,2,3\n4,x,6\n").unwrap();
        let err = read_data_csv(&path, 2, 3).unwrap_err().to_string();
        assert!(err.contains("row 2"), "{err}");
        std::fs::write(&path, "t1,t2,t3\n1,2,3\n4,5\n").unwrap();
        let err = read_data_csv(&path, 2, 3).unwrap_err().to_string();
        assert!(err.contains("row 2"), "{err}");
        std::fs::write(&path, "t1,t2,t3\n1,2,3\n4,5,6\n").unwrap();
        let x = read_data_csv(&path, 2, 3).unwrap();
        assert_eq!(x.get(1, 2), 6.0);
        assert!(read_data_csv(&path, 3, 3).is_err());
        assert!(read_data_csv(&path, 2, 4).is_err());
    }
}
