use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use multilayer_fv::discretise::{Discretisation, DiscretiseError};
use multilayer_fv::stability::{round_sig, table1_bounds_for, Table1};
use multilayer_fv::stepper::{whole_steps, StepError};
use multilayer_fv::verify::VerifyError;
use multilayer_fv::{convergence_study, march, steady_state, Problem, Scheme, StabilityReport};
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, RunConfig, TauKeyword, TauSetting};
use crate::output::{aligned_table, fmt_num, write_json, write_profile};

/// Fraction of the predicted limit used when the step is `"auto"`.
pub const AUTO_SAFETY: f64 = 0.95;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Unstable(String),
    #[error("{0}")]
    Numerical(String),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Unstable(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Write { .. } => 1,
        }
    }

    fn invalid(msg: impl Into<String>) -> Self {
        CliError::Config(ConfigError::Invalid(msg.into()))
    }
}

impl From<DiscretiseError> for CliError {
    fn from(e: DiscretiseError) -> Self {
        CliError::invalid(e.to_string())
    }
}

impl From<StepError> for CliError {
    fn from(e: StepError) -> Self {
        match e {
            StepError::InvalidStep(_)
            | StepError::NonCommensurate { .. }
            | StepError::SnapshotOutOfRange { .. } => CliError::invalid(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Step(s) => s.into(),
            VerifyError::ZeroReference | VerifyError::ShapeMismatch => CliError::Numerical(e.to_string()),
            _ => CliError::invalid(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// τ = 1e-7, as in the reference study.
    Paper,
    /// τ = 1e-5, quick enough for continuous integration.
    Ci,
}

impl Preset {
    fn tau(self) -> f64 {
        match self {
            Preset::Paper => 1e-7,
            Preset::Ci => 1e-5,
        }
    }
}

/// A loaded config, its problem and where to write.
pub struct Run {
    pub config: RunConfig,
    pub problem: Problem,
    pub out: PathBuf,
}

impl Run {
    pub fn load(path: &Path, out: Option<PathBuf>) -> Result<Self, CliError> {
        let config = RunConfig::load(path)?;
        let problem = config.problem()?;
        let out = out
            .or_else(|| config.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("."));
        Ok(Run { config, problem, out })
    }

    fn n(&self) -> Result<usize, CliError> {
        Ok(self.config.n.ok_or(ConfigError::Missing("n"))?)
    }

    fn discretise(&self) -> Result<Discretisation, CliError> {
        Ok(Discretisation::new(&self.problem, self.n()?)?)
    }

    fn prepare_out(&self) -> Result<(), CliError> {
        fs::create_dir_all(&self.out).map_err(|source| CliError::Write {
            path: self.out.clone(),
            source,
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn written(path: PathBuf, r: io::Result<()>) -> Result<PathBuf, CliError> {
    r.map_err(|source| CliError::Write { path: path.clone(), source })?;
    Ok(path)
}

fn positive(name: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(CliError::invalid(format!("`{name}` must be positive, got {x}")))
    }
}

/// Largest `t_end / K` not above `limit` that also lands on every snapshot.
pub fn auto_tau(t_end: f64, snapshots: &[f64], limit: f64) -> Result<f64, CliError> {
    let first = (t_end / limit).ceil().max(1.0) as usize;
    for k in first..first + 100_000 {
        let tau = t_end / k as f64;
        if tau > limit {
            continue;
        }
        if snapshots.iter().all(|&s| whole_steps("snapshot time", s, tau).is_ok()) {
            return Ok(tau);
        }
    }
    Err(CliError::invalid(
        "no automatic step divides t_end and every snapshot time; give tau explicitly",
    ))
}

fn binding_text(table: &Table1) -> String {
    let b = table.binding();
    format!("{} bound {}", b.label, fmt_num(round_sig(b.tau, 6)))
}

#[derive(Serialize)]
struct OutputFile {
    t: f64,
    file: String,
}

#[derive(Serialize)]
struct ForwardEulerVerdict {
    tau_max_table: f64,
    binding: String,
    within_table_bound: bool,
    tau_max_exact: f64,
    rho_forward: f64,
    stable: bool,
}

#[derive(Serialize)]
struct RunMeta {
    scheme: Scheme,
    tau: f64,
    tau_source: &'static str,
    n: usize,
    unknowns: usize,
    steps: usize,
    t_end: f64,
    outputs: Vec<OutputFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stability: Option<ForwardEulerVerdict>,
    config: RunConfig,
}

pub fn solve(run: &Run, allow_unstable: bool) -> Result<Vec<PathBuf>, CliError> {
    let cfg = &run.config;
    let scheme = cfg.scheme.ok_or(ConfigError::Missing("scheme"))?;
    let t_end = positive("t_end", cfg.t_end.ok_or(ConfigError::Missing("t_end"))?)?;
    let tau_setting = cfg.tau.ok_or(ConfigError::Missing("tau"))?;
    let d = run.discretise()?;
    let table = table1_bounds_for(&run.problem, &d.mesh, &d.map);

    let (tau, tau_source) = match tau_setting {
        TauSetting::Fixed(t) => (positive("tau", t)?, "config"),
        TauSetting::Keyword(TauKeyword::Auto) => {
            (auto_tau(t_end, &cfg.snapshots, AUTO_SAFETY * table.tau_max)?, "auto")
        }
    };

    let stability = if scheme == Scheme::ForwardEuler {
        let within = tau <= table.tau_max;
        if !within && !allow_unstable {
            return Err(CliError::Unstable(format!(
                "forward Euler step {} exceeds the predicted limit; binding constraint: {} \
                 (pass --allow-unstable to march anyway)",
                fmt_num(tau),
                binding_text(&table)
            )));
        }
        let report = StabilityReport::new(&run.problem, &d.mesh, &d.map, &d.system.a, Some(tau))
            .map_err(|e| CliError::Numerical(e.to_string()))?;
        let spectral = report.spectral.expect("step was given");
        Some(ForwardEulerVerdict {
            tau_max_table: table.tau_max,
            binding: binding_text(&table),
            within_table_bound: within,
            tau_max_exact: report.tau_max_exact,
            rho_forward: spectral.rho_forward,
            stable: spectral.stable_forward,
        })
    } else {
        None
    };

    let mut times = cfg.snapshots.clone();
    times.push(t_end);
    let u0 = d.initial(&run.problem);
    let result = march(&d.system, &d.map, &u0, tau, t_end, scheme, &times)?;

    run.prepare_out()?;
    let mut files = Vec::new();
    let mut outputs = Vec::new();
    for (t, state) in result.times.iter().zip(&result.states) {
        let name = format!("solution_{}.csv", fmt_num(*t));
        let path = run.path(&name);
        files.push(written(path.clone(), write_profile(&path, &d.mesh, state))?);
        outputs.push(OutputFile { t: *t, file: name });
    }

    let meta = RunMeta {
        scheme,
        tau,
        tau_source,
        n: d.mesh.n(),
        unknowns: d.system.len(),
        steps: result.step_count,
        t_end,
        outputs,
        stability,
        config: cfg.canonical()?,
    };
    let path = run.path("run_meta.json");
    files.push(written(path.clone(), write_json(&path, &meta))?);
    Ok(files)
}

pub fn steady(run: &Run) -> Result<Vec<PathBuf>, CliError> {
    let d = run.discretise()?;
    let u = steady_state(&d.system)?;
    let state = d.reconstruct(&u)?;
    run.prepare_out()?;
    let path = run.path("steady.csv");
    Ok(vec![written(path.clone(), write_profile(&path, &d.mesh, &state))?])
}

#[derive(Serialize)]
struct StabilityOutput<'a> {
    #[serde(flatten)]
    report: &'a StabilityReport,
    tau: Option<f64>,
    /// Classical single-layer limit over the predicted limit.
    classical_ratio: f64,
}

pub fn stability(run: &Run) -> Result<(Vec<PathBuf>, String), CliError> {
    let d = run.discretise()?;
    let table = table1_bounds_for(&run.problem, &d.mesh, &d.map);
    let tau = match run.config.tau {
        None => None,
        Some(TauSetting::Fixed(t)) => Some(positive("tau", t)?),
        Some(TauSetting::Keyword(TauKeyword::Auto)) => Some(AUTO_SAFETY * table.tau_max),
    };
    let report = StabilityReport::new(&run.problem, &d.mesh, &d.map, &d.system.a, tau)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let classical_ratio = report.classical / report.tau_max();

    run.prepare_out()?;
    let path = run.path("stability_report.json");
    let out = StabilityOutput {
        report: &report,
        tau,
        classical_ratio,
    };
    let files = vec![written(path.clone(), write_json(&path, &out))?];
    Ok((files, stability_text(&report, classical_ratio)))
}

fn sig(x: f64) -> String {
    fmt_num(round_sig(x, 6))
}

fn stability_text(report: &StabilityReport, classical_ratio: f64) -> String {
    let rows: Vec<Vec<String>> = report
        .table
        .bounds
        .iter()
        .map(|b| vec![b.label.clone(), sig(b.tau)])
        .collect();
    let table = aligned_table(&["constraint".into(), "tau bound".into()], &rows);
    let mut s = format!(
        "forward Euler stability, N = {} ({} unknowns)\n\n",
        report.n, report.unknowns
    );
    let mut lines = table.lines();
    for line in lines.by_ref().take(2) {
        s.push_str(line);
        s.push('\n');
    }
    for (line, b) in lines.zip(&report.table.bounds) {
        s.push_str(format!("{line}  {}", b.annotation()).trim_end());
        s.push('\n');
    }
    s.push('\n');
    let lines = [
        ("predicted tau_max", format!("{} ({})", sig(report.tau_max()), report.table.binding().label)),
        ("Gershgorin tau_max", sig(report.gershgorin.tau_max)),
        ("exact tau_max", sig(report.tau_max_exact)),
        (
            "classical h^2/(2D)",
            format!("{} ({:.1}x the predicted limit)", sig(report.classical), classical_ratio),
        ),
    ];
    for (k, v) in lines {
        s.push_str(&format!("{k:<20}{v}\n"));
    }
    if let Some(v) = &report.spectral {
        s.push_str(&format!(
            "at tau = {}: rho_F = {}, rho_B = {}, rho_C = {}\n",
            sig(v.tau),
            sig(v.rho_forward),
            sig(v.rho_backward),
            sig(v.rho_crank_nicolson)
        ));
    }
    s
}

/// Study parameters after applying the preset.
#[derive(Debug, Clone, PartialEq)]
pub struct Study {
    pub h_list: Vec<f64>,
    pub t_eval: f64,
    pub tau: f64,
    pub schemes: Vec<Scheme>,
}

impl Study {
    /// Values in the config win; the preset fills the rest.
    pub fn resolve(config: &RunConfig, preset: Preset) -> Result<Self, CliError> {
        let s = config.study.clone().unwrap_or_default();
        let h_list = s.h_list.unwrap_or_else(|| (3..=7).map(|k| 2f64.powi(-k)).collect());
        if h_list.is_empty() {
            return Err(CliError::invalid("`study.h_list` is empty"));
        }
        let schemes = s.schemes.unwrap_or_else(|| Scheme::ALL.to_vec());
        if schemes.is_empty() {
            return Err(CliError::invalid("`study.schemes` is empty"));
        }
        Ok(Study {
            h_list,
            t_eval: positive("study.t_eval", s.t_eval.unwrap_or(0.2))?,
            tau: positive("study.tau", s.tau.unwrap_or(preset.tau()))?,
            schemes,
        })
    }
}

pub fn convergence(run: &Run, preset: Preset, allow_unstable: bool) -> Result<(Vec<PathBuf>, String), CliError> {
    let study = Study::resolve(&run.config, preset)?;
    if study.schemes.contains(&Scheme::ForwardEuler) && !allow_unstable {
        for &h in &study.h_list {
            let n = multilayer_fv::verify::intervals_for_spacing(&run.problem, h)?;
            let d = Discretisation::new(&run.problem, n)?;
            let table = table1_bounds_for(&run.problem, &d.mesh, &d.map);
            if study.tau > table.tau_max {
                return Err(CliError::Unstable(format!(
                    "forward Euler step {} exceeds the predicted limit at h = {}; binding constraint: {} \
                     (pass --allow-unstable to run anyway)",
                    fmt_num(study.tau),
                    fmt_num(h),
                    binding_text(&table)
                )));
            }
        }
    }

    let mut columns = Vec::new();
    for &scheme in &study.schemes {
        columns.push(convergence_study(&run.problem, study.tau, &study.h_list, study.t_eval, scheme)?);
    }

    let mut header = vec!["h".to_string(), "n".to_string()];
    for s in &study.schemes {
        let name = s.short_name().to_lowercase();
        header.push(format!("error_{name}"));
        header.push(format!("ratio_{name}"));
    }
    let rows: Vec<Vec<String>> = (0..study.h_list.len())
        .map(|i| {
            let mut row = vec![fmt_num(columns[0][i].h), columns[0][i].n.to_string()];
            for col in &columns {
                row.push(fmt_num(col[i].error));
                row.push(col[i].ratio.map(fmt_num).unwrap_or_default());
            }
            row
        })
        .collect();

    run.prepare_out()?;
    let path = run.path("convergence.csv");
    let write = || -> io::Result<()> {
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(&header)?;
        for row in &rows {
            w.write_record(row)?;
        }
        w.flush()
    };
    let files = vec![written(path.clone(), write())?];

    let display_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut d = vec![r[0].clone()];
            for pair in r[2..].chunks(2) {
                d.push(format!("{:.4e}", pair[0].parse::<f64>().unwrap_or(f64::NAN)));
                d.push(match pair[1].parse::<f64>() {
                    Ok(v) => format!("{v:.3}"),
                    Err(_) => "-".to_string(),
                });
            }
            d
        })
        .collect();
    let mut display_header = vec!["h".to_string()];
    for s in &study.schemes {
        display_header.push(format!("{} error", s.short_name()));
        display_header.push("ratio".to_string());
    }
    let text = format!(
        "relative errors at t = {}, tau = {}\n\n{}",
        fmt_num(study.t_eval),
        fmt_num(study.tau),
        aligned_table(&display_header, &display_rows)
    );
    Ok((files, text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_step_is_commensurate_and_below_limit() {
        let tau = auto_tau(1.0, &[], 0.3).unwrap();
        assert_eq!(tau, 0.25);
        let tau = auto_tau(1.0, &[0.5], 0.3).unwrap();
        assert_eq!(tau, 0.25);
        let tau = auto_tau(1.0, &[0.3], 0.3).unwrap();
        assert!((tau - 0.1).abs() < 1e-15);
        let tau = auto_tau(0.1, &[], 1.0).unwrap();
        assert_eq!(tau, 0.1);
    }

    #[test]
    fn preset_fills_missing_fields() {
        let mut config = RunConfig::from_json(
            r#"{"schema_version": 1,
                "layers": [{"left": 0, "right": 1, "diffusivity": 1}],
                "boundary": {"left": {"a": 1, "b": 0, "c": 1}, "right": {"a": 1, "b": 0, "c": 0}},
                "study": {"tau": 1e-4}}"#,
        )
        .unwrap();
        let s = Study::resolve(&config, Preset::Ci).unwrap();
        assert_eq!(s.tau, 1e-4);
        assert_eq!(s.h_list, vec![0.125, 0.0625, 0.03125, 0.015625, 0.0078125]);
        assert_eq!(s.t_eval, 0.2);
        assert_eq!(s.schemes, Scheme::ALL.to_vec());
        config.study = None;
        assert_eq!(Study::resolve(&config, Preset::Paper).unwrap().tau, 1e-7);
        assert_eq!(Study::resolve(&config, Preset::Ci).unwrap().tau, 1e-5);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(ConfigError::Missing("n")).exit_code(), 2);
        assert_eq!(CliError::Unstable(String::new()).exit_code(), 3);
        let diverged = StepError::Diverged { step: 3, time: 0.1, norm: 1e9 };
        assert_eq!(CliError::from(diverged).exit_code(), 4);
        assert_eq!(CliError::from(StepError::InvalidStep(-1.0)).exit_code(), 2);
    }
}
