//! Command-line front end.
//!
//! Every subcommand resolves its parameters from flags overlaid on an
//! optional JSON config file (flags win), validates them before any
//! computation, writes CSV data plus a JSON sidecar echoing the resolved
//! configuration, and finishes with a plain-text summary. Physics
//! parameters (`alpha`, `temperature`, `dt`, `tau`/`t-final`) have no
//! silent defaults: they must come from a flag or the config file.
//!
//! Exit codes: 0 success, 1 validation error, 2 runtime error.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::engine::{MixConfig, Temperature};
use crate::experiments::{
    aggregate_cells, pi_pc, run_annealing, sk_benchmark, CellResult, Observable, ObservableSpec,
    QsLabels, SkBenchConfig,
};
use crate::ising::{husimi_temperley, quantum_signature, sk_random, IsingInstance};
use crate::output::{
    append_line, format_f64, write_csv, write_csv_mixed, write_json, write_text,
};
use crate::schedule::Schedule;
use crate::tls::{
    locate_kink, stable_branch, sweep_stationary, tls_evolve, tls_stationary, Stability,
    SweepAxis, TlsParams, TlsState,
};

/// Environment variable selecting the default output directory.
pub const OUT_DIR_ENV: &str = "QCMIX_OUT_DIR";

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "error: {msg}"),
            CliError::Runtime(msg) => write!(f, "runtime error: {msg}"),
        }
    }
}

macro_rules! runtime_from {
    ($($ty:ty),*) => {
        $(impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Runtime(e.to_string())
            }
        })*
    };
}

runtime_from!(
    crate::engine::EngineError,
    crate::ising::IsingError,
    crate::schedule::ScheduleError,
    crate::tls::TlsError,
    crate::experiments::ExperimentError,
    crate::output::OutputError
);

#[derive(Parser, Debug)]
#[command(
    name = "qcmix",
    version,
    about = "Interpolated quantum-classical spin dynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the closed-form two-level dynamics.
    TlsEvolve(TlsEvolveArgs),
    /// Stationary points of the two-level dynamics with stability labels.
    TlsStationary(TlsStationaryArgs),
    /// Trace two-level stationary branches over alpha or temperature.
    TlsSweep(TlsSweepArgs),
    /// Anneal a spin model under a power-law ramp of s(t).
    Anneal(AnnealArgs),
    /// Evolve a spin model at constant s.
    Quench(QuenchArgs),
    /// Isolated/cluster probability ratio of the quantum-signature model.
    QsRatio(QsRatioArgs),
    /// Spin-glass benchmark grid over seeds, alpha, tau, and gamma.
    SkBench(SkBenchArgs),
    /// Write a model instance to JSON.
    InstanceDump(InstanceDumpArgs),
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// JSON config file providing defaults for any flag.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path prefix (default: $QCMIX_OUT_DIR/<subcommand> or ./<subcommand>).
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug, Default)]
struct TlsEvolveArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long = "h")]
    h: Option<f64>,
    #[arg(long)]
    gamma_x: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    sample_every: Option<usize>,
    /// Initial occupation (default 0.5: the uniform superposition).
    #[arg(long)]
    z0: Option<f64>,
    /// Initial coherence phase (default 0).
    #[arg(long)]
    theta0: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct TlsStationaryArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long = "h")]
    h: Option<f64>,
    #[arg(long)]
    gamma_x: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    temperature: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct TlsSweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Sweep axis: alpha or temperature.
    #[arg(long)]
    vary: Option<String>,
    #[arg(long)]
    from: Option<f64>,
    #[arg(long)]
    to: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long = "h")]
    h: Option<f64>,
    #[arg(long)]
    gamma_x: Option<f64>,
    /// Fixed mixing parameter (required when varying temperature).
    #[arg(long)]
    alpha: Option<f64>,
    /// Fixed temperature (required when varying alpha).
    #[arg(long)]
    temperature: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct ModelArgs {
    /// Model selector: ht, qs, sk, or file.
    #[arg(long)]
    model: Option<String>,
    /// Spin count (ht defaults to 4; required for sk).
    #[arg(long)]
    n: Option<usize>,
    /// Coupling seed (required for sk).
    #[arg(long)]
    seed: Option<u64>,
    /// Instance JSON path (required for --model file).
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Also write the instance used to <out>_instance.json.
    #[arg(long, default_value_t = false)]
    dump_instance: bool,
}

#[derive(Args, Debug, Default)]
struct AnnealArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Schedule scale (the ramp ends at s = scale; default 1).
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    sample_every: Option<usize>,
    /// Comma list: p_ground, levels, pi_pc, purity, state_dump.
    #[arg(long)]
    observables: Option<String>,
}

#[derive(Args, Debug, Default)]
struct QuenchArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Constant annealing parameter.
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    sample_every: Option<usize>,
    #[arg(long)]
    observables: Option<String>,
}

#[derive(Args, Debug, Default)]
struct QsRatioArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma list of mixing parameters, e.g. 0,0.25,0.5,0.75,1.
    #[arg(long)]
    alphas: Option<String>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    sample_every: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct SkBenchArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    instances: Option<usize>,
    /// First seed; instance k uses seed_base + k.
    #[arg(long)]
    seed_base: Option<u64>,
    #[arg(long)]
    alphas: Option<String>,
    #[arg(long)]
    taus: Option<String>,
    #[arg(long)]
    gammas: Option<String>,
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct InstanceDumpArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    model: ModelArgs,
}

/// Config-file schema: a flat map of optional values mirroring the flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    h: Option<f64>,
    gamma_x: Option<f64>,
    alpha: Option<f64>,
    temperature: Option<f64>,
    dt: Option<f64>,
    tau: Option<f64>,
    t_final: Option<f64>,
    gamma: Option<f64>,
    scale: Option<f64>,
    s: Option<f64>,
    n: Option<usize>,
    seed: Option<u64>,
    seed_base: Option<u64>,
    instances: Option<usize>,
    alphas: Option<Vec<f64>>,
    taus: Option<Vec<f64>>,
    gammas: Option<Vec<f64>>,
    sample_every: Option<usize>,
    model: Option<String>,
    vary: Option<String>,
    from: Option<f64>,
    to: Option<f64>,
    points: Option<usize>,
    z0: Option<f64>,
    theta0: Option<f64>,
    observables: Option<String>,
    instance: Option<String>,
    out: Option<String>,
}

fn load_file_config(path: &Option<PathBuf>) -> Result<FileConfig, CliError> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                CliError::Validation(format!("cannot read config file {}: {e}", p.display()))
            })?;
            serde_json::from_str(&text).map_err(|e| {
                CliError::Validation(format!("config file {}: {e}", p.display()))
            })
        }
    }
}

fn need<T>(flag: Option<T>, file: Option<T>, name: &str) -> Result<T, CliError> {
    flag.or(file).ok_or_else(|| {
        CliError::Validation(format!(
            "missing required parameter --{name} (pass the flag or set \"{}\" in the config file)",
            name.replace('-', "_")
        ))
    })
}

fn check_alpha(alpha: f64) -> Result<f64, CliError> {
    if alpha.is_finite() && (0.0..=1.0).contains(&alpha) {
        Ok(alpha)
    } else {
        Err(CliError::Validation(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )))
    }
}

fn check_temperature(t: f64) -> Result<f64, CliError> {
    Temperature::new(t)
        .map(|_| t)
        .map_err(|e| CliError::Validation(e.to_string()))
}

fn check_positive(v: f64, name: &str) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Validation(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

fn parse_f64_list(text: &str, name: &str) -> Result<Vec<f64>, CliError> {
    let values: Result<Vec<f64>, _> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect();
    match values {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(CliError::Validation(format!(
            "{name} must be a non-empty comma-separated list of numbers, got \"{text}\""
        ))),
    }
}

/// Resolved model selector, echoed to the sidecar.
#[derive(Debug, Clone, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelSpec {
    Ht { n: usize },
    Qs,
    Sk { n: usize, seed: u64 },
    File { path: String },
}

impl ModelSpec {
    fn resolve(args: &ModelArgs, file: &FileConfig) -> Result<Self, CliError> {
        let name = need(args.model.clone(), file.model.clone(), "model")?;
        match name.as_str() {
            "ht" => Ok(ModelSpec::Ht {
                n: args.n.or(file.n).unwrap_or(4),
            }),
            "qs" => Ok(ModelSpec::Qs),
            "sk" => Ok(ModelSpec::Sk {
                n: need(args.n, file.n, "n")?,
                seed: need(args.seed, file.seed, "seed")?,
            }),
            "file" => {
                let path = args
                    .instance
                    .clone()
                    .map(|p| p.display().to_string())
                    .or(file.instance.clone());
                Ok(ModelSpec::File {
                    path: need(path, None, "instance")?,
                })
            }
            other => Err(CliError::Validation(format!(
                "unknown model \"{other}\" (expected ht, qs, sk, or file)"
            ))),
        }
    }

    pub fn build(&self) -> Result<IsingInstance, CliError> {
        match self {
            ModelSpec::Ht { n } => Ok(husimi_temperley(*n)?),
            ModelSpec::Qs => Ok(quantum_signature()),
            ModelSpec::Sk { n, seed } => Ok(sk_random(*n, *seed)?),
            ModelSpec::File { path } => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Validation(format!("cannot read instance file {path}: {e}"))
                })?;
                Ok(IsingInstance::from_json_str(&text)?)
            }
        }
    }
}

fn parse_observables(
    text: Option<String>,
    inst: &IsingInstance,
) -> Result<Vec<Observable>, CliError> {
    match text {
        None => {
            let mut sel = vec![Observable::GroundProbability, Observable::LevelProbabilities];
            if inst.n() <= 8 {
                sel.push(Observable::PurityDefect);
            }
            Ok(sel)
        }
        Some(t) => t
            .split(',')
            .map(|name| match name.trim() {
                "p_ground" => Ok(Observable::GroundProbability),
                "levels" => Ok(Observable::LevelProbabilities),
                "pi_pc" => Ok(Observable::PiPcRatio),
                "purity" => Ok(Observable::PurityDefect),
                "state_dump" => Ok(Observable::StateDump),
                other => Err(CliError::Validation(format!(
                    "unknown observable \"{other}\" (expected p_ground, levels, pi_pc, purity, state_dump)"
                ))),
            })
            .collect(),
    }
}

fn observable_names(selection: &[Observable]) -> Vec<String> {
    selection
        .iter()
        .map(|o| {
            match o {
                Observable::GroundProbability => "p_ground",
                Observable::LevelProbabilities => "levels",
                Observable::PiPcRatio => "pi_pc",
                Observable::PurityDefect => "purity",
                Observable::StateDump => "state_dump",
            }
            .to_string()
        })
        .collect()
}

fn resolve_out(
    flag: Option<String>,
    file: Option<String>,
    subcommand: &str,
) -> Result<String, CliError> {
    if let Some(out) = flag.or(file) {
        return Ok(out);
    }
    match std::env::var(OUT_DIR_ENV) {
        Ok(dir) if !dir.is_empty() => Ok(format!("{dir}/{subcommand}")),
        _ => Ok(format!("./{subcommand}")),
    }
}

/// Fully resolved run configuration; serialized verbatim to the sidecar.
#[derive(Debug, Clone, Serialize, PartialEq)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum RunConfig {
    TlsEvolve {
        h: f64,
        gamma_x: f64,
        alpha: f64,
        temperature: f64,
        dt: f64,
        t_final: f64,
        sample_every: usize,
        z0: f64,
        theta0: f64,
        out: String,
    },
    TlsStationary {
        h: f64,
        gamma_x: f64,
        alpha: f64,
        temperature: f64,
        out: String,
    },
    TlsSweep {
        vary: String,
        from: f64,
        to: f64,
        points: usize,
        h: f64,
        gamma_x: f64,
        alpha: Option<f64>,
        temperature: Option<f64>,
        out: String,
    },
    Anneal {
        model: ModelSpec,
        alpha: f64,
        temperature: f64,
        dt: f64,
        tau: f64,
        gamma: f64,
        scale: f64,
        sample_every: usize,
        observables: Vec<String>,
        dump_instance: bool,
        out: String,
    },
    Quench {
        model: ModelSpec,
        s: f64,
        alpha: f64,
        temperature: f64,
        dt: f64,
        tau: f64,
        sample_every: usize,
        observables: Vec<String>,
        dump_instance: bool,
        out: String,
    },
    QsRatio {
        alphas: Vec<f64>,
        tau: f64,
        gamma: f64,
        scale: f64,
        temperature: f64,
        dt: f64,
        sample_every: usize,
        out: String,
    },
    SkBench {
        n: usize,
        instances: usize,
        seed_base: u64,
        alphas: Vec<f64>,
        taus: Vec<f64>,
        gammas: Vec<f64>,
        scale: f64,
        temperature: f64,
        dt: f64,
        out: String,
    },
    InstanceDump {
        model: ModelSpec,
        out: String,
    },
}

impl RunConfig {
    pub fn out_prefix(&self) -> &str {
        match self {
            RunConfig::TlsEvolve { out, .. }
            | RunConfig::TlsStationary { out, .. }
            | RunConfig::TlsSweep { out, .. }
            | RunConfig::Anneal { out, .. }
            | RunConfig::Quench { out, .. }
            | RunConfig::QsRatio { out, .. }
            | RunConfig::SkBench { out, .. }
            | RunConfig::InstanceDump { out, .. } => out,
        }
    }
}

/// Parse argv (program name included) into a fully resolved, validated
/// configuration. Flags override config-file entries.
pub fn parse_config(args: &[String]) -> Result<RunConfig, CliError> {
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Validation(e.to_string()))?;
    resolve_command(cli.command)
}

fn resolve_command(command: Command) -> Result<RunConfig, CliError> {
    match command {
        Command::TlsEvolve(a) => {
            let file = load_file_config(&a.common.config)?;
            let h = check_positive(need(a.h, file.h, "h")?, "h")?;
            let gamma_x = check_positive(need(a.gamma_x, file.gamma_x, "gamma-x")?, "gamma-x")?;
            let alpha = check_alpha(need(a.alpha, file.alpha, "alpha")?)?;
            let temperature = check_temperature(need(a.temperature, file.temperature, "temperature")?)?;
            let dt = check_positive(need(a.dt, file.dt, "dt")?, "dt")?;
            let t_final = check_positive(need(a.t_final, file.t_final, "t-final")?, "t-final")?;
            let z0 = a.z0.or(file.z0).unwrap_or(0.5);
            if !(0.0 < z0 && z0 < 1.0) {
                return Err(CliError::Validation(format!(
                    "z0 must lie strictly inside (0, 1), got {z0}"
                )));
            }
            Ok(RunConfig::TlsEvolve {
                h,
                gamma_x,
                alpha,
                temperature,
                dt,
                t_final,
                sample_every: a.sample_every.or(file.sample_every).unwrap_or(100).max(1),
                z0,
                theta0: a.theta0.or(file.theta0).unwrap_or(0.0),
                out: resolve_out(a.common.out, file.out, "tls-evolve")?,
            })
        }
        Command::TlsStationary(a) => {
            let file = load_file_config(&a.common.config)?;
            Ok(RunConfig::TlsStationary {
                h: check_positive(need(a.h, file.h, "h")?, "h")?,
                gamma_x: check_positive(need(a.gamma_x, file.gamma_x, "gamma-x")?, "gamma-x")?,
                alpha: check_alpha(need(a.alpha, file.alpha, "alpha")?)?,
                temperature: check_temperature(need(
                    a.temperature,
                    file.temperature,
                    "temperature",
                )?)?,
                out: resolve_out(a.common.out, file.out, "tls-stationary")?,
            })
        }
        Command::TlsSweep(a) => {
            let file = load_file_config(&a.common.config)?;
            let vary = need(a.vary, file.vary, "vary")?;
            if vary != "alpha" && vary != "temperature" {
                return Err(CliError::Validation(format!(
                    "--vary must be alpha or temperature, got \"{vary}\""
                )));
            }
            let points = need(a.points, file.points, "points")?;
            if points < 2 {
                return Err(CliError::Validation(format!(
                    "points must be at least 2, got {points}"
                )));
            }
            let alpha = a.alpha.or(file.alpha).map(check_alpha).transpose()?;
            let temperature = a
                .temperature
                .or(file.temperature)
                .map(check_temperature)
                .transpose()?;
            if vary == "alpha" && temperature.is_none() {
                return Err(CliError::Validation(
                    "sweeping alpha requires a fixed --temperature".to_string(),
                ));
            }
            if vary == "temperature" && alpha.is_none() {
                return Err(CliError::Validation(
                    "sweeping temperature requires a fixed --alpha".to_string(),
                ));
            }
            Ok(RunConfig::TlsSweep {
                vary,
                from: need(a.from, file.from, "from")?,
                to: need(a.to, file.to, "to")?,
                points,
                h: check_positive(need(a.h, file.h, "h")?, "h")?,
                gamma_x: check_positive(need(a.gamma_x, file.gamma_x, "gamma-x")?, "gamma-x")?,
                alpha,
                temperature,
                out: resolve_out(a.common.out, file.out, "tls-sweep")?,
            })
        }
        Command::Anneal(a) => {
            let file = load_file_config(&a.common.config)?;
            let model = ModelSpec::resolve(&a.model, &file)?;
            let inst = model.build()?;
            let observables = parse_observables(a.observables.or(file.observables.clone()), &inst)?;
            Ok(RunConfig::Anneal {
                model,
                alpha: check_alpha(need(a.alpha, file.alpha, "alpha")?)?,
                temperature: check_temperature(need(
                    a.temperature,
                    file.temperature,
                    "temperature",
                )?)?,
                dt: check_positive(need(a.dt, file.dt, "dt")?, "dt")?,
                tau: check_positive(need(a.tau, file.tau, "tau")?, "tau")?,
                gamma: check_positive(need(a.gamma, file.gamma, "gamma")?, "gamma")?,
                scale: a.scale.or(file.scale).unwrap_or(1.0),
                sample_every: a.sample_every.or(file.sample_every).unwrap_or(100).max(1),
                observables: observable_names(&observables),
                dump_instance: a.model.dump_instance,
                out: resolve_out(a.common.out, file.out, "anneal")?,
            })
        }
        Command::Quench(a) => {
            let file = load_file_config(&a.common.config)?;
            let model = ModelSpec::resolve(&a.model, &file)?;
            let inst = model.build()?;
            let observables = parse_observables(a.observables.or(file.observables.clone()), &inst)?;
            let s = need(a.s, file.s, "s")?;
            if !(0.0..=1.0).contains(&s) {
                return Err(CliError::Validation(format!(
                    "s must lie in [0, 1], got {s}"
                )));
            }
            Ok(RunConfig::Quench {
                model,
                s,
                alpha: check_alpha(need(a.alpha, file.alpha, "alpha")?)?,
                temperature: check_temperature(need(
                    a.temperature,
                    file.temperature,
                    "temperature",
                )?)?,
                dt: check_positive(need(a.dt, file.dt, "dt")?, "dt")?,
                tau: check_positive(need(a.tau, file.tau, "tau")?, "tau")?,
                sample_every: a.sample_every.or(file.sample_every).unwrap_or(100).max(1),
                observables: observable_names(&observables),
                dump_instance: a.model.dump_instance,
                out: resolve_out(a.common.out, file.out, "quench")?,
            })
        }
        Command::QsRatio(a) => {
            let file = load_file_config(&a.common.config)?;
            let alphas = match (a.alphas, file.alphas.clone()) {
                (Some(text), _) => parse_f64_list(&text, "alphas")?,
                (None, Some(v)) => v,
                (None, None) => return Err(need::<f64>(None, None, "alphas").unwrap_err()),
            };
            for &alpha in &alphas {
                check_alpha(alpha)?;
            }
            Ok(RunConfig::QsRatio {
                alphas,
                tau: check_positive(need(a.tau, file.tau, "tau")?, "tau")?,
                gamma: check_positive(need(a.gamma, file.gamma, "gamma")?, "gamma")?,
                scale: a.scale.or(file.scale).unwrap_or(1.0),
                temperature: check_temperature(need(
                    a.temperature,
                    file.temperature,
                    "temperature",
                )?)?,
                dt: check_positive(need(a.dt, file.dt, "dt")?, "dt")?,
                sample_every: a.sample_every.or(file.sample_every).unwrap_or(100).max(1),
                out: resolve_out(a.common.out, file.out, "qs-ratio")?,
            })
        }
        Command::SkBench(a) => {
            let file = load_file_config(&a.common.config)?;
            let parse_list_arg = |flag: Option<String>,
                                  from_file: Option<Vec<f64>>,
                                  name: &str|
             -> Result<Vec<f64>, CliError> {
                match (flag, from_file) {
                    (Some(text), _) => parse_f64_list(&text, name),
                    (None, Some(v)) if !v.is_empty() => Ok(v),
                    _ => Err(need::<f64>(None, None, name).unwrap_err()),
                }
            };
            let alphas = parse_list_arg(a.alphas, file.alphas.clone(), "alphas")?;
            for &alpha in &alphas {
                check_alpha(alpha)?;
            }
            let taus = parse_list_arg(a.taus, file.taus.clone(), "taus")?;
            let gammas = parse_list_arg(a.gammas, file.gammas.clone(), "gammas")?;
            for &tau in &taus {
                check_positive(tau, "tau")?;
            }
            for &gamma in &gammas {
                check_positive(gamma, "gamma")?;
            }
            let instances = need(a.instances, file.instances, "instances")?;
            if instances == 0 {
                return Err(CliError::Validation(
                    "instances must be at least 1".to_string(),
                ));
            }
            Ok(RunConfig::SkBench {
                n: need(a.n, file.n, "n")?,
                instances,
                seed_base: need(a.seed_base, file.seed_base, "seed-base")?,
                alphas,
                taus,
                gammas,
                scale: a.scale.or(file.scale).unwrap_or(1.0),
                temperature: check_temperature(need(
                    a.temperature,
                    file.temperature,
                    "temperature",
                )?)?,
                dt: check_positive(need(a.dt, file.dt, "dt")?, "dt")?,
                out: resolve_out(a.common.out, file.out, "sk-bench")?,
            })
        }
        Command::InstanceDump(a) => {
            let file = load_file_config(&a.common.config)?;
            Ok(RunConfig::InstanceDump {
                model: ModelSpec::resolve(&a.model, &file)?,
                out: resolve_out(a.common.out, file.out, "instance-dump")?,
            })
        }
    }
}

fn sidecar(config: &RunConfig) -> Result<(), CliError> {
    let path = PathBuf::from(format!("{}_config.json", config.out_prefix()));
    write_json(&path, config)?;
    Ok(())
}

fn stability_text(s: Stability) -> &'static str {
    match s {
        Stability::Stable => "stable",
        Stability::Unstable => "unstable",
    }
}

fn mix_config(
    alpha: f64,
    temperature: f64,
    dt: f64,
    sample_every: usize,
) -> Result<MixConfig, CliError> {
    let mut cfg = MixConfig::new(alpha, Temperature::new(temperature)?, dt)?;
    cfg.sample_every = sample_every;
    Ok(cfg)
}

fn selection_from_names(names: &[String]) -> Vec<Observable> {
    names
        .iter()
        .map(|n| match n.as_str() {
            "p_ground" => Observable::GroundProbability,
            "levels" => Observable::LevelProbabilities,
            "pi_pc" => Observable::PiPcRatio,
            "purity" => Observable::PurityDefect,
            _ => Observable::StateDump,
        })
        .collect()
}

/// Execute a resolved configuration. Returns the summary lines (also
/// written to `<out>_summary.txt`).
pub fn run(config: &RunConfig) -> Result<Vec<String>, CliError> {
    sidecar(config)?;
    let prefix = config.out_prefix().to_string();
    let summary = match config {
        RunConfig::TlsEvolve {
            h,
            gamma_x,
            alpha,
            temperature,
            dt,
            t_final,
            sample_every,
            z0,
            theta0,
            ..
        } => {
            let params = TlsParams::new(*h, *gamma_x, *alpha, Temperature::new(*temperature)?)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            let initial = TlsState::new(*z0, *theta0)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            let samples = tls_evolve(&params, &initial, *dt, *t_final, *sample_every)?;
            let columns = ["t", "x", "y", "z"].map(String::from).to_vec();
            let rows: Vec<Vec<f64>> = samples.iter().map(|s| vec![s.t, s.x, s.y, s.z]).collect();
            write_csv(Path::new(&format!("{prefix}.csv")), &columns, &rows)?;
            let end = samples.last().unwrap();
            let max_purity = samples
                .iter()
                .map(|s| (s.x * s.x + s.y * s.y - s.z * (1.0 - s.z)).abs())
                .fold(0.0, f64::max);
            vec![
                format!("tls-evolve: alpha = {alpha}, T = {temperature}, h = {h}, gamma_x = {gamma_x}"),
                format!("final z = {}", format_f64(end.z)),
                format!("max purity defect = {:.3e}", max_purity),
                format!("samples = {}", samples.len()),
            ]
        }
        RunConfig::TlsStationary {
            h,
            gamma_x,
            alpha,
            temperature,
            ..
        } => {
            let params = TlsParams::new(*h, *gamma_x, *alpha, Temperature::new(*temperature)?)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            let points = tls_stationary(&params)?;
            let columns = [
                "z",
                "x",
                "y",
                "purity_defect",
                "stability",
                "eig_re_1",
                "eig_re_2",
            ]
            .map(String::from)
            .to_vec();
            let rows: Vec<Vec<String>> = points
                .iter()
                .map(|p| {
                    vec![
                        format_f64(p.z),
                        format_f64(p.x),
                        format_f64(p.y),
                        format_f64(p.purity_defect()),
                        stability_text(p.stability).to_string(),
                        format_f64(p.jacobian_eigen_real_parts.0),
                        format_f64(p.jacobian_eigen_real_parts.1),
                    ]
                })
                .collect();
            write_csv_mixed(Path::new(&format!("{prefix}.csv")), &columns, &rows)?;
            let mut lines = vec![format!(
                "tls-stationary: {} point(s) at alpha = {alpha}, T = {temperature}",
                points.len()
            )];
            for p in &points {
                lines.push(format!(
                    "z = {} ({})",
                    format_f64(p.z),
                    stability_text(p.stability)
                ));
            }
            lines
        }
        RunConfig::TlsSweep {
            vary,
            from,
            to,
            points,
            h,
            gamma_x,
            alpha,
            temperature,
            ..
        } => {
            let axis = if vary == "alpha" {
                SweepAxis::Alpha
            } else {
                SweepAxis::Temperature
            };
            let base_alpha = alpha.unwrap_or(0.5);
            let base_t = Temperature::new(temperature.unwrap_or(0.0))?;
            let base = TlsParams::new(*h, *gamma_x, base_alpha, base_t)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            let values: Vec<f64> = (0..*points)
                .map(|k| from + (to - from) * k as f64 / (*points as f64 - 1.0))
                .collect();
            let rows = sweep_stationary(&base, axis, &values)?;
            let columns = [
                "parameter", "branch", "z", "x", "y", "stability", "eig_re_1", "eig_re_2",
            ]
            .map(String::from)
            .to_vec();
            let text_rows: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        format_f64(r.parameter),
                        r.branch.to_string(),
                        format_f64(r.z),
                        format_f64(r.x),
                        format_f64(r.y),
                        stability_text(r.stability).to_string(),
                        format_f64(r.jacobian_eigen_real_parts.0),
                        format_f64(r.jacobian_eigen_real_parts.1),
                    ]
                })
                .collect();
            write_csv_mixed(Path::new(&format!("{prefix}.csv")), &columns, &text_rows)?;
            let branch = stable_branch(&rows);
            let mut lines = vec![format!(
                "tls-sweep over {vary}: {} grid points, {} stable-branch points",
                points,
                branch.len()
            )];
            if let (Some(first), Some(last)) = (branch.first(), branch.last()) {
                lines.push(format!(
                    "stable branch: z({}) = {}, z({}) = {}",
                    format_f64(first.0),
                    format_f64(first.1),
                    format_f64(last.0),
                    format_f64(last.1)
                ));
            }
            if axis == SweepAxis::Temperature {
                if let Some(kink) = locate_kink(&branch) {
                    lines.push(format!("kink located at T = {}", format_f64(kink)));
                }
            }
            lines
        }
        RunConfig::Anneal {
            model,
            alpha,
            temperature,
            dt,
            tau,
            gamma,
            scale,
            sample_every,
            observables,
            dump_instance,
            ..
        } => {
            let inst = model.build()?;
            let schedule = Schedule::power(*gamma, *tau, *scale)?;
            let cfg = mix_config(*alpha, *temperature, *dt, *sample_every)?;
            run_trajectory_command(
                &prefix,
                &inst,
                &schedule,
                &cfg,
                observables,
                *dump_instance,
                format!(
                    "anneal {}: alpha = {alpha}, T = {temperature}, s(t) = {scale}*(t/{tau})^{gamma}",
                    inst.label()
                ),
            )?
        }
        RunConfig::Quench {
            model,
            s,
            alpha,
            temperature,
            dt,
            tau,
            sample_every,
            observables,
            dump_instance,
            ..
        } => {
            let inst = model.build()?;
            let schedule = Schedule::constant(*s, *tau)?;
            let cfg = mix_config(*alpha, *temperature, *dt, *sample_every)?;
            run_trajectory_command(
                &prefix,
                &inst,
                &schedule,
                &cfg,
                observables,
                *dump_instance,
                format!(
                    "quench {}: alpha = {alpha}, T = {temperature}, s = {s}, tau = {tau}",
                    inst.label()
                ),
            )?
        }
        RunConfig::QsRatio {
            alphas,
            tau,
            gamma,
            scale,
            temperature,
            dt,
            sample_every,
            ..
        } => {
            let inst = quantum_signature();
            let labels = QsLabels::standard();
            let schedule = Schedule::power(*gamma, *tau, *scale)?;
            let spec = ObservableSpec::new(vec![Observable::PiPcRatio]);
            let mut columns = vec!["t".to_string(), "s".to_string()];
            let mut ratio_columns: Vec<Vec<f64>> = Vec::new();
            let mut grid: Option<Vec<(f64, f64)>> = None;
            let mut final_ratios = Vec::new();
            for &alpha in alphas {
                let cfg = mix_config(alpha, *temperature, *dt, *sample_every)?;
                let run = run_annealing(&inst, &schedule, &cfg, &spec)?;
                columns.push(format!("pi_pc_alpha_{}", format_f64(alpha)));
                if grid.is_none() {
                    grid = Some(run.rows.iter().map(|r| (r[0], r[1])).collect());
                }
                ratio_columns.push(run.rows.iter().map(|r| r[2]).collect());
                let last = run.trajectory.final_sample();
                final_ratios.push((alpha, pi_pc(&last.probs, &labels)));
            }
            let grid = grid.unwrap();
            let rows: Vec<Vec<f64>> = grid
                .iter()
                .enumerate()
                .map(|(i, &(t, s))| {
                    let mut row = vec![t, s];
                    for col in &ratio_columns {
                        row.push(col[i]);
                    }
                    row
                })
                .collect();
            write_csv(Path::new(&format!("{prefix}.csv")), &columns, &rows)?;
            let mut lines = vec![format!(
                "qs-ratio: {} alphas, s(t) = {scale}*(t/{tau})^{gamma}, T = {temperature}",
                alphas.len()
            )];
            for (alpha, ratio) in &final_ratios {
                lines.push(format!(
                    "final P_I/P_C at alpha = {} : {}",
                    format_f64(*alpha),
                    format_f64(*ratio)
                ));
            }
            lines
        }
        RunConfig::SkBench {
            n,
            instances,
            seed_base,
            alphas,
            taus,
            gammas,
            scale,
            temperature,
            dt,
            ..
        } => {
            let cfg = SkBenchConfig {
                n: *n,
                seeds: (0..*instances as u64).map(|k| seed_base + k).collect(),
                alphas: alphas.clone(),
                taus: taus.clone(),
                gammas: gammas.clone(),
                temperature: Temperature::new(*temperature)?,
                dt: *dt,
                scale: *scale,
            };
            run_sk_bench(&prefix, &cfg)?
        }
        RunConfig::InstanceDump { model, .. } => {
            let inst = model.build()?;
            let path = PathBuf::from(format!("{prefix}.json"));
            std::fs::write(&path, inst.to_json_string() + "\n")
                .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))?;
            vec![format!(
                "instance-dump: wrote {} ({} spins, {} couplings)",
                path.display(),
                inst.n(),
                inst.pair_couplings().len()
            )]
        }
    };
    write_text(Path::new(&format!("{prefix}_summary.txt")), &summary)?;
    Ok(summary)
}

fn run_trajectory_command(
    prefix: &str,
    inst: &IsingInstance,
    schedule: &Schedule,
    cfg: &MixConfig,
    observable_names: &[String],
    dump_instance: bool,
    header: String,
) -> Result<Vec<String>, CliError> {
    let spec = ObservableSpec::new(selection_from_names(observable_names));
    let run = run_annealing(inst, schedule, cfg, &spec)?;
    write_csv(
        Path::new(&format!("{prefix}.csv")),
        &run.columns,
        &run.rows,
    )?;
    if dump_instance {
        let path = format!("{prefix}_instance.json");
        std::fs::write(&path, inst.to_json_string() + "\n")
            .map_err(|e| CliError::Runtime(format!("writing {path}: {e}")))?;
    }
    let mut lines = vec![header];
    let last = run.rows.last().unwrap();
    for (k, name) in run.columns.iter().enumerate().skip(2) {
        lines.push(format!("final {} = {}", name, format_f64(last[k])));
    }
    lines.push(format!(
        "max norm defect = {:.3e}, max probability defect = {:.3e}",
        run.trajectory.max_norm_defect, run.trajectory.max_prob_defect
    ));
    if let Some(p) = run.trajectory.max_purity_defect {
        lines.push(format!("max purity defect = {:.3e}", p));
    }
    Ok(lines)
}

fn cell_line(c: &CellResult) -> String {
    format!(
        "{},{},{},{},{}",
        c.seed,
        format_f64(c.alpha),
        format_f64(c.tau),
        format_f64(c.gamma),
        format_f64(c.p_ground)
    )
}

fn parse_cell_line(line: &str) -> Option<CellResult> {
    let mut parts = line.split(',');
    let seed = parts.next()?.parse().ok()?;
    let alpha = parts.next()?.parse().ok()?;
    let tau = parts.next()?.parse().ok()?;
    let gamma = parts.next()?.parse().ok()?;
    let p_ground = parts.next()?.parse().ok()?;
    Some(CellResult {
        seed,
        alpha,
        tau,
        gamma,
        p_ground,
    })
}

fn run_sk_bench(prefix: &str, cfg: &SkBenchConfig) -> Result<Vec<String>, CliError> {
    let partial_path = PathBuf::from(format!("{prefix}_cells.partial.csv"));

    // Resume: cells persisted by an interrupted run are trusted and skipped.
    let mut precomputed: Vec<CellResult> = Vec::new();
    if partial_path.exists() {
        let text = std::fs::read_to_string(&partial_path)
            .map_err(|e| CliError::Runtime(format!("reading {}: {e}", partial_path.display())))?;
        let mut seen = HashSet::new();
        for line in text.lines() {
            if let Some(cell) = parse_cell_line(line) {
                let key = (
                    cell.seed,
                    cell.alpha.to_bits(),
                    cell.tau.to_bits(),
                    cell.gamma.to_bits(),
                );
                if seen.insert(key) {
                    precomputed.push(cell);
                }
            }
        }
    }

    // Single writer: appends are serialized so the partial log stays
    // line-atomic even though cells complete in parallel.
    let log = Mutex::new(());
    let persist = |cell: &CellResult| {
        let _guard = log.lock().unwrap();
        let _ = append_line(&partial_path, &cell_line(cell));
    };
    let result = sk_benchmark(cfg, &precomputed, Some(&persist))?;

    let per_columns = ["seed", "alpha", "tau", "gamma", "p_ground"]
        .map(String::from)
        .to_vec();
    let per_rows: Vec<Vec<f64>> = result
        .per_instance
        .iter()
        .map(|c| vec![c.seed as f64, c.alpha, c.tau, c.gamma, c.p_ground])
        .collect();
    write_csv(
        Path::new(&format!("{prefix}_per_instance.csv")),
        &per_columns,
        &per_rows,
    )?;

    let agg = aggregate_cells(&result.per_instance);
    let agg_columns = ["alpha", "tau", "gamma", "mean", "std_err", "n_instances"]
        .map(String::from)
        .to_vec();
    let agg_rows: Vec<Vec<f64>> = agg
        .iter()
        .map(|a| {
            vec![
                a.alpha,
                a.tau,
                a.gamma,
                a.mean,
                a.std_err,
                a.n_instances as f64,
            ]
        })
        .collect();
    write_csv(
        Path::new(&format!("{prefix}_aggregate.csv")),
        &agg_columns,
        &agg_rows,
    )?;

    // The partial log has served its purpose once the final files exist.
    let _ = std::fs::remove_file(&partial_path);

    let mut lines = vec![format!(
        "sk-bench: n = {}, {} instances, {} grid cells",
        cfg.n,
        cfg.seeds.len(),
        result.per_instance.len()
    )];
    // Best alpha per (tau, gamma) cut.
    for &gamma in &cfg.gammas {
        for &tau in &cfg.taus {
            let best = agg
                .iter()
                .filter(|a| a.tau == tau && a.gamma == gamma)
                .max_by(|x, y| x.mean.total_cmp(&y.mean));
            if let Some(best) = best {
                lines.push(format!(
                    "tau = {}, gamma = {}: best alpha = {} (mean p_ground = {})",
                    format_f64(tau),
                    format_f64(gamma),
                    format_f64(best.alpha),
                    format_f64(best.mean)
                ));
            }
        }
    }
    Ok(lines)
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_impl(args: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e)
            if e.kind() == ErrorKind::DisplayHelp || e.kind() == ErrorKind::DisplayVersion =>
        {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            eprint!("{e}");
            return 1;
        }
    };
    let config = match resolve_command(cli.command) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    match run(&config) {
        Ok(summary) => {
            for line in summary {
                println!("{line}");
            }
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
