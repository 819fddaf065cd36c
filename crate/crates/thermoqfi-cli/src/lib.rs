//! Command-line front end: argument parsing, config merging, and the
//! subcommand drivers. The binary in `main.rs` maps [`CliError`] variants to
//! exit codes (2 usage, 1 numerical/IO failure).

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use thermoqfi::config::{build_law, parse_channel, parse_temperature_model};
use thermoqfi::ensemble::StateKind;
use thermoqfi::estimate::{summarize, ExperimentPlan};
use thermoqfi::qfi::{
    optimality_residual, probe_state_and_derivative, sld_qfi, variational_qfi, Purification,
};
use thermoqfi::ramsey::{classical_fisher, RamseySetup};
use thermoqfi::regime::{optimize_time, regime_table, PhaseKind, RegimeSpec};
use thermoqfi::{format_f64, DephasingLaw, EnvironmentChannel, ProbeEnsemble};

pub mod runner;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl From<thermoqfi::Error> for CliError {
    fn from(e: thermoqfi::Error) -> Self {
        match e {
            thermoqfi::Error::Config(m) => CliError::Usage(m),
            thermoqfi::Error::Io(m) => CliError::Io(m.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "thermoqfi",
    about = "Temperature estimation by qubit dephasing: Fisher information, \
             time optimization, non-Markovianity, and Monte-Carlo validation",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Quantum Fisher information (per shot) of the dephased probe state
    Qfi(QfiArgs),
    /// Ramsey-readout Fisher information swept over interrogation times
    #[command(name = "ramsey-fi")]
    RamseyFi(RamseyFiArgs),
    /// Optimal interrogation time and the resulting precision
    #[command(name = "optimal-time")]
    OptimalTime(OptimalTimeArgs),
    /// Asymptotic-regime table over grids of n, nu, t_cha
    #[command(name = "regime-table")]
    RegimeTable(RegimeTableArgs),
    /// Non-Markovianity measure of an external channel
    Nonmarkov(NonmarkovArgs),
    /// Monte-Carlo maximum-likelihood run against the precision bound
    Montecarlo(MontecarloArgs),
    /// Product vs maximally entangled probes at matched settings
    #[command(name = "compare-states")]
    CompareStates(CompareStatesArgs),
}

/// Flags shared by every subcommand. All optional so that a config file can
/// supply defaults; explicit flags win.
#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// Dephasing exponent nu
    #[arg(long)]
    pub nu: Option<f64>,
    /// Temperature model spec: linear:g=G | power:g=G,p=P | table:FILE
    #[arg(long = "alpha-model")]
    pub alpha_model: Option<String>,
    /// Sample temperature
    #[arg(long = "T")]
    pub temperature: Option<f64>,
    /// Interrogation time
    #[arg(long)]
    pub t: Option<f64>,
    /// Log-spaced time grid lo:hi:steps
    #[arg(long = "t-grid")]
    pub t_grid: Option<String>,
    /// Particle count (comma list where a grid is accepted)
    #[arg(long)]
    pub n: Option<String>,
    /// Initial state kind: product | ghz
    #[arg(long)]
    pub state: Option<String>,
    /// Readout phase: pi | pi4 | <radians>
    #[arg(long)]
    pub phase: Option<String>,
    /// Total time budget tau
    #[arg(long)]
    pub tau: Option<f64>,
    /// Quadratic-onset time (comma list where a grid is accepted)
    #[arg(long = "t-cha")]
    pub t_cha: Option<String>,
    /// Channel spec: none | dephasing:kappa=K,nu=NP | dephasing:rates=FILE |
    /// damping:eta=E | damping:rates=FILE
    #[arg(long)]
    pub channel: Option<String>,
    /// RNG seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Shots per trial
    #[arg(long)]
    pub shots: Option<u64>,
    /// Monte-Carlo trials
    #[arg(long)]
    pub trials: Option<u64>,
    /// Output path (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format: csv | json
    #[arg(long)]
    pub format: Option<String>,
    /// Config file (JSON) supplying defaults for any flag
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Emit diagnostic dumps
    #[arg(long)]
    pub verbose: bool,
}

#[derive(Args, Debug)]
pub struct QfiArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Also run the variational engine and report its agreement
    #[arg(long)]
    pub variational: bool,
}

#[derive(Args, Debug)]
pub struct RamseyFiArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct OptimalTimeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct RegimeTableArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct NonmarkovArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Bloch-lattice refinement budget (objective evaluations)
    #[arg(long, default_value_t = 200)]
    pub search_budget: usize,
}

#[derive(Args, Debug)]
pub struct MontecarloArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct CompareStatesArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

// ---------------------------------------------------------------------------
// config merging

fn load_config(path: &PathBuf) -> Result<serde_json::Map<String, Value>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
    match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(CliError::Usage(format!(
            "config {}: top level must be a JSON object",
            path.display()
        ))),
        Err(e) => Err(CliError::Usage(format!("config {}: {e}", path.display()))),
    }
}

fn config_f64(map: &serde_json::Map<String, Value>, key: &str) -> Result<Option<f64>, CliError> {
    match map.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Number(n)) => Ok(n.as_f64()),
        Some(Value::String(s)) => s
            .parse::<f64>()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("config key '{key}' is not a number"))),
        Some(_) => Err(CliError::Usage(format!("config key '{key}' is not a number"))),
    }
}

fn config_u64(map: &serde_json::Map<String, Value>, key: &str) -> Result<Option<u64>, CliError> {
    match map.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Number(n)) => Ok(n.as_u64()),
        Some(Value::String(s)) => s
            .parse::<u64>()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("config key '{key}' is not an integer"))),
        Some(_) => Err(CliError::Usage(format!("config key '{key}' is not an integer"))),
    }
}

fn config_string(
    map: &serde_json::Map<String, Value>,
    key: &str,
) -> Result<Option<String>, CliError> {
    match map.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(Value::Number(n)) => Ok(Some(n.to_string())),
        Some(_) => Err(CliError::Usage(format!("config key '{key}' is not a string"))),
    }
}

impl CommonArgs {
    /// Fill unset flags from the config file, if one was given. Flags win.
    pub fn merged(mut self) -> Result<Self, CliError> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let map = load_config(&path)?;
        for key in map.keys() {
            const KNOWN: [&str; 16] = [
                "nu", "alpha_model", "T", "t", "t_grid", "n", "state", "phase", "tau", "t_cha",
                "channel", "seed", "shots", "trials", "out", "format",
            ];
            if !KNOWN.contains(&key.as_str()) {
                return Err(CliError::Usage(format!("config key '{key}' is not recognized")));
            }
        }
        self.nu = self.nu.or(config_f64(&map, "nu")?);
        self.alpha_model = self.alpha_model.or(config_string(&map, "alpha_model")?);
        self.temperature = self.temperature.or(config_f64(&map, "T")?);
        self.t = self.t.or(config_f64(&map, "t")?);
        self.t_grid = self.t_grid.or(config_string(&map, "t_grid")?);
        self.n = self.n.or(config_string(&map, "n")?);
        self.state = self.state.or(config_string(&map, "state")?);
        self.phase = self.phase.or(config_string(&map, "phase")?);
        self.tau = self.tau.or(config_f64(&map, "tau")?);
        self.t_cha = self.t_cha.or(config_string(&map, "t_cha")?);
        self.channel = self.channel.or(config_string(&map, "channel")?);
        self.seed = self.seed.or(config_u64(&map, "seed")?);
        self.shots = self.shots.or(config_u64(&map, "shots")?);
        self.trials = self.trials.or(config_u64(&map, "trials")?);
        if self.out.is_none() {
            self.out = config_string(&map, "out")?.map(PathBuf::from);
        }
        self.format = self.format.or(config_string(&map, "format")?);
        Ok(self)
    }
}

// ---------------------------------------------------------------------------
// flag interpretation helpers

fn require<T>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("missing required flag --{flag}")))
}

pub fn parse_phase(spec: &str) -> Result<f64, CliError> {
    match spec {
        "pi" => Ok(std::f64::consts::PI),
        "pi4" => Ok(std::f64::consts::FRAC_PI_4),
        other => other
            .parse::<f64>()
            .map_err(|_| CliError::Usage(format!("--phase '{other}' is not pi, pi4, or a number"))),
    }
}

/// lo:hi:steps, log-spaced inclusive grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!("--t-grid '{spec}' must be lo:hi:steps")));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::Usage(format!("--t-grid lo '{}' is not a number", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::Usage(format!("--t-grid hi '{}' is not a number", parts[1])))?;
    let steps: usize = parts[2]
        .parse()
        .map_err(|_| CliError::Usage(format!("--t-grid steps '{}' is not an integer", parts[2])))?;
    if !(lo > 0.0) || !(hi > lo) || steps < 2 {
        return Err(CliError::Usage(
            "--t-grid needs 0 < lo < hi and at least 2 steps".to_string(),
        ));
    }
    let ratio = hi / lo;
    Ok((0..steps)
        .map(|i| lo * ratio.powf(i as f64 / (steps - 1) as f64))
        .collect())
}

fn parse_usize_list(spec: &str, flag: &str) -> Result<Vec<usize>, CliError> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("--{flag} entry '{s}' is not an integer")))
        })
        .collect()
}

fn parse_f64_list(spec: &str, flag: &str) -> Result<Vec<f64>, CliError> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("--{flag} entry '{s}' is not a number")))
        })
        .collect()
}

fn parse_state(spec: &str) -> Result<StateKind, CliError> {
    match spec {
        "product" => Ok(StateKind::Product),
        "ghz" => Ok(StateKind::Ghz),
        other => Err(CliError::Usage(format!("--state '{other}' is not product or ghz"))),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

fn parse_format(common: &CommonArgs, default: OutputFormat) -> Result<OutputFormat, CliError> {
    match common.format.as_deref() {
        None => Ok(default),
        Some("csv") => Ok(OutputFormat::Csv),
        Some("json") => Ok(OutputFormat::Json),
        Some(other) => Err(CliError::Usage(format!("--format '{other}' is not csv or json"))),
    }
}

fn build_law_from(common: &CommonArgs) -> Result<DephasingLaw, CliError> {
    let nu = require(common.nu, "nu")?;
    let model_spec = common.alpha_model.clone().unwrap_or_else(|| "linear:g=1".to_string());
    let model = parse_temperature_model(&model_spec)?;
    let t_cha = match common.t_cha.as_deref() {
        Some(spec) => {
            let list = parse_f64_list(spec, "t-cha")?;
            if list.len() != 1 {
                return Err(CliError::Usage(
                    "--t-cha accepts a single value here".to_string(),
                ));
            }
            Some(list[0])
        }
        None => None,
    };
    Ok(build_law(nu, model, t_cha)?)
}

fn build_channel_from(common: &CommonArgs) -> Result<EnvironmentChannel, CliError> {
    match common.channel.as_deref() {
        None => Ok(EnvironmentChannel::None),
        Some(spec) => Ok(parse_channel(spec)?),
    }
}

fn single_n(common: &CommonArgs) -> Result<usize, CliError> {
    let spec = require(common.n.clone(), "n")?;
    let list = parse_usize_list(&spec, "n")?;
    if list.len() != 1 {
        return Err(CliError::Usage("--n accepts a single value here".to_string()));
    }
    Ok(list[0])
}

fn write_output(common: &CommonArgs, text: &str) -> Result<(), CliError> {
    match &common.out {
        Some(path) => {
            let mut f = fs::File::create(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            f.write_all(text.as_bytes())
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json_pretty<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Numerical(format!("serialization: {e}")))
}

fn opt_field(v: Option<f64>) -> String {
    v.map(format_f64).unwrap_or_default()
}

// ---------------------------------------------------------------------------
// subcommand drivers

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Qfi(args) => cmd_qfi(args),
        Command::RamseyFi(args) => cmd_ramsey_fi(args),
        Command::OptimalTime(args) => cmd_optimal_time(args),
        Command::RegimeTable(args) => cmd_regime_table(args),
        Command::Nonmarkov(args) => cmd_nonmarkov(args),
        Command::Montecarlo(args) => cmd_montecarlo(args),
        Command::CompareStates(args) => cmd_compare_states(args),
    }
}

#[derive(Serialize)]
struct QfiRecord {
    n: usize,
    nu: f64,
    temperature: f64,
    t: f64,
    state: String,
    qfi_per_shot: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    variational_qfi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    variational_converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    optimality_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eigenvalues: Option<Vec<f64>>,
}

fn cmd_qfi(args: QfiArgs) -> Result<(), CliError> {
    let common = args.common.merged()?;
    let law = build_law_from(&common)?;
    let channel = build_channel_from(&common)?;
    let temp = require(common.temperature, "T")?;
    let t = require(common.t, "t")?;
    let n = single_n(&common)?;
    let kind = parse_state(common.state.as_deref().unwrap_or("product"))?;
    let ensemble =
        ProbeEnsemble::new(n, kind).map_err(|e| CliError::Usage(e.to_string()))?;
    let (rho, drho) = probe_state_and_derivative(&ensemble, &law, &channel, t, temp)?;
    let qfi = sld_qfi(&rho, &drho)?;

    let mut record = QfiRecord {
        n,
        nu: law.nu,
        temperature: temp,
        t,
        state: kind.label().to_string(),
        qfi_per_shot: qfi,
        variational_qfi: None,
        variational_converged: None,
        optimality_residual: None,
        eigenvalues: None,
    };
    if args.variational || common.verbose {
        if !channel.is_none() {
            return Err(CliError::Usage(
                "the variational engine covers the dephasing-only family; drop --channel"
                    .to_string(),
            ));
        }
        let pur = Purification::for_ensemble(&ensemble, &law, t, temp)?;
        let outcome = variational_qfi(&pur, 4000);
        record.variational_qfi = Some(outcome.qfi);
        record.variational_converged = Some(outcome.converged);
        record.optimality_residual = Some(optimality_residual(&outcome.argmin, &pur));
    }
    if common.verbose {
        let mut eigs = rho.eigenvalues()?;
        eigs.sort_by(f64::total_cmp);
        record.eigenvalues = Some(eigs);
    }

    match parse_format(&common, OutputFormat::Csv)? {
        OutputFormat::Json => write_output(&common, &to_json_pretty(&record)?),
        OutputFormat::Csv if common.verbose || args.variational => {
            write_output(&common, &to_json_pretty(&record)?)
        }
        OutputFormat::Csv => write_output(&common, &format!("{}\n", format_f64(qfi))),
    }
}

#[derive(Serialize)]
struct SweepRow {
    n: usize,
    nu: f64,
    #[serde(rename = "T")]
    temperature: f64,
    t: f64,
    phase: f64,
    fi_per_shot: f64,
    fi_total: f64,
    delta_t: f64,
}

fn cmd_ramsey_fi(args: RamseyFiArgs) -> Result<(), CliError> {
    let common = args.common.merged()?;
    let law = build_law_from(&common)?;
    let channel = build_channel_from(&common)?;
    let temp = require(common.temperature, "T")?;
    let n = single_n(&common)?;
    let kind = parse_state(common.state.as_deref().unwrap_or("product"))?;
    let phase = parse_phase(common.phase.as_deref().unwrap_or("pi"))?;
    let times: Vec<f64> = match (&common.t_grid, common.t) {
        (Some(grid), _) => parse_grid(grid)?,
        (None, Some(t)) => vec![t],
        (None, None) => return Err(CliError::Usage("need --t or --t-grid".to_string())),
    };
    let tau = common.tau.unwrap_or_else(|| times.iter().cloned().fold(0.0, f64::max));

    let mut rows = Vec::with_capacity(times.len());
    for &t in &times {
        let ensemble =
            ProbeEnsemble::new(n, kind).map_err(|e| CliError::Usage(e.to_string()))?;
        let setup = RamseySetup::new(ensemble, phase, t, tau.max(t))?;
        let fi = classical_fisher(&setup, &law, &channel, temp)?;
        rows.push(SweepRow {
            n,
            nu: law.nu,
            temperature: temp,
            t,
            phase,
            fi_per_shot: fi.fisher_per_shot,
            fi_total: fi.fisher_total,
            delta_t: fi.delta_t,
        });
    }

    match parse_format(&common, OutputFormat::Csv)? {
        OutputFormat::Json => write_output(&common, &to_json_pretty(&rows)?),
        OutputFormat::Csv => {
            let mut out = String::from("n,nu,T,t,phase,fi_per_shot,fi_total,delta_T\n");
            for r in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    r.n,
                    format_f64(r.nu),
                    format_f64(r.temperature),
                    format_f64(r.t),
                    format_f64(r.phase),
                    format_f64(r.fi_per_shot),
                    format_f64(r.fi_total),
                    format_f64(r.delta_t),
                ));
            }
            write_output(&common, &out)
        }
    }
}

fn phase_kind_from(common: &CommonArgs) -> Result<PhaseKind, CliError> {
    match common.phase.as_deref() {
        None | Some("pi") => Ok(PhaseKind::Optimal),
        Some("pi4") => Ok(PhaseKind::Suboptimal),
        Some(other) => Err(CliError::Usage(format!(
            "--phase '{other}': time optimization supports pi (optimal) or pi4 (suboptimal)"
        ))),
    }
}

fn cmd_optimal_time(args: OptimalTimeArgs) -> Result<(), CliError> {
    let common = args.common.merged()?;
    let law = build_law_from(&common)?;
    let temp = require(common.temperature, "T")?;
    let tau = require(common.tau, "tau")?;
    let n = single_n(&common)?;
    let kind = parse_state(common.state.as_deref().unwrap_or("product"))?;
    let spec = RegimeSpec {
        n,
        tau,
        law,
        temp,
        state_kind: kind,
        phase_kind: phase_kind_from(&common)?,
    };
    let report = optimize_time(&spec)?;
    match parse_format(&common, OutputFormat::Json)? {
        OutputFormat::Json => write_output(&common, &to_json_pretty(&report)?),
        OutputFormat::Csv => {
            let mut out =
                String::from("t_star,delta_T_star,boundary_flag,regime_label,predicted_delta_T\n");
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                format_f64(report.t_star),
                format_f64(report.delta_t_star),
                report.boundary_flag.label(),
                report.regime_label,
                opt_field(report.predicted_delta_t),
            ));
            write_output(&common, &out)
        }
    }
}

fn cmd_regime_table(args: RegimeTableArgs) -> Result<(), CliError> {
    let common = args.common.merged()?;
    let nu_list = parse_f64_list(&require(common.nu.map(|v| v.to_string()), "nu")?, "nu")?;
    let model_spec = common.alpha_model.clone().unwrap_or_else(|| "linear:g=1".to_string());
    let model = parse_temperature_model(&model_spec)?;
    let temp = require(common.temperature, "T")?;
    let tau = require(common.tau, "tau")?;
    let ns = parse_usize_list(&require(common.n.clone(), "n")?, "n")?;
    let t_chas = parse_f64_list(&require(common.t_cha.clone(), "t-cha")?, "t-cha")?;
    let kind = parse_state(common.state.as_deref().unwrap_or("product"))?;
    let phase_kind = phase_kind_from(&common)?;

    let rows = regime_table(&model, temp, tau, kind, phase_kind, &ns, &nu_list, &t_chas)?;
    match parse_format(&common, OutputFormat::Csv)? {
        OutputFormat::Json => write_output(&common, &to_json_pretty(&rows)?),
        OutputFormat::Csv => {
            let mut out = String::from(
                "n,nu,t_cha,regime,t_star,delta_T_exact,delta_T_paper_branch,ratio,boundary_flag\n",
            );
            for r in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    r.n,
                    format_f64(r.nu),
                    format_f64(r.t_cha),
                    r.regime,
                    format_f64(r.t_star),
                    format_f64(r.delta_t_exact),
                    opt_field(r.delta_t_paper_branch),
                    opt_field(r.ratio),
                    r.boundary_flag.label(),
                ));
            }
            write_output(&common, &out)
        }
    }
}

fn cmd_nonmarkov(args: NonmarkovArgs) -> Result<(), CliError> {
    let common = args.common.merged()?;
    let law = build_law_from(&common)?;
    let temp = require(common.temperature, "T")?;
    let channel = match common.channel.as_deref() {
        Some(spec) => parse_channel(spec)?,
        None => return Err(CliError::Usage("nonmarkov needs --channel".to_string())),
    };
    let grid = parse_grid(common.t_grid.as_deref().unwrap_or("1e-3:1:1000"))?;
    if parse_format(&common, OutputFormat::Json)? != OutputFormat::Json {
        return Err(CliError::Usage("nonmarkov reports are JSON; drop --format csv".to_string()));
    }
    let report =
        thermoqfi::nonmarkov::nonmarkov_measure(&law, temp, &channel, &grid, args.search_budget)?;
    write_output(&common, &to_json_pretty(&report)?)
}

#[derive(Serialize)]
struct MontecarloRecord {
    n: usize,
    nu: f64,
    #[serde(rename = "T")]
    temperature: f64,
    t: f64,
    phase: f64,
    state: String,
    shots: u64,
    trials: u64,
    seed: u64,
    t_hat_mean: f64,
    sample_variance: f64,
    crb: f64,
    variance_to_crb: f64,
    saturated_trials: u64,
}

fn cmd_montecarlo(args: MontecarloArgs) -> Result<(), CliError> {
    let common = args.common.merged()?;
    let law = build_law_from(&common)?;
    let channel = build_channel_from(&common)?;
    let temp = require(common.temperature, "T")?;
    let t = require(common.t, "t")?;
    let n = single_n(&common)?;
    let kind = parse_state(common.state.as_deref().unwrap_or("product"))?;
    let phase = parse_phase(common.phase.as_deref().unwrap_or("pi"))?;
    let shots = require(common.shots, "shots")?;
    let trials = require(common.trials, "trials")?;
    let seed = common.seed.unwrap_or(0);

    let ensemble = ProbeEnsemble::new(n, kind).map_err(|e| CliError::Usage(e.to_string()))?;
    let setup = RamseySetup::new(ensemble, phase, t, t.max(common.tau.unwrap_or(t)))?;
    let plan = ExperimentPlan {
        true_temp: temp,
        setup,
        law: law.clone(),
        channel,
        shots,
        seed,
    };
    let bracket = (temp / 5.0, temp * 5.0);
    let estimates = runner::run_trials_parallel(&plan, trials, bracket)?;
    let report = summarize(&plan, &estimates)?;
    let record = MontecarloRecord {
        n,
        nu: law.nu,
        temperature: temp,
        t,
        phase,
        state: kind.label().to_string(),
        shots,
        trials,
        seed,
        t_hat_mean: report.t_hat_mean,
        sample_variance: report.sample_variance,
        crb: report.crb,
        variance_to_crb: report.variance_to_crb,
        saturated_trials: report.saturated_trials,
    };
    match parse_format(&common, OutputFormat::Json)? {
        OutputFormat::Json => write_output(&common, &to_json_pretty(&record)?),
        OutputFormat::Csv => {
            let mut out = String::from(
                "n,nu,T,t,phase,state,shots,trials,seed,t_hat_mean,sample_variance,crb,variance_to_crb,saturated_trials\n",
            );
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                record.n,
                format_f64(record.nu),
                format_f64(record.temperature),
                format_f64(record.t),
                format_f64(record.phase),
                record.state,
                record.shots,
                record.trials,
                record.seed,
                format_f64(record.t_hat_mean),
                format_f64(record.sample_variance),
                format_f64(record.crb),
                format_f64(record.variance_to_crb),
                record.saturated_trials,
            ));
            write_output(&common, &out)
        }
    }
}

#[derive(Serialize)]
struct CompareRow {
    n: usize,
    nu: f64,
    #[serde(rename = "T")]
    temperature: f64,
    t: f64,
    delta_t_product: f64,
    delta_t_ghz: f64,
    ratio: f64,
}

#[derive(Serialize)]
struct CompareSummary {
    n: usize,
    nu: f64,
    #[serde(rename = "T")]
    temperature: f64,
    t_star_product: f64,
    delta_t_product: f64,
    t_star_ghz: f64,
    delta_t_ghz: f64,
    ratio: f64,
}

fn cmd_compare_states(args: CompareStatesArgs) -> Result<(), CliError> {
    let common = args.common.merged()?;
    let law = build_law_from(&common)?;
    let temp = require(common.temperature, "T")?;
    let tau = require(common.tau, "tau")?;
    let n = single_n(&common)?;
    let phase_kind = phase_kind_from(&common)?;
    let closed = |kind: StateKind| match (kind, phase_kind) {
        (StateKind::Product, PhaseKind::Optimal) => thermoqfi::ramsey::ClosedFormKind::ProductOpt,
        (StateKind::Ghz, PhaseKind::Optimal) => thermoqfi::ramsey::ClosedFormKind::GhzOpt,
        (StateKind::Product, PhaseKind::Suboptimal) => {
            thermoqfi::ramsey::ClosedFormKind::ProductSub
        }
        (StateKind::Ghz, PhaseKind::Suboptimal) => thermoqfi::ramsey::ClosedFormKind::GhzSub,
    };

    if let Some(grid) = &common.t_grid {
        let times = parse_grid(grid)?;
        let mut rows = Vec::with_capacity(times.len());
        for &t in &times {
            let dp = thermoqfi::ramsey::delta_t_closed_form(
                closed(StateKind::Product),
                n,
                tau,
                &law,
                t,
                temp,
            )?;
            let dg = thermoqfi::ramsey::delta_t_closed_form(
                closed(StateKind::Ghz),
                n,
                tau,
                &law,
                t,
                temp,
            )?;
            rows.push(CompareRow {
                n,
                nu: law.nu,
                temperature: temp,
                t,
                delta_t_product: dp,
                delta_t_ghz: dg,
                ratio: dg / dp,
            });
        }
        return match parse_format(&common, OutputFormat::Csv)? {
            OutputFormat::Json => write_output(&common, &to_json_pretty(&rows)?),
            OutputFormat::Csv => {
                let mut out = String::from("n,nu,T,t,delta_T_product,delta_T_ghz,ratio\n");
                for r in &rows {
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{}\n",
                        r.n,
                        format_f64(r.nu),
                        format_f64(r.temperature),
                        format_f64(r.t),
                        format_f64(r.delta_t_product),
                        format_f64(r.delta_t_ghz),
                        format_f64(r.ratio),
                    ));
                }
                write_output(&common, &out)
            }
        };
    }

    let mut optima = Vec::new();
    for kind in [StateKind::Product, StateKind::Ghz] {
        let spec = RegimeSpec {
            n,
            tau,
            law: law.clone(),
            temp,
            state_kind: kind,
            phase_kind,
        };
        optima.push(optimize_time(&spec)?);
    }
    let summary = CompareSummary {
        n,
        nu: law.nu,
        temperature: temp,
        t_star_product: optima[0].t_star,
        delta_t_product: optima[0].delta_t_star,
        t_star_ghz: optima[1].t_star,
        delta_t_ghz: optima[1].delta_t_star,
        ratio: optima[1].delta_t_star / optima[0].delta_t_star,
    };
    match parse_format(&common, OutputFormat::Json)? {
        OutputFormat::Json => write_output(&common, &to_json_pretty(&summary)?),
        OutputFormat::Csv => {
            let mut out = String::from(
                "n,nu,T,t_star_product,delta_T_product,t_star_ghz,delta_T_ghz,ratio\n",
            );
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                summary.n,
                format_f64(summary.nu),
                format_f64(summary.temperature),
                format_f64(summary.t_star_product),
                format_f64(summary.delta_t_product),
                format_f64(summary.t_star_ghz),
                format_f64(summary.delta_t_ghz),
                format_f64(summary.ratio),
            ));
            write_output(&common, &out)
        }
    }
}
