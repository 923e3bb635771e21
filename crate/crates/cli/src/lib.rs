//! `contagionlab`: load model configs, simulate, certify and run scenarios.

mod output;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use contagion_core::analysis::{
    classify, comparison_matrices, instability_witness, interior_equilibrium, lyapunov_certificate, AnalysisError,
    EQUALITY_TOL,
};
use contagion_core::dynamics::{trajectory_csv, IntegratorConfig};
use contagion_core::experiments::{
    basin_csv, builtin_scenario, run_scenario, ExperimentError, InitialPolicy, ScenarioResult, ScenarioSpec,
};
use contagion_core::model::{Model, ModelDoc, ModelError, State};
use contagion_core::serial::canonical_json;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

pub use output::OutputSet;

/// Trials used by `mc` when `--trials` is absent.
pub const DEFAULT_TRIALS: usize = 500;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Refused(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) | CliError::Refused(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Precondition(_) | AnalysisError::Model(_) => CliError::Validation(e.to_string()),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Dynamics(contagion_core::dynamics::DynamicsError::NonFinite { .. }) => {
                CliError::Numeric(e.to_string())
            }
            other => CliError::Validation(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "contagionlab", version, about = "Coupled adoption/opinion contagion toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a config and echo it with defaults filled in.
    Validate(ConfigArg),
    /// Integrate one trajectory from the config's initial state.
    Simulate {
        #[command(flatten)]
        config: ConfigArg,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Report the stability conditions met by the flop and hit.
    Classify(ConfigArg),
    /// Build a Lyapunov certificate and, where one exists, an interior
    /// instability witness.
    Certify {
        #[command(flatten)]
        config: ConfigArg,
        /// Also write certificate.json here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
    /// Solve for the interior equilibrium with x = o.
    Equilibrium(ConfigArg),
    /// Run a builtin scenario.
    Scenario {
        #[arg(long)]
        name: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Monte-Carlo basin mapping from uniform random starts.
    Mc {
        #[arg(long, conflicts_with = "name", required_unless_present = "name")]
        config: Option<PathBuf>,
        #[arg(long)]
        name: Option<String>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub force: bool,
}

impl RunArgs {
    fn apply(&self, spec: &mut ScenarioSpec) {
        if let Some(s) = self.seed {
            spec.seed = s;
        }
        if let Some(t) = self.trials {
            spec.trials = t;
        }
        if let Some(t) = self.tmax {
            spec.integrator.t_max = t;
        }
        if let Some(h) = self.step {
            spec.integrator.step = h;
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    model: ModelDoc,
    #[serde(default)]
    integrator: Option<IntegratorConfig>,
    #[serde(default)]
    initial: Option<InitialDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialDoc {
    x: Vec<f64>,
    o: Vec<f64>,
}

/// A loaded, validated config file.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub name: String,
    pub model: Model,
    pub integrator: IntegratorConfig,
    /// Defaults to `0.5` everywhere.
    pub initial: State,
}

impl Config {
    /// Canonical JSON echo with every default explicit.
    pub fn to_json(&self) -> String {
        let v = json!({
            "model": serde_json::from_str::<Value>(&self.model.to_json()).expect("model JSON parses"),
            "integrator": self.integrator,
            "initial": InitialDoc { x: self.initial.x.clone(), o: self.initial.o.clone() },
        });
        canonical_json(&v).expect("config serialises")
    }

    pub fn parse(text: &str, name: &str) -> Result<Config, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let doc: ConfigDoc = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Validation(format!("{name}: at '{path}': {}", e.inner()))
        })?;
        let model = doc.model.into_model()?;
        model.ensure_simulatable()?;
        let integrator = doc.integrator.unwrap_or_default();
        integrator
            .validate()
            .map_err(|e| CliError::Validation(format!("integrator: {e}")))?;
        let n = model.n();
        let initial = match doc.initial {
            Some(InitialDoc { x, o }) => {
                let s = State::new(x, o).map_err(|e| CliError::Validation(format!("initial: {e}")))?;
                if s.n() != n {
                    return Err(CliError::Validation(format!(
                        "initial: expected {n} nodes, found {}",
                        s.n()
                    )));
                }
                s.check_domain(0.0)
                    .map_err(|e| CliError::Validation(format!("initial: {e}")))?;
                s
            }
            None => State::uniform(n, 0.5, 0.5),
        };
        Ok(Config {
            name: name.to_string(),
            model,
            integrator,
            initial,
        })
    }
}

/// Reads and validates a config file.
pub fn load_config(path: &Path) -> Result<Config, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let name = path
        .file_stem()
        .map_or_else(|| "config".to_string(), |s| s.to_string_lossy().into_owned());
    Config::parse(&text, &name)
}

fn scenario_outputs(result: &ScenarioResult) -> OutputSet {
    let mut files = OutputSet::default();
    for (k, t) in result.trajectories.iter().enumerate() {
        files.add(format!("trajectory_{k}.csv"), trajectory_csv(t));
    }
    if let Some(mc) = &result.mc {
        files.add("basin.csv", basin_csv(mc));
    }
    let summary = canonical_json(&result.summary()).expect("summary serialises");
    files.add("summary.json", summary + "\n");
    files
}

fn run_and_write(spec: &ScenarioSpec, run: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let result = run_scenario(spec)?;
    if let Some(mc) = &result.mc {
        if mc.counts.get("Error").copied().unwrap_or(0) == mc.trials {
            return Err(CliError::Numeric("every trial failed".into()));
        }
    }
    let files = scenario_outputs(&result);
    for path in files.write(&run.out, run.force)? {
        writeln!(out, "{}", path.display()).map_err(stdout_err)?;
    }
    Ok(())
}

fn stdout_err(e: std::io::Error) -> CliError {
    CliError::Io(format!("stdout: {e}"))
}

fn print(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    writeln!(out, "{text}").map_err(stdout_err)
}

fn certify(cfg: &Config) -> (Value, bool) {
    let model = &cfg.model;
    let mut ok = true;
    let lyapunov = comparison_matrices(model, 1.0)
        .map_err(CliError::from)
        .and_then(|c| lyapunov_certificate(&c.p).map_err(CliError::from));
    let lyapunov = match lyapunov {
        Ok(c) => {
            ok &= c.is_valid();
            json!({ "certificate": c, "valid": c.is_valid() })
        }
        Err(e) => {
            ok = false;
            json!({ "error": e.to_string(), "valid": false })
        }
    };
    let unit_gamma = model.opinion.gamma.iter().all(|g| (g - 1.0).abs() <= EQUALITY_TOL);
    let witness = if !unit_gamma {
        json!({ "skipped": "requires gamma_i = 1" })
    } else {
        match interior_equilibrium(model) {
            Ok(Some(eq)) => match instability_witness(model, &eq) {
                Ok(w) => {
                    ok &= w.is_valid();
                    json!({ "equilibrium": eq, "witness": w, "valid": w.is_valid() })
                }
                Err(e) => json!({ "equilibrium": eq, "error": e.to_string() }),
            },
            Ok(None) => json!({ "skipped": "interior equilibrium system is singular" }),
            Err(e) => json!({ "error": e.to_string() }),
        }
    };
    (json!({ "lyapunov": lyapunov, "instability": witness }), ok)
}

/// Executes one command, printing reports or written paths to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Validate(arg) => {
            let cfg = load_config(&arg.config)?;
            let report = cfg.model.validate();
            let v = json!({
                "config": serde_json::from_str::<Value>(&cfg.to_json()).expect("config JSON parses"),
                "report": report,
            });
            print(out, &canonical_json(&v).expect("serialises"))
        }
        Command::Simulate { config, run } => {
            let cfg = load_config(&config.config)?;
            let mut spec = ScenarioSpec {
                name: cfg.name.clone(),
                model: cfg.model,
                initial: InitialPolicy::Fixed(cfg.initial),
                trials: 1,
                seed: 0,
                integrator: cfg.integrator,
            };
            run.apply(&mut spec);
            spec.trials = 1;
            run_and_write(&spec, &run, out)
        }
        Command::Classify(arg) => {
            let cfg = load_config(&arg.config)?;
            print(out, &classify(&cfg.model)?.to_json())
        }
        Command::Certify { config, out: dir, force } => {
            let cfg = load_config(&config.config)?;
            let (report, ok) = certify(&cfg);
            let text = canonical_json(&report).expect("serialises");
            if let Some(dir) = dir {
                let mut files = OutputSet::default();
                files.add("certificate.json", text.clone() + "\n");
                files.write(&dir, force)?;
            }
            print(out, &text)?;
            if ok {
                Ok(())
            } else {
                Err(CliError::Numeric("certificate failed its validity check".into()))
            }
        }
        Command::Equilibrium(arg) => {
            let cfg = load_config(&arg.config)?;
            let eq = interior_equilibrium(&cfg.model)?;
            print(out, &canonical_json(&json!({ "equilibrium": eq })).expect("serialises"))
        }
        Command::Scenario { name, run } => {
            let mut spec = builtin_scenario(&name)?;
            run.apply(&mut spec);
            run_and_write(&spec, &run, out)
        }
        Command::Mc { config, name, run } => {
            let mut spec = match (config, name) {
                (Some(path), _) => {
                    let cfg = load_config(&path)?;
                    ScenarioSpec {
                        name: cfg.name,
                        model: cfg.model,
                        initial: InitialPolicy::UniformRandom,
                        trials: DEFAULT_TRIALS,
                        seed: 0,
                        integrator: cfg.integrator,
                    }
                }
                (None, Some(name)) => builtin_scenario(&name)?,
                (None, None) => unreachable!("clap requires one of --config/--name"),
            };
            spec.initial = InitialPolicy::UniformRandom;
            if spec.trials == 1 {
                spec.trials = DEFAULT_TRIALS;
            }
            run.apply(&mut spec);
            run_and_write(&spec, &run, out)
        }
    }
}

/// Caps the rayon pool from `CONTAGIONLAB_THREADS`, if set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("CONTAGIONLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Validation(format!("CONTAGIONLAB_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Numeric(e.to_string()))
}
