//! Command-line entry point: configuration, scenarios, solving, simulation
//! and regressions behind reproducible invocations with machine-readable
//! output.
//!
//! Every artifact is accompanied by a run manifest (command, calibration
//! hash, scenario, policy, seed, tool version, timestamp). With `--output`
//! the artifact goes to the file and the manifest to `<file>.manifest.json`;
//! otherwise the artifact goes to stdout and the manifest to stderr.
//!
//! Exit codes: 0 success, 2 usage errors (unknown names, bad flags), 1 model
//! errors reported as a JSON object `{code, message, context}` on stderr.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use soecredit::calibration::{load_calibration, Calibration, PresetName, Scenario};
use soecredit::empirics::{ols_hac, Dataset};
use soecredit::model::{build_system, ModelSystem, PolicyRule};
use soecredit::simulate::{
    compare_rules, irf, irf_absolute, loss, round_sig12, scenario_sweep, stochastic_simulate,
    IrfExperiment, LossVersion, PathSet,
};
use soecredit::solver::{solve, Solution, DEFAULT_TOL};
use soecredit::Error as ModelError;

/// Environment variable holding the default config path.
const CONFIG_ENV: &str = "SOECREDIT_CONFIG";

#[derive(Parser)]
#[command(
    name = "soecredit",
    version,
    about = "Small-open-economy model with household credit frictions"
)]
struct Cli {
    /// Path to a flat `key = value` calibration file; falls back to
    /// $SOECREDIT_CONFIG, then to built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Scenario preset: no_friction | baseline_friction | macroprudential |
    /// accelerator | custom.
    #[arg(long, default_value = "baseline_friction")]
    scenario: String,

    /// Policy rule: fi (reacts to the full benchmark rate) or pi (ignores
    /// credit-market terms).
    #[arg(long, default_value = "fi")]
    policy: String,
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Output format.
    #[arg(long = "out", value_parser = ["csv", "json"], default_value = "json")]
    out: String,

    /// Write the artifact to this file (manifest goes to
    /// `<file>.manifest.json`) instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the model and emit the law of motion with diagnostics.
    Solve {
        #[command(flatten)]
        model: ModelArgs,
        /// Fixed-point residual tolerance.
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Impulse response to a one-time shock.
    Irf {
        #[arg(long)]
        shock: String,
        #[command(flatten)]
        model: ModelArgs,
        /// Horizon in quarters; the output has horizon+1 rows (period 0..horizon).
        #[arg(long, default_value_t = 20)]
        horizon: usize,
        /// Impulse size in standard deviations of the shock.
        #[arg(long = "size-std", default_value_t = 1.0, conflicts_with = "size_abs")]
        size_std: f64,
        /// Impulse size in shock units (percentage points), overriding the
        /// standard-deviation scaling.
        #[arg(long = "size-abs")]
        size_abs: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Seeded stochastic simulation.
    Simulate {
        #[arg(long, default_value_t = 1000)]
        periods: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Comma-separated active shock names.
        #[arg(long, value_delimiter = ',')]
        shocks: Vec<String>,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Policy loss on a seeded simulation.
    Loss {
        /// Loss version 1..4.
        #[arg(long)]
        version: u8,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long, default_value_t = 10_000)]
        periods: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Comma-separated active shock names.
        #[arg(long, value_delimiter = ',', default_value = "credit_supply,credit_demand")]
        shocks: Vec<String>,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Seed-paired loss comparison of the two policy rules under credit shocks.
    CompareRules {
        /// Borrower debt-aversion used for the comparison.
        #[arg(long, default_value_t = 0.64)]
        v: f64,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 6.0)]
        beta: f64,
        #[arg(long, default_value_t = 10_000)]
        periods: usize,
        #[arg(long, default_value_t = 20240901)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Re-run one impulse-response experiment across values of a parameter.
    Sweep {
        /// Calibration key to sweep.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        #[arg(long)]
        shock: String,
        #[arg(long, default_value_t = 20)]
        horizon: usize,
        #[arg(long = "size-std", default_value_t = 1.0, conflicts_with = "size_abs")]
        size_std: f64,
        #[arg(long = "size-abs")]
        size_abs: Option<f64>,
        #[arg(long, default_value = "fi")]
        policy: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Ordinary least squares with Newey-West standard errors on CSV data.
    Regress {
        /// CSV file: header row first, optional leading date column.
        #[arg(long)]
        data: PathBuf,
        /// Dependent column.
        #[arg(long)]
        y: String,
        /// Comma-separated regressor columns.
        #[arg(long, value_delimiter = ',')]
        x: Vec<String>,
        /// Optional dummy column; adds an interaction with the first
        /// regressor (skipped when the dummy never switches on).
        #[arg(long)]
        dummy: Option<String>,
        /// Lag truncation; defaults to the plug-in rule.
        #[arg(long)]
        lags: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Emit the stacked system matrices, registry and row tags.
    DumpSystem {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

enum Failure {
    /// Bad invocation: unknown names, malformed flags. Exit code 2.
    Usage(String),
    /// Model-level failure reported as structured JSON. Exit code 1.
    Model { error: ModelError, context: String },
}

impl Failure {
    fn model(error: ModelError, context: &str) -> Failure {
        Failure::Model { error, context: context.to_string() }
    }
}

fn classify(error: ModelError, context: &str) -> Failure {
    match error {
        ModelError::UnknownShock(_)
        | ModelError::UnknownVariable(_)
        | ModelError::UnknownKey(_)
        | ModelError::InvalidArgument(_) => Failure::Usage(error.to_string()),
        other => Failure::model(other, context),
    }
}

fn error_code(error: &ModelError) -> &'static str {
    match error {
        ModelError::Indeterminate => "indeterminate",
        ModelError::Explosive => "explosive",
        ModelError::SolverNoConvergence { .. } => "no_convergence",
        ModelError::ConfigParse { .. } => "config_parse",
        ModelError::Invariant { .. } => "invariant_violation",
        ModelError::CollinearColumns(_) => "collinear_design",
        ModelError::Dataset(_) => "dataset",
        ModelError::Io(_) => "io",
        ModelError::Csv(_) => "csv",
        _ => "model_error",
    }
}

#[derive(serde::Serialize)]
struct RunManifest {
    command: String,
    calibration_hash: String,
    scenario: Option<String>,
    policy: Option<String>,
    seed: Option<u64>,
    tool_version: String,
    timestamp: String,
}

fn manifest(
    command: &str,
    cal: &Calibration,
    scenario: Option<&str>,
    policy: Option<&str>,
    seed: Option<u64>,
) -> RunManifest {
    let mut hasher = Sha256::new();
    hasher.update(cal.to_config_string().as_bytes());
    RunManifest {
        command: command.to_string(),
        calibration_hash: format!("{:x}", hasher.finalize()),
        scenario: scenario.map(str::to_string),
        policy: policy.map(str::to_string),
        seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339(),
    }
}

struct Artifact {
    payload: String,
    manifest: RunManifest,
}

fn emit(artifact: Artifact, output: &OutputArgs) -> Result<(), Failure> {
    let manifest_json = serde_json::to_string_pretty(&artifact.manifest).expect("manifest json");
    match &output.output {
        Some(path) => {
            std::fs::write(path, &artifact.payload)
                .map_err(|e| Failure::model(ModelError::Io(e), "writing artifact"))?;
            let mpath = PathBuf::from(format!("{}.manifest.json", path.display()));
            std::fs::write(&mpath, manifest_json)
                .map_err(|e| Failure::model(ModelError::Io(e), "writing manifest"))?;
        }
        None => {
            if artifact.payload.ends_with('\n') {
                print!("{}", artifact.payload);
            } else {
                println!("{}", artifact.payload);
            }
            eprintln!("{}", manifest_json);
        }
    }
    Ok(())
}

fn load_config(path: &Option<PathBuf>) -> Result<Calibration, Failure> {
    let resolved = path
        .clone()
        .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    match resolved {
        None => Ok(Calibration::default()),
        Some(p) => {
            let text = std::fs::read_to_string(&p).map_err(|e| {
                Failure::Usage(format!("cannot read config {}: {}", p.display(), e))
            })?;
            let (cal, _) = load_calibration(&text).map_err(|e| classify(e, "loading config"))?;
            Ok(cal)
        }
    }
}

fn resolve_model(cal: &Calibration, args: &ModelArgs) -> Result<(Calibration, PolicyRule), Failure> {
    let preset = PresetName::parse(&args.scenario)
        .map_err(|_| Failure::Usage(format!("unknown scenario: {}", args.scenario)))?;
    let policy = PolicyRule::parse(&args.policy)
        .map_err(|_| Failure::Usage(format!("unknown policy: {}", args.policy)))?;
    let applied = Scenario::preset(preset)
        .apply(cal)
        .map_err(|e| classify(e, "applying scenario"))?;
    Ok((applied, policy))
}

fn solve_model(cal: &Calibration, policy: PolicyRule, tol: f64) -> Result<(ModelSystem, Solution), Failure> {
    let sys = build_system(cal, policy).map_err(|e| classify(e, "building system"))?;
    let sol = solve(&sys, tol).map_err(|e| classify(e, "solving model"))?;
    Ok((sys, sol))
}

fn check_shock(sol: &Solution, name: &str) -> Result<(), Failure> {
    sol.shock_index(name)
        .map(|_| ())
        .map_err(|_| Failure::Usage(format!("unknown shock: {}", name)))
}

fn path_artifact(path: &PathSet, format: &str) -> String {
    match format {
        "csv" => path.to_csv(),
        _ => serde_json::to_string_pretty(&path.to_json()).expect("path json"),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cal = load_config(&cli.config)?;
    match cli.command {
        Command::Solve { model, tol, output } => {
            let (applied, policy) = resolve_model(&cal, &model)?;
            let (_, sol) = solve_model(&applied, policy, tol)?;
            let payload = serde_json::to_string_pretty(&sol.to_json()).unwrap();
            emit(
                Artifact {
                    payload,
                    manifest: manifest("solve", &applied, Some(&model.scenario), Some(policy.name()), None),
                },
                &output,
            )
        }
        Command::Irf { shock, model, horizon, size_std, size_abs, output } => {
            let (applied, policy) = resolve_model(&cal, &model)?;
            let (_, sol) = solve_model(&applied, policy, DEFAULT_TOL)?;
            check_shock(&sol, &shock)?;
            let mut path = match size_abs {
                Some(pp) => irf_absolute(&sol, &shock, pp, horizon),
                None => irf(&sol, &shock, size_std, horizon),
            }
            .map_err(|e| classify(e, "computing impulse response"))?;
            path.metadata.scenario = Some(model.scenario.clone());
            path.metadata.policy = Some(policy.name().to_string());
            emit(
                Artifact {
                    payload: path_artifact(&path, &output.out),
                    manifest: manifest("irf", &applied, Some(&model.scenario), Some(policy.name()), None),
                },
                &output,
            )
        }
        Command::Simulate { periods, seed, shocks, model, output } => {
            let (applied, policy) = resolve_model(&cal, &model)?;
            let (_, sol) = solve_model(&applied, policy, DEFAULT_TOL)?;
            for s in &shocks {
                check_shock(&sol, s)?;
            }
            let mut path = stochastic_simulate(&sol, periods, seed, &shocks)
                .map_err(|e| classify(e, "simulating"))?;
            path.metadata.scenario = Some(model.scenario.clone());
            emit(
                Artifact {
                    payload: path_artifact(&path, &output.out),
                    manifest: manifest(
                        "simulate",
                        &applied,
                        Some(&model.scenario),
                        Some(policy.name()),
                        Some(seed),
                    ),
                },
                &output,
            )
        }
        Command::Loss { version, alpha, beta, periods, seed, shocks, model, output } => {
            let version = LossVersion::from_number(version)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            let (applied, policy) = resolve_model(&cal, &model)?;
            let (_, sol) = solve_model(&applied, policy, DEFAULT_TOL)?;
            for s in &shocks {
                check_shock(&sol, s)?;
            }
            let path = stochastic_simulate(&sol, periods, seed, &shocks)
                .map_err(|e| classify(e, "simulating"))?;
            let value =
                loss(&path, version, alpha, beta).map_err(|e| classify(e, "evaluating loss"))?;
            let payload = serde_json::to_string_pretty(&serde_json::json!({
                "version": version.number(),
                "alpha": alpha,
                "beta": beta,
                "periods": periods,
                "seed": seed,
                "shocks": shocks,
                "policy": policy.name(),
                "loss": round_sig12(value),
            }))
            .unwrap();
            emit(
                Artifact {
                    payload,
                    manifest: manifest(
                        "loss",
                        &applied,
                        Some(&model.scenario),
                        Some(policy.name()),
                        Some(seed),
                    ),
                },
                &output,
            )
        }
        Command::CompareRules { v, alpha, beta, periods, seed, output } => {
            let report = compare_rules(&cal, v, alpha, beta, periods, seed)
                .map_err(|e| classify(e, "comparing rules"))?;
            let payload = serde_json::to_string_pretty(&report).unwrap();
            emit(
                Artifact {
                    payload,
                    manifest: manifest("compare-rules", &cal, None, None, Some(seed)),
                },
                &output,
            )
        }
        Command::Sweep { param, values, shock, horizon, size_std, size_abs, policy, output } => {
            let policy = PolicyRule::parse(&policy)
                .map_err(|_| Failure::Usage(format!("unknown policy: {}", policy)))?;
            if values.is_empty() {
                return Err(Failure::Usage("sweep needs at least one value".into()));
            }
            cal.get(&param)
                .map_err(|_| Failure::Usage(format!("unknown parameter: {}", param)))?;
            soecredit::Shock::parse(&shock)
                .map_err(|_| Failure::Usage(format!("unknown shock: {}", shock)))?;
            let experiment = IrfExperiment {
                shock: shock.clone(),
                size: size_abs.unwrap_or(size_std),
                absolute: size_abs.is_some(),
                horizon,
                policy,
            };
            let entries = scenario_sweep(&cal, &param, &values, &experiment)
                .map_err(|e| classify(e, "sweeping"))?;
            let payload = match output.out.as_str() {
                "csv" => {
                    // Stacked CSV: period first, then the swept value, then
                    // the variable columns; failed entries are skipped (they
                    // are reported in the JSON form).
                    let mut out = String::new();
                    let mut wrote_header = false;
                    for entry in &entries {
                        if let Ok(path) = &entry.outcome {
                            if !wrote_header {
                                out.push_str("period,");
                                out.push_str(&param);
                                for label in &path.labels {
                                    out.push(',');
                                    out.push_str(label);
                                }
                                out.push('\n');
                                wrote_header = true;
                            }
                            for t in 0..path.horizon() {
                                out.push_str(&format!("{},{}", t, entry.value));
                                for j in 0..path.n_series() {
                                    out.push(',');
                                    out.push_str(&soecredit::simulate::format_sig12(
                                        path.values[(t, j)],
                                    ));
                                }
                                out.push('\n');
                            }
                        }
                    }
                    out
                }
                _ => {
                    let items: Vec<serde_json::Value> = entries
                        .iter()
                        .map(|entry| match &entry.outcome {
                            Ok(path) => serde_json::json!({
                                "value": entry.value,
                                "path": path.to_json(),
                            }),
                            Err(e) => serde_json::json!({
                                "value": entry.value,
                                "error": {"code": error_code(e), "message": e.to_string()},
                            }),
                        })
                        .collect();
                    serde_json::to_string_pretty(&serde_json::json!({
                        "parameter": param,
                        "entries": items,
                    }))
                    .unwrap()
                }
            };
            emit(
                Artifact { payload, manifest: manifest("sweep", &cal, None, Some(policy.name()), None) },
                &output,
            )
        }
        Command::Regress { data, y, x, dummy, lags, output } => {
            let table = Dataset::from_csv_path(&data).map_err(|e| classify(e, "reading csv"))?;
            let mut x_cols: Vec<String> = x;
            let mut table = table;
            if let Some(dummy_col) = &dummy {
                let dummy_values =
                    table.column(dummy_col).map_err(|e| classify(e, "reading dummy column"))?;
                if dummy_values.iter().any(|d| *d != 0.0) {
                    let first = x_cols
                        .first()
                        .ok_or_else(|| Failure::Usage("regress needs at least one x column".into()))?
                        .clone();
                    let base = table.column(&first).map_err(|e| classify(e, "reading x column"))?;
                    let interaction: Vec<f64> =
                        base.iter().zip(&dummy_values).map(|(a, b)| a * b).collect();
                    let name = format!("{}_x_{}", first, dummy_col);
                    let mut named: Vec<(String, Vec<f64>)> = table
                        .columns
                        .iter()
                        .map(|c| (c.clone(), table.column(c).unwrap()))
                        .collect();
                    named.push((name.clone(), interaction));
                    table = Dataset::from_columns(named).map_err(|e| classify(e, "building design"))?;
                    x_cols.push(name);
                }
            }
            let x_refs: Vec<&str> = x_cols.iter().map(|s| s.as_str()).collect();
            let result =
                ols_hac(&table, &y, &x_refs, lags).map_err(|e| classify(e, "running regression"))?;
            let payload = serde_json::to_string_pretty(&result).unwrap();
            emit(
                Artifact { payload, manifest: manifest("regress", &cal, None, None, None) },
                &output,
            )
        }
        Command::DumpSystem { model, output } => {
            let (applied, policy) = resolve_model(&cal, &model)?;
            let sys = build_system(&applied, policy).map_err(|e| classify(e, "building system"))?;
            let payload = serde_json::to_string_pretty(&sys.to_json()).unwrap();
            emit(
                Artifact {
                    payload,
                    manifest: manifest(
                        "dump-system",
                        &applied,
                        Some(&model.scenario),
                        Some(policy.name()),
                        None,
                    ),
                },
                &output,
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(message)) => {
            eprintln!("{}", message);
            ExitCode::from(2)
        }
        Err(Failure::Model { error, context }) => {
            let body = serde_json::json!({
                "code": error_code(&error),
                "message": error.to_string(),
                "context": context,
            });
            eprintln!("{}", serde_json::to_string_pretty(&body).unwrap());
            ExitCode::from(1)
        }
    }
}
