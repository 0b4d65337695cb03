use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lca_core::baseline::{solve_fista, spec_duality_gap};
use lca_core::costs::{ActivationSpec, Family, SpecFile};
use lca_core::dynamics::{lambda_rule, solve_lca, Continuation, SolverOptions};
use lca_core::harness::svg::{line_plot, LinePlot, Series};
use lca_core::harness::{
    activation_table, catalog_family, run_converge, run_phase, run_reweight, trace_csv,
    ExperimentConfig, ExperimentKind, Tabular,
};
use lca_core::model::{energy, rel_mse, MeasurementProblem, Solution};
use lca_core::synth::{generate, ProblemParams};
use lca_core::Error;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "lca",
    version,
    about = "Locally competitive sparse approximation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Primary output (CSV or JSON); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Lca,
    Fista,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a seeded synthetic problem and write it as JSON.
    Gen {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 0.2)]
        rho: f64,
        #[arg(long, default_value_t = 1e-4)]
        noise_var: f64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
    },
    /// Solve one problem file.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, value_enum, default_value_t = SolverArg::Lca)]
        solver: SolverArg,
        /// Family name (catalog shape parameters) or a spec JSON file.
        #[arg(long, default_value = "L1")]
        cost: String,
        /// A positive real, or `auto` for the 1%-of-‖Φᵀy‖∞ rule; default is the problem's λ.
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long, value_enum, default_value_t = Switch::On)]
        continuation: Switch,
        /// Write the solver trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Recovery over a (δ, ρ) grid.
    Phase {
        #[command(flatten)]
        common: Common,
    },
    /// LCA convergence traces for the size presets.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Also write every per-trial trace as long-format CSV.
        #[arg(long)]
        traces: Option<PathBuf>,
    },
    /// Plain, iterative and dynamic re-weighted ℓ1 across sparsity levels.
    Reweight {
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate every activation function and its cost.
    Activations {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 4.0)]
        u_max: f64,
        #[arg(long, default_value_t = 401)]
        points: usize,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Divergence { .. } => 3,
            Error::Io { .. } => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn bad_config(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

/// Reading inputs that are missing or unreadable is a configuration problem.
fn input<T>(r: lca_core::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| match e {
        Error::Io { .. } => bad_config(e.to_string()),
        e => e.into(),
    })
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure {
            code: 1,
            message: format!("{}: {e}", p.display()),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn experiment(common: &Common, kind: ExperimentKind) -> Result<ExperimentConfig, Failure> {
    let mut config = match &common.config {
        Some(path) => input(ExperimentConfig::load(path))?,
        None => ExperimentConfig::new(kind),
    };
    if config.kind != kind {
        return Err(bad_config(format!(
            "config describes a {:?} experiment, not {kind:?}",
            config.kind
        )));
    }
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if common.threads.is_some() {
        config.threads = common.threads;
    }
    if common.out.is_some() {
        config.out = common.out.clone();
    }
    if common.svg.is_some() {
        config.svg = common.svg.clone();
    }
    config.validate()?;
    Ok(config)
}

fn write_results(config: &ExperimentConfig, results: &impl Tabular) -> Result<(), Failure> {
    emit(config.out.as_deref(), &results.csv())?;
    if let Some(svg) = &config.svg {
        emit(Some(svg), &results.svg())?;
    }
    Ok(())
}

fn parse_spec(
    cost: &str,
    problem: &MeasurementProblem,
    lambda: f64,
) -> Result<ActivationSpec, Failure> {
    if cost.ends_with(".json") {
        let text = std::fs::read_to_string(cost).map_err(|e| bad_config(format!("{cost}: {e}")))?;
        let file: SpecFile =
            serde_json::from_str(&text).map_err(|e| bad_config(format!("{cost}: {e}")))?;
        return Ok(ActivationSpec::try_from(file)?.with_lambda(lambda)?);
    }
    let n = problem.n();
    let family = match catalog_family(cost)? {
        Family::WeightedL1 { .. } => Family::WeightedL1 {
            weights: vec![1.0; n],
        },
        Family::WeightedL2 { .. } => Family::WeightedL2 {
            weights: vec![1.0; n],
        },
        Family::BlockL1 { .. } => Family::BlockL1 {
            groups: problem
                .groups()
                .map(<[_]>::to_vec)
                .unwrap_or_else(|| (0..n).map(|i| vec![i]).collect()),
        },
        f => f,
    };
    Ok(ActivationSpec::new(family, lambda)?)
}

#[allow(clippy::too_many_arguments)]
fn solve(
    common: &Common,
    problem_path: &Path,
    solver: SolverArg,
    cost: &str,
    lambda: Option<&str>,
    continuation: Switch,
    trace: Option<&Path>,
) -> Result<(), Failure> {
    let problem = input(MeasurementProblem::load(problem_path))?;
    let lambda = match lambda {
        None => problem.lambda(),
        Some("auto") => lambda_rule(&problem)?,
        Some(text) => text
            .parse::<f64>()
            .map_err(|_| bad_config(format!("--lambda expects a real or `auto`, got `{text}`")))?,
    };
    let problem = problem.with_lambda(lambda)?;
    let spec = parse_spec(cost, &problem, lambda)?;
    let mut opts = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| bad_config(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<SolverOptions>(&text)
                .map_err(|e| bad_config(format!("{}: {e}", path.display())))?
        }
        None => SolverOptions::default(),
    };
    if let Switch::Off = continuation {
        opts.continuation = Continuation::off();
    }
    opts.validate()?;

    let start = Instant::now();
    let sol: Solution = match solver {
        SolverArg::Lca => solve_lca(&problem, &spec, &opts)?,
        SolverArg::Fista => {
            let weights: Option<Vec<f64>> = match spec.family() {
                Family::L1 => None,
                Family::WeightedL1 { weights } => {
                    Some(weights.iter().map(|w| w * lambda).collect())
                }
                other => {
                    return Err(bad_config(format!(
                        "fista handles L1 and WEIGHTED_L1 only, not {}",
                        other.name()
                    )))
                }
            };
            solve_fista(&problem, weights.as_deref(), &Default::default())?
        }
    };
    eprintln!("wallclock: {:.3} s", start.elapsed().as_secs_f64());

    let report = json!({
        "solver": match solver { SolverArg::Lca => "lca", SolverArg::Fista => "fista" },
        "cost": spec.family().name(),
        "lambda": lambda,
        "converged": sol.converged,
        "steps": sol.steps,
        "simulated_time": sol.simulated_time,
        "energy": energy(&problem, &spec, &sol.a)?,
        "gap": spec_duality_gap(&problem, &spec, &sol.a)?,
        "rel_mse": problem.truth().map(|t| rel_mse(&sol.a, t)).transpose()?,
        "a": sol.a,
    });
    let text = serde_json::to_string_pretty(&report).map_err(|e| bad_config(e.to_string()))? + "\n";
    emit(common.out.as_deref(), &text)?;
    if let Some(path) = trace {
        emit(Some(path), &trace_csv(&sol.trace))?;
    }
    if let Some(path) = &common.svg {
        let plot = LinePlot {
            title: format!(
                "{} / {}",
                report["solver"].as_str().unwrap_or(""),
                spec.family().name()
            ),
            x_label: match solver {
                SolverArg::Lca => "t / tau".into(),
                SolverArg::Fista => "iteration".into(),
            },
            y_label: "energy".into(),
            log_x: false,
            log_y: false,
            series: vec![Series {
                name: "energy".into(),
                points: sol.trace.iter().map(|r| (r.t_over_tau, r.energy)).collect(),
            }],
        };
        emit(Some(path), &line_plot(&plot))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Gen {
            common,
            n,
            delta,
            rho,
            noise_var,
            stream,
        } => {
            if common.svg.is_some() {
                return Err(bad_config("gen has no figure output"));
            }
            let mut params = match &common.config {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| bad_config(format!("{}: {e}", path.display())))?;
                    serde_json::from_str::<ProblemParams>(&text)
                        .map_err(|e| bad_config(format!("{}: {e}", path.display())))?
                }
                None => ProblemParams {
                    stream,
                    ..ProblemParams::new(n, delta, rho).with_noise_var(noise_var)
                },
            };
            if let Some(seed) = common.seed {
                params.seed = seed;
            }
            let (problem, _) = generate(&params)?;
            emit(common.out.as_deref(), &(problem.to_json()? + "\n"))
        }
        Command::Solve {
            common,
            problem,
            solver,
            cost,
            lambda,
            continuation,
            trace,
        } => solve(
            &common,
            &problem,
            solver,
            &cost,
            lambda.as_deref(),
            continuation,
            trace.as_deref(),
        ),
        Command::Phase { common } => {
            let config = experiment(&common, ExperimentKind::Phase)?;
            let start = Instant::now();
            let grid = run_phase(&config)?;
            eprintln!("wallclock: {:.3} s", start.elapsed().as_secs_f64());
            write_results(&config, &grid)
        }
        Command::Converge { common, traces } => {
            let config = experiment(&common, ExperimentKind::Converge)?;
            let start = Instant::now();
            let report = run_converge(&config)?;
            eprintln!("wallclock: {:.3} s", start.elapsed().as_secs_f64());
            write_results(&config, &report)?;
            if let Some(path) = traces {
                emit(Some(&path), &report.traces_csv())?;
            }
            Ok(())
        }
        Command::Reweight { common } => {
            let config = experiment(&common, ExperimentKind::Reweight)?;
            let start = Instant::now();
            let table = run_reweight(&config)?;
            eprintln!("wallclock: {:.3} s", start.elapsed().as_secs_f64());
            write_results(&config, &table)
        }
        Command::Activations {
            common,
            lambda,
            u_max,
            points,
        } => {
            if common.config.is_some() || common.seed.is_some() {
                return Err(bad_config("activations takes no config or seed"));
            }
            if !(u_max > 0.0 && u_max.is_finite()) || points < 2 {
                return Err(bad_config("need u_max > 0 and at least 2 points"));
            }
            let table = activation_table(lambda, u_max, points)?;
            emit(common.out.as_deref(), &table.csv())?;
            if let Some(svg) = &common.svg {
                emit(Some(svg), &table.svg())?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
