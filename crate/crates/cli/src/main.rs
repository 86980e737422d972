//! `easyuq` command-line interface.
//!
//! Exit codes: 0 on success, 2 for usage or input errors, 3 when a numerical
//! procedure fails. Diagnostics go to stderr and data to stdout unless
//! `--output` names a file.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use easyuq::baselines::{fit_single_gaussian, predict_single_gaussian};
use easyuq::io::{read_column_csv, read_training_csv_path};
use easyuq::scoring::{crps_step, mean_score, score_mixture, ScoreReport};
use easyuq::simulation::{consistency_experiment, simulate, write_data_csv, EvalGrid, SimConfig};
use easyuq::smoothing::smooth;
use easyuq::tuning::{grid_search, bandwidth_bracket, moderated_search, Objective, TuningResult};
use easyuq::workflow::{builtin_predictor, evaluate_basic_easyuq, parse_hypergrid, run_algorithm1, Dataset, SplitPlan};
use easyuq::{idr, json, Error, IdrModel, KernelSpec, ScoreKind, NU_GRID};

const DEFAULT_LEVELS: &str = "0.05,0.25,0.5,0.75,0.95";

#[derive(Parser)]
#[command(name = "easyuq", version, about = "Calibrated predictive distributions from single-valued model output")]
struct Cli {
    /// Worker threads for internal parallelism (default: available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit EasyUQ to a CSV with columns x and y.
    Fit {
        #[arg(long)]
        input: PathBuf,
        /// Model JSON destination (stdout if omitted).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Predictive quantiles at the x values of a CSV.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Comma-separated quantile levels.
        #[arg(long, default_value = DEFAULT_LEVELS)]
        levels: String,
        /// Smooth with kernel "nu,h" before taking quantiles.
        #[arg(long)]
        kernel: Option<KernelSpec>,
    },
    /// Score predictions on a test CSV with columns x and y.
    Score(ScoreArgs),
    /// Select the kernel (nu, h) for a fitted model.
    Tune {
        #[arg(long)]
        model: PathBuf,
        /// Training CSV the model was fitted on.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Mode::Multiple)]
        mode: Mode,
        /// Criterion scoring rule.
        #[arg(long, value_enum, default_value_t = Score::Logs)]
        score: Score,
    },
    /// Draw a sample from the Gamma simulation model.
    Simulate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sup errors of basic and smoothed EasyUQ against the true CDF.
    Consistency {
        /// Comma-separated, strictly increasing sample sizes.
        #[arg(long, default_value = "250,1000,4000")]
        sizes: String,
        /// Number of seeds, starting at --seed.
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Split-based evaluation with a point predictor.
    Workflow(WorkflowArgs),
}

#[derive(Args)]
struct ScoreArgs {
    /// Fitted EasyUQ model.
    #[arg(long, conflicts_with = "baseline")]
    model: Option<PathBuf>,
    /// Score the Single Gaussian baseline fitted on --train instead.
    #[arg(long, requires = "train")]
    baseline: bool,
    #[arg(long)]
    train: Option<PathBuf>,
    /// Test CSV with columns x and y.
    #[arg(long)]
    input: PathBuf,
    /// Per-case scores as CSV (stdout if omitted).
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Score::Crps)]
    score: Score,
    #[arg(long)]
    kernel: Option<KernelSpec>,
}

#[derive(Args)]
struct WorkflowArgs {
    /// Dataset CSV with feature columns and one outcome column.
    #[arg(long)]
    input: PathBuf,
    /// Outcome column (default: "y", else the last column).
    #[arg(long)]
    outcome: Option<String>,
    /// identity, linear or knn.
    #[arg(long, default_value = "identity")]
    predictor: String,
    /// Settings separated by ';', each "name=value,...".
    #[arg(long, default_value = "")]
    hypergrid: String,
    #[arg(long, default_value_t = 20)]
    splits: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use unsmoothed EasyUQ, selected and scored by CRPS.
    #[arg(long)]
    basic: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Multiple,
    Moderated,
}

#[derive(Clone, Copy, ValueEnum)]
enum Score {
    Logs,
    Crps,
}

impl From<Score> for ScoreKind {
    fn from(s: Score) -> Self {
        match s {
            Score::Logs => ScoreKind::Logs,
            Score::Crps => ScoreKind::Crps,
        }
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Lib(e.into())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Lib(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Lib(e.into())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { 3 } else { 2 })
        }
    }
}

fn sink(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> CliResult {
    let mut out = sink(path)?;
    json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn read_model(path: &Path) -> CliResult<IdrModel> {
    let file = File::open(path).map_err(|e| CliError::Usage(format!("cannot open model {}: {e}", path.display())))?;
    Ok(serde_json::from_reader(io::BufReader::new(file))?)
}

fn parse_levels(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| {
            let v: f64 = t
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("invalid level '{t}'")))?;
            if v > 0.0 && v < 1.0 {
                Ok(v)
            } else {
                Err(CliError::Usage(format!("level {v} outside (0, 1)")))
            }
        })
        .collect()
}

fn run(command: Command) -> CliResult {
    match command {
        Command::Fit { input, output } => {
            let data = read_training_csv_path(&input)?;
            let model = idr::fit(&data)?;
            write_json(output.as_deref(), &model)?;
            eprintln!(
                "n = {}, k = {}, m = {}",
                data.len(),
                model.n_covariates(),
                model.n_thresholds()
            );
            Ok(())
        }
        Command::Predict {
            model,
            input,
            output,
            levels,
            kernel,
        } => {
            let model = read_model(&model)?;
            let levels = parse_levels(&levels)?;
            let xs = read_column_csv(File::open(&input)?, "x")?;
            let mut w = csv::Writer::from_writer(sink(output.as_deref())?);
            let mut header = vec!["x".to_string()];
            header.extend(levels.iter().map(|a| format!("q{a}")));
            w.write_record(&header)?;
            for x in xs {
                let step = idr::predict(&model, x)?;
                let mut row = vec![x.to_string()];
                for &a in &levels {
                    let q = match kernel {
                        Some(spec) => smooth(&step, spec).quantile(a)?,
                        None => step.quantile(a)?,
                    };
                    row.push(q.to_string());
                }
                w.write_record(&row)?;
            }
            w.flush()?;
            Ok(())
        }
        Command::Score(args) => score(args),
        Command::Tune {
            model,
            input,
            output,
            mode,
            score,
        } => {
            let model = read_model(&model)?;
            let data = read_training_csv_path(&input)?;
            let objective = Objective::one_fit(&model, &data, score.into())?;
            let result: TuningResult = match mode {
                Mode::Multiple => grid_search(&objective, &NU_GRID, bandwidth_bracket(data.y())?)?,
                Mode::Moderated => moderated_search(&objective, data.y())?,
            };
            eprintln!("{:>6} {:>14} {:>14}", "nu", "h", "criterion");
            for row in &result.per_nu {
                eprintln!("{:>6} {:>14.6} {:>14.6}", row.nu.to_string(), row.h, row.criterion);
            }
            eprintln!(
                "best: nu = {}, h = {:.6}{}",
                result.best.nu,
                result.best.h,
                if result.fallback_used { " (Silverman fallback)" } else { "" }
            );
            write_json(output.as_deref(), &result)
        }
        Command::Simulate { n, seed, output } => {
            let data = simulate(SimConfig::new(n, seed)?)?;
            let mut out = sink(output.as_deref())?;
            write_data_csv(&data, &mut out)?;
            out.flush()?;
            Ok(())
        }
        Command::Consistency {
            sizes,
            seeds,
            seed,
            output,
        } => {
            let sizes: Vec<usize> = sizes
                .split(',')
                .map(|s| s.trim().parse().map_err(|_| CliError::Usage(format!("invalid size '{s}'"))))
                .collect::<CliResult<_>>()?;
            if seeds == 0 {
                return Err(CliError::Usage("need at least one seed".into()));
            }
            let seeds: Vec<u64> = (seed..seed + seeds).collect();
            let table = consistency_experiment(&sizes, &seeds, &EvalGrid::default())?;
            for m in table.medians() {
                eprintln!(
                    "n = {:>6}: median sup error basic {:.4}, smooth {:.4}",
                    m.n, m.median_basic, m.median_smooth
                );
            }
            let mut out = sink(output.as_deref())?;
            table.write_csv(&mut out)?;
            out.flush()?;
            Ok(())
        }
        Command::Workflow(args) => {
            let dataset = Dataset::from_csv_path(&args.input, args.outcome.as_deref())?;
            let predictor = builtin_predictor(&args.predictor)?;
            let grid = parse_hypergrid(&args.hypergrid)?;
            let plan = SplitPlan::new(args.splits, args.seed)?;
            let report = if args.basic {
                evaluate_basic_easyuq(&dataset, predictor.as_ref(), &grid, &plan)?
            } else {
                run_algorithm1(&dataset, predictor.as_ref(), &grid, &plan)?
            };
            for f in &report.failures {
                eprintln!("split {} failed: {}", f.split, f.error);
            }
            eprintln!(
                "{} splits, grand mean CRPS {:.6}{}",
                report.splits.len(),
                report.grand_mean_crps,
                report
                    .grand_mean_logs
                    .map_or(String::new(), |l| format!(", LogS {l:.6}"))
            );
            write_json(args.output.as_deref(), &report)
        }
    }
}

fn score(args: ScoreArgs) -> CliResult {
    let test = read_training_csv_path(&args.input)?;
    let kind = ScoreKind::from(args.score);
    let scores: Vec<f64> = if args.baseline {
        let train = read_training_csv_path(args.train.as_deref().expect("clap enforces --train"))?;
        let model = fit_single_gaussian(&train)?;
        test.pairs()
            .map(|(x, y)| score_mixture(kind, &predict_single_gaussian(&model, x)?, y))
            .collect::<Result<_, _>>()?
    } else {
        let path = args
            .model
            .as_deref()
            .ok_or_else(|| CliError::Usage("either --model or --baseline is required".into()))?;
        let model = read_model(path)?;
        match (kind, args.kernel) {
            (ScoreKind::Logs, None) => {
                return Err(CliError::Usage(
                    "LogS needs a continuous prediction; pass --kernel nu,h".into(),
                ))
            }
            (ScoreKind::Crps, None) => test
                .pairs()
                .map(|(x, y)| Ok(crps_step(&idr::predict(&model, x)?, y)))
                .collect::<Result<_, Error>>()?,
            (_, Some(spec)) => test
                .pairs()
                .map(|(x, y)| score_mixture(kind, &smooth(&idr::predict(&model, x)?, spec), y))
                .collect::<Result<_, _>>()?,
        }
    };
    let report: ScoreReport = mean_score(&scores)?;
    let mut w = csv::Writer::from_writer(sink(args.output.as_deref())?);
    w.write_record(["x", "y", kind.to_string().as_str()])?;
    for ((x, y), s) in test.pairs().zip(&scores) {
        w.write_record([x.to_string(), y.to_string(), s.to_string()])?;
    }
    w.flush()?;
    eprintln!(
        "mean {kind} = {} over {} cases ({} infinite)",
        report.mean_score, report.n_cases, report.n_infinite
    );
    Ok(())
}
