use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use bolasso::bolasso::{MuGrid, DEFAULT_REPLICATES, DEFAULT_SOFT_FRACTION};
use bolasso::harness::cv::estimators_from_names;
use bolasso::harness::data::Target;
use bolasso::harness::output::{write_artifacts, Format, Manifest};
use bolasso::harness::{run_experiment, Consistency, DataSource, ExperimentKind, ExperimentSpec, ModelSource, Selector};
use bolasso::population::{SelectionMethod, WeightScheme};
use bolasso::{Error, Result};

/// Lasso paths, bootstrap-intersected selection and the experiments around them.
#[derive(Parser, Debug)]
#[command(name = "bolasso", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Root seed; every random draw is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Monte-Carlo replications (cv: repetitions of the k-fold split).
    #[arg(long, global = true)]
    reps: Option<usize>,
    /// Bootstrap replicates.
    #[arg(long, global = true, default_value_t = DEFAULT_REPLICATES)]
    m: usize,
    /// Log-spaced grid as `count,min-ratio`, relative to mu_max.
    #[arg(long, global = true, value_parser = parse_grid)]
    mu_grid: Option<MuGrid>,
    /// Grid of mu0 values, used as mu = mu0 / sqrt(n) (overrides --mu-grid).
    #[arg(long, global = true, value_delimiter = ',')]
    mu0: Option<Vec<f64>>,
    /// Minimum selection frequency of the soft intersection.
    #[arg(long, global = true, default_value_t = DEFAULT_SOFT_FRACTION)]
    soft: f64,
    /// Output directory; the primary table goes to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "csv", value_parser = serde_enum::<Format>)]
    format: Format,
    /// Also write SVG plots (needs --out).
    #[arg(long, global = true)]
    plot: bool,
}

impl Common {
    fn grid(&self) -> MuGrid {
        match (&self.mu0, &self.mu_grid) {
            (Some(mu0), _) => MuGrid::RootN(mu0.clone()),
            (None, Some(g)) => g.clone(),
            (None, None) => MuGrid::default(),
        }
    }
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// Model JSON with fields q, w_true and sigma.
    #[arg(long, conflicts_with_all = ["p", "r"])]
    model: Option<PathBuf>,
    /// Number of covariates of a generated model.
    #[arg(long)]
    p: Option<usize>,
    /// Number of relevant covariates of a generated model.
    #[arg(long)]
    r: Option<usize>,
    /// Side of the consistency condition a generated model must fall on.
    #[arg(long, default_value = "any", value_parser = serde_enum::<Consistency>)]
    consistency: Consistency,
    #[arg(long, default_value = "per-coordinate", value_parser = serde_enum::<WeightScheme>)]
    scheme: WeightScheme,
}

impl ModelArgs {
    fn source(&self) -> Result<ModelSource> {
        match (&self.model, self.p, self.r) {
            (Some(path), _, _) => Ok(ModelSource::File { path: path.clone() }),
            (None, Some(p), Some(r)) => {
                Ok(ModelSource::Generate { p, r, consistency: self.consistency, scheme: self.scheme })
            }
            _ => Err(Error::InvalidArgument("give either --model FILE or both --p and --r".into())),
        }
    }
}

#[derive(Args, Debug)]
struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Response column of the CSV, by header name or zero-based index.
    #[arg(long)]
    target: Option<String>,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// Use the CSV columns as they are.
    #[arg(long)]
    raw: bool,
    /// Sample size when the data are drawn from a model.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[command(flatten)]
    model: ModelArgs,
}

impl DataArgs {
    fn source(&self) -> Result<DataSource> {
        match &self.data {
            Some(path) => {
                let target = self
                    .target
                    .as_deref()
                    .ok_or_else(|| Error::InvalidArgument("--data needs --target".into()))?;
                Ok(DataSource::Csv {
                    path: path.clone(),
                    target: target.parse::<Target>().unwrap_or_else(|e| match e {}),
                    delimiter: self.delimiter,
                    standardize: !self.raw,
                    scale_response: !self.raw,
                })
            }
            None => Ok(DataSource::Synthetic { model: self.model.source()?, n: self.n }),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a model and a dataset from it.
    Synth {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1000)]
        n: usize,
    },
    /// Consistency index of a model.
    Kappa {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Lasso path knots of a dataset.
    LassoPath {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Bootstrap intersection on a dataset.
    Bolasso {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Per-variable selection frequencies over replicated datasets.
    Freq {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// lasso, bolasso (hard intersection) or bolasso-s (soft).
        #[arg(long, default_value = "lasso")]
        method: String,
    },
    /// Probability of recovering the true support versus mu.
    PatternProb {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Replicate counts to compare (defaults to 2, 4, ..., --m).
        #[arg(long, value_delimiter = ',')]
        ms: Option<Vec<usize>>,
    },
    /// Selection error of fixed-size selectors versus n.
    Compare {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_delimiter = ',', default_value = "16,32,64,128,256,512,1024")]
        ns: Vec<usize>,
        #[arg(
            long,
            value_delimiter = ',',
            value_parser = serde_enum::<Selector>,
            default_value = "lasso,bolasso,forward-greedy,threshold-ls,adaptive-lasso,bagged-ls"
        )]
        selectors: Vec<Selector>,
    },
    /// Repeated k-fold cross-validation of estimators.
    Cv {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, value_delimiter = ',', default_value = "lasso,bolasso,bolasso-s,bagging,ridge")]
        methods: Vec<String>,
    },
    /// Run an experiment described by a JSON spec (as stored in a manifest).
    Run {
        #[arg(long)]
        spec: PathBuf,
    },
}

fn serde_enum<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn parse_grid(s: &str) -> std::result::Result<MuGrid, String> {
    let (count, ratio) = s.split_once(',').ok_or("expected count,min-ratio")?;
    let points = count.trim().parse::<usize>().map_err(|e| format!("count: {e}"))?;
    let min_ratio = ratio.trim().parse::<f64>().map_err(|e| format!("min-ratio: {e}"))?;
    if points == 0 || !(min_ratio > 0.0 && min_ratio < 1.0) {
        return Err(format!("need count >= 1 and min-ratio in (0, 1), got {s}"));
    }
    Ok(MuGrid::LogRelative { points, min_ratio })
}

fn doubling_counts(max: usize) -> Vec<usize> {
    std::iter::successors(Some(2usize), |m| m.checked_mul(2)).take_while(|&m| m <= max).collect()
}

fn build_spec(common: &Common, command: &Command) -> Result<ExperimentSpec> {
    let reps = |default: usize| common.reps.unwrap_or(default);
    let kind = match command {
        Command::Synth { model, n } => ExperimentKind::Synth { model: model.source()?, n: *n },
        Command::Kappa { model } => ExperimentKind::Kappa { model: model.source()? },
        Command::LassoPath { data } => ExperimentKind::LassoPath { data: data.source()? },
        Command::Bolasso { data } => ExperimentKind::Bolasso {
            data: data.source()?,
            replicates: common.m,
            mu_grid: common.grid(),
            soft_fraction: common.soft,
        },
        Command::Freq { model, n, method } => ExperimentKind::SignFrequency {
            model: model.source()?,
            n: *n,
            reps: reps(256),
            mu_grid: common.grid(),
            method: match method.as_str() {
                "lasso" => SelectionMethod::Lasso,
                "bolasso" => SelectionMethod::Bolasso { replicates: common.m, soft_fraction: 1.0 },
                "bolasso-s" => SelectionMethod::Bolasso { replicates: common.m, soft_fraction: common.soft },
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown method {other:?} (expected lasso, bolasso, bolasso-s)"
                    )))
                }
            },
        },
        Command::PatternProb { model, n, ms } => ExperimentKind::CorrectPattern {
            model: model.source()?,
            n: *n,
            reps: reps(64),
            mu_grid: common.grid(),
            ms: ms.clone().unwrap_or_else(|| doubling_counts(common.m)),
        },
        Command::Compare { model, ns, selectors } => ExperimentKind::MethodComparison {
            model: model.source()?,
            ns: ns.clone(),
            reps: reps(32),
            replicates: common.m,
            mu_grid: common.grid(),
            selectors: selectors.clone(),
        },
        Command::Cv { data, folds, methods } => ExperimentKind::CvBenchmark {
            data: data.source()?,
            methods: estimators_from_names(methods, common.m, common.soft)?,
            folds: *folds,
            replications: reps(10),
        },
        Command::Run { spec } => {
            let text = std::fs::read_to_string(spec).map_err(|e| Error::from(e).context(format!("reading {}", spec.display())))?;
            let spec: ExperimentSpec = serde_json::from_str(&text)
                .map_err(|e| Error::InvalidArgument(format!("spec {}: {e}", spec.display())))?;
            return Ok(spec);
        }
    };
    Ok(ExperimentSpec { seed: common.seed, kind })
}

fn run(cli: &Cli) -> Result<()> {
    if cli.common.plot && cli.common.out.is_none() {
        return Err(Error::InvalidArgument("--plot needs --out".into()));
    }
    let spec = build_spec(&cli.common, &cli.command)?;
    let started = Instant::now();
    let artifacts = run_experiment(&spec)?;
    match &cli.common.out {
        Some(dir) => {
            let manifest = Manifest {
                tool: env!("CARGO_PKG_NAME").into(),
                version: env!("CARGO_PKG_VERSION").into(),
                command: spec.name().into(),
                seed: spec.seed,
                spec: serde_json::to_value(&spec)?,
                outputs: Vec::new(),
                summary: Default::default(),
                wall_time_seconds: started.elapsed().as_secs_f64(),
            };
            let written = write_artifacts(dir, &artifacts, cli.common.format, cli.common.plot, manifest)?;
            for path in written {
                eprintln!("wrote {}", path.display());
            }
        }
        None => {
            let primary = artifacts
                .tables
                .first()
                .ok_or_else(|| Error::InvalidArgument("experiment produced no table".into()))?;
            std::io::stdout().lock().write_all(primary.render(cli.common.format)?.as_bytes())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
