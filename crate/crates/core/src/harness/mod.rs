//! Experiment orchestration: every command of the binary is an
//! [`ExperimentSpec`] turned into [`Artifacts`] by [`run_experiment`].
//!
//! All randomness flows from the spec seed through fixed streams: the model
//! is drawn from stream 0, a single dataset from stream 1, Monte-Carlo
//! replications from stream 2 and bootstrap resampling from stream 3. The
//! same spec therefore always yields the same tables.

pub mod cv;
pub mod data;
pub mod output;
pub mod plot;

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::baselines::{
    bagged_ls_threshold, forward_greedy, lasso_supports, stable_pattern_near, threshold_ls, AdaptivePath, ZERO_WEIGHT,
};
use crate::bolasso::{bootstrap_paths, run_bolasso, soft_intersect, BolassoConfig, MuGrid, Resampling};
use crate::error::{Error, Result, ResultExt};
use crate::lasso::{lars_lasso_path, support_of, LassoProblem};
use crate::numerics::IndexSet;
use crate::population::{
    consistency_kappa, find_model_with, generate_population_with, log_odds, pattern_probability_experiment,
    run_selection, sample_dataset, PopulationModel, SelectionMethod, WeightScheme,
};
use crate::rng::{child_rng, derive_seed};

use cv::{kfold_cv, CvMethod, CvReport, Estimator};
use data::{load_csv, standardize_with, Target};
use output::{Artifacts, Cell, Table};
use plot::{LinePlot, Series};

const MODEL_STREAM: u64 = 0;
const DATA_STREAM: u64 = 1;
const REPS_STREAM: u64 = 2;
const RESAMPLE_STREAM: u64 = 3;
/// Model draws attempted when a side of `κ <= 1` is requested.
pub const MAX_MODEL_DRAWS: usize = 10_000;

/// Which side of the consistency threshold a generated model must fall on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Consistency {
    #[default]
    Any,
    Consistent,
    Inconsistent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "source")]
pub enum ModelSource {
    /// A model stored as JSON (`q`, `w_true`, `sigma`).
    File { path: PathBuf },
    Generate {
        p: usize,
        r: usize,
        #[serde(default)]
        consistency: Consistency,
        #[serde(default)]
        scheme: WeightScheme,
    },
}

impl ModelSource {
    pub fn resolve(&self, seed: u64) -> Result<PopulationModel> {
        match self {
            ModelSource::File { path } => {
                let text = std::fs::read_to_string(path).context(|| format!("reading model {}", path.display()))?;
                Ok(serde_json::from_str(&text).context(|| format!("parsing model {}", path.display()))?)
            }
            &ModelSource::Generate { p, r, consistency, scheme } => {
                let mut rng = child_rng(seed, MODEL_STREAM);
                let mut draw = || generate_population_with(p, r, scheme, &mut rng);
                match consistency {
                    Consistency::Any => draw(),
                    Consistency::Consistent => find_model_with(true, MAX_MODEL_DRAWS, draw),
                    Consistency::Inconsistent => find_model_with(false, MAX_MODEL_DRAWS, draw),
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "source")]
pub enum DataSource {
    Csv {
        path: PathBuf,
        target: Target,
        #[serde(default = "default_delimiter")]
        delimiter: char,
        /// Center and scale columns, center the response.
        #[serde(default = "yes")]
        standardize: bool,
        /// Also scale the response to unit mean square.
        #[serde(default = "yes")]
        scale_response: bool,
    },
    /// `n` rows drawn from a population model.
    Synthetic { model: ModelSource, n: usize },
}

fn default_delimiter() -> char {
    ','
}

fn yes() -> bool {
    true
}

/// A dataset ready for analysis.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub problem: LassoProblem,
    pub columns: Vec<String>,
    pub summary: serde_json::Map<String, serde_json::Value>,
}

impl DataSource {
    pub fn resolve(&self, seed: u64) -> Result<Dataset> {
        let mut summary = serde_json::Map::new();
        match self {
            DataSource::Csv { path, target, delimiter, standardize, scale_response } => {
                let d = u8::try_from(*delimiter)
                    .map_err(|_| Error::InvalidArgument(format!("delimiter {delimiter:?} is not a single byte")))?;
                let loaded = load_csv(path, target, d).context(|| format!("loading {}", path.display()))?;
                summary.insert("dropped_rows".into(), loaded.dropped_rows.into());
                summary.insert("target".into(), loaded.target.clone().into());
                if !*standardize {
                    return Ok(Dataset { problem: loaded.problem, columns: loaded.columns, summary });
                }
                let (problem, st) = standardize_with(&loaded.problem, *scale_response)?;
                let dropped: Vec<&str> = st.dropped.iter().map(|j| loaded.columns[j].as_str()).collect();
                summary.insert("constant_columns_dropped".into(), json!(dropped));
                summary.insert("standardization".into(), serde_json::to_value(&st)?);
                let columns = st.kept.iter().map(|j| loaded.columns[j].clone()).collect();
                Ok(Dataset { problem, columns, summary })
            }
            DataSource::Synthetic { model, n } => {
                let model = model.resolve(seed)?;
                let problem = sample_dataset(&model, *n, &mut child_rng(seed, DATA_STREAM))?;
                let columns = (0..model.p()).map(|j| format!("x{j}")).collect();
                Ok(Dataset { problem, columns, summary })
            }
        }
    }
}

/// Variable-selection rules compared at a fixed support size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selector {
    Lasso,
    Bolasso,
    ForwardGreedy,
    ThresholdLs,
    AdaptiveLasso,
    BaggedLs,
}

impl Selector {
    pub const ALL: [Selector; 6] = [
        Selector::Lasso,
        Selector::Bolasso,
        Selector::ForwardGreedy,
        Selector::ThresholdLs,
        Selector::AdaptiveLasso,
        Selector::BaggedLs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Selector::Lasso => "lasso",
            Selector::Bolasso => "bolasso",
            Selector::ForwardGreedy => "forward-greedy",
            Selector::ThresholdLs => "threshold-ls",
            Selector::AdaptiveLasso => "adaptive-lasso",
            Selector::BaggedLs => "bagged-ls",
        }
    }

    /// Support of exactly (or, along a path, as near as possible to) `r`
    /// variables.
    pub fn select(self, problem: &LassoProblem, r: usize, grid: &MuGrid, replicates: usize, seed: u64) -> Result<IndexSet> {
        Ok(match self {
            Selector::Lasso => stable_pattern_near(&lasso_supports(problem, &grid.resolve(problem)?)?, r),
            Selector::Bolasso => {
                let mu = grid.resolve(problem)?;
                let paths = bootstrap_paths(problem, replicates, seed, Resampling::Bootstrap)?;
                let hard: Vec<IndexSet> = mu
                    .iter()
                    .map(|&m| {
                        let s: Vec<IndexSet> = paths.iter().map(|path| path.support_at(m)).collect();
                        soft_intersect(&s, 1.0, problem.p())
                    })
                    .collect();
                stable_pattern_near(&hard, r)
            }
            Selector::ForwardGreedy => forward_greedy(problem, r)?.support,
            Selector::ThresholdLs => threshold_ls(problem, r)?.support,
            Selector::AdaptiveLasso => {
                let path = AdaptivePath::new(problem, 1.0)?;
                let mu = grid.resolve_for(path.mu_max(), problem.n())?;
                let supports: Vec<IndexSet> = mu.iter().map(|&m| support_of(&path.at(m), ZERO_WEIGHT)).collect();
                stable_pattern_near(&supports, r)
            }
            Selector::BaggedLs => bagged_ls_threshold(problem, replicates, r, seed, Resampling::Bootstrap)?.support,
        })
    }
}

/// `‖1_estimated − 1_truth‖²`, the size of the symmetric difference.
pub fn selection_error(estimated: &IndexSet, truth: &IndexSet, p: usize) -> Result<usize> {
    if let Some(j) = estimated.iter().chain(truth.iter()).find(|&j| j >= p) {
        return Err(Error::IndexOutOfRange { index: j, len: p });
    }
    Ok(estimated.symmetric_difference_len(truth))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ExperimentKind {
    /// Draw a model and one dataset from it.
    Synth { model: ModelSource, n: usize },
    /// Consistency index of a model.
    Kappa { model: ModelSource },
    /// Knots of the Lasso path of a dataset.
    LassoPath { data: DataSource },
    /// Bootstrap intersection on a dataset.
    Bolasso { data: DataSource, replicates: usize, mu_grid: MuGrid, soft_fraction: f64 },
    /// Per-variable selection frequencies over fresh datasets.
    SignFrequency { model: ModelSource, n: usize, reps: usize, mu_grid: MuGrid, method: SelectionMethod },
    /// Probability of selecting exactly the true support, for the Lasso and
    /// for several replicate counts.
    CorrectPattern { model: ModelSource, n: usize, reps: usize, mu_grid: MuGrid, ms: Vec<usize> },
    /// Mean selection error of size-`r` selectors as `n` grows.
    MethodComparison {
        model: ModelSource,
        ns: Vec<usize>,
        reps: usize,
        replicates: usize,
        mu_grid: MuGrid,
        selectors: Vec<Selector>,
    },
    /// Repeated k-fold cross-validation of estimators.
    CvBenchmark { data: DataSource, methods: Vec<Estimator>, folds: usize, replications: usize },
}

/// A complete, reproducible description of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub seed: u64,
    #[serde(flatten)]
    pub kind: ExperimentKind,
}

impl ExperimentSpec {
    pub fn name(&self) -> &'static str {
        match self.kind {
            ExperimentKind::Synth { .. } => "synth",
            ExperimentKind::Kappa { .. } => "kappa",
            ExperimentKind::LassoPath { .. } => "lasso-path",
            ExperimentKind::Bolasso { .. } => "bolasso",
            ExperimentKind::SignFrequency { .. } => "freq",
            ExperimentKind::CorrectPattern { .. } => "pattern-prob",
            ExperimentKind::MethodComparison { .. } => "compare",
            ExperimentKind::CvBenchmark { .. } => "cv",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        match &self.kind {
            ExperimentKind::Synth { n, .. } if *n == 0 => bad("n must be at least 1".into()),
            ExperimentKind::SignFrequency { reps, .. }
            | ExperimentKind::CorrectPattern { reps, .. }
            | ExperimentKind::MethodComparison { reps, .. }
                if *reps == 0 =>
            {
                bad("reps must be at least 1".into())
            }
            ExperimentKind::CorrectPattern { ms, .. } if ms.is_empty() || ms.contains(&0) => {
                bad("replicate counts must be positive".into())
            }
            ExperimentKind::MethodComparison { ns, selectors, replicates, .. } => {
                if ns.is_empty() || ns.contains(&0) || selectors.is_empty() || *replicates == 0 {
                    bad("comparison needs sample sizes, selectors and replicates, all positive".into())
                } else {
                    Ok(())
                }
            }
            ExperimentKind::CvBenchmark { methods, folds, replications, .. } => {
                if methods.is_empty() || *folds < 2 || *replications == 0 {
                    bad("cv needs at least one method, folds >= 2 and replications >= 1".into())
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

fn real_columns(prefix: &str, names: &[String]) -> Vec<String> {
    names.iter().map(|c| format!("{prefix}{c}")).collect()
}

fn reals(v: &[f64]) -> Vec<Cell> {
    v.iter().map(|&x| Cell::Real(x)).collect()
}

fn variable_names(p: usize) -> Vec<String> {
    (0..p).map(|j| format!("x{j}")).collect()
}

fn model_summary(model: &PopulationModel, summary: &mut serde_json::Map<String, serde_json::Value>) {
    summary.insert("p".into(), model.p().into());
    summary.insert("support".into(), model.j_true().to_string().into());
    summary.insert("sigma".into(), model.sigma().into());
    summary.insert("population_mu_max".into(), model.mu_max().into());
    if let Ok(k) = consistency_kappa(model) {
        summary.insert("kappa".into(), k.into());
    }
}

/// Runs `spec` and returns its tables, files, plots and summary.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Artifacts> {
    spec.validate()?;
    let seed = spec.seed;
    let mut out = Artifacts::default();
    match &spec.kind {
        ExperimentKind::Synth { model, n } => {
            let model = model.resolve(seed)?;
            let problem = sample_dataset(&model, *n, &mut child_rng(seed, DATA_STREAM))?;
            let mut header = variable_names(model.p());
            header.push("y".into());
            let mut t = Table::new("data", header);
            for i in 0..problem.n() {
                let mut row = reals(problem.design().row(i));
                row.push(Cell::Real(problem.response()[i]));
                t.push(row);
            }
            out.tables.push(t);
            out.files.push(("model.json".into(), serde_json::to_string_pretty(&model)? + "\n"));
            model_summary(&model, &mut out.summary);
        }
        ExperimentKind::Kappa { model } => {
            let model = model.resolve(seed)?;
            let kappa = consistency_kappa(&model)?;
            let mut t = Table::new("kappa", vec!["kappa".into(), "consistent".into(), "p".into(), "support_size".into()]);
            t.push(vec![kappa.into(), (if kappa <= 1.0 { "true" } else { "false" }).into(), model.p().into(), model.j_true().len().into()]);
            out.tables.push(t);
            model_summary(&model, &mut out.summary);
        }
        ExperimentKind::LassoPath { data } => {
            let d = data.resolve(seed)?;
            let path = lars_lasso_path(&d.problem, usize::MAX)?;
            let mut header = vec!["knot".to_string(), "mu".into(), "active".into()];
            header.extend(real_columns("w_", &d.columns));
            let mut t = Table::new("path", header);
            for (k, knot) in path.knots().iter().enumerate() {
                let mut row = vec![k.into(), knot.mu.into(), knot.active.to_string().into()];
                row.extend(reals(&knot.weights));
                t.push(row);
            }
            out.tables.push(t);
            out.summary = d.summary;
            out.summary.insert("knots".into(), path.knots().len().into());
            out.summary.insert("mu_max".into(), path.mu_max().into());
        }
        ExperimentKind::Bolasso { data, replicates, mu_grid, soft_fraction } => {
            let d = data.resolve(seed)?;
            let config = BolassoConfig {
                replicates: *replicates,
                mu_grid: mu_grid.clone(),
                soft_fraction: *soft_fraction,
                seed: derive_seed(seed, RESAMPLE_STREAM),
                support_tol: 0.0,
            };
            let result = run_bolasso(&d.problem, &config)?;
            let mut supports = Table::new(
                "supports",
                vec!["mu".into(), "hard_size".into(), "soft_size".into(), "hard_support".into(), "soft_support".into()],
            );
            let with_mu = |name: &str, prefix: &str| {
                let mut h = vec!["mu".to_string()];
                h.extend(real_columns(prefix, &d.columns));
                Table::new(name, h)
            };
            let (mut freq, mut refit, mut soft_refit) =
                (with_mu("frequencies", "f_"), with_mu("refit", "w_"), with_mu("soft_refit", "w_"));
            for s in &result.per_mu {
                supports.push(vec![
                    s.mu.into(),
                    s.hard_support.len().into(),
                    s.soft_support.len().into(),
                    s.hard_support.to_string().into(),
                    s.soft_support.to_string().into(),
                ]);
                for (t, v) in [(&mut freq, &s.frequencies), (&mut refit, &s.refit_weights), (&mut soft_refit, &s.soft_refit_weights)] {
                    let mut row = vec![Cell::Real(s.mu)];
                    row.extend(reals(v));
                    t.push(row);
                }
            }
            out.plots.push((
                "frequencies".into(),
                LinePlot {
                    title: format!("Bootstrap selection frequencies (m = {replicates})"),
                    x_label: "mu".into(),
                    y_label: "frequency".into(),
                    log_x: true,
                    series: (0..d.problem.p())
                        .map(|j| Series {
                            label: d.columns[j].clone(),
                            points: result.per_mu.iter().map(|s| (s.mu, s.frequencies[j])).collect(),
                            dashed: false,
                        })
                        .collect(),
                }
                .to_svg(),
            ));
            out.tables.extend([supports, freq, refit, soft_refit]);
            out.summary = d.summary;
            out.summary.insert("replicates".into(), (*replicates).into());
        }
        ExperimentKind::SignFrequency { model, n, reps, mu_grid, method } => {
            let model = model.resolve(seed)?;
            let grid = mu_grid.resolve_for(model.mu_max(), *n)?;
            let run = run_selection(&model, *n, &grid, *reps, derive_seed(seed, REPS_STREAM), method)?;
            let table = run.frequency_table();
            let names = variable_names(model.p());
            let mut header = vec!["mu".to_string(), "mu0".into()];
            header.extend(names.iter().cloned());
            let (mut freq, mut odds) = (Table::new("frequencies", header.clone()), Table::new("log_odds", header));
            let root_n = (*n as f64).sqrt();
            for (g, &mu) in grid.iter().enumerate() {
                let f: Vec<f64> = (0..model.p()).map(|j| table.frequency(g, j)).collect();
                let mut row = vec![Cell::Real(mu), Cell::Real(mu * root_n)];
                row.extend(reals(&f));
                freq.push(row);
                let mut row = vec![Cell::Real(mu), Cell::Real(mu * root_n)];
                row.extend(f.iter().map(|&x| Cell::Real(log_odds(x, *reps))));
                odds.push(row);
            }
            out.plots.push((
                "log_odds".into(),
                LinePlot {
                    title: format!("Selection log-odds, n = {n}, {reps} replications"),
                    x_label: "mu".into(),
                    y_label: "log(f / (1 - f))".into(),
                    log_x: true,
                    series: (0..model.p())
                        .map(|j| Series {
                            label: names[j].clone(),
                            points: grid
                                .iter()
                                .enumerate()
                                .map(|(g, &mu)| (mu, log_odds(table.frequency(g, j), *reps)))
                                .collect(),
                            dashed: !model.j_true().contains(j),
                        })
                        .collect(),
                }
                .to_svg(),
            ));
            out.tables.extend([freq, odds]);
            model_summary(&model, &mut out.summary);
        }
        ExperimentKind::CorrectPattern { model, n, reps, mu_grid, ms } => {
            let model = model.resolve(seed)?;
            let grid = mu_grid.resolve_for(model.mu_max(), *n)?;
            let curves = pattern_probability_experiment(&model, *n, &grid, *reps, derive_seed(seed, REPS_STREAM), ms)?;
            let mut header = vec!["mu".to_string(), "lasso".into()];
            header.extend(ms.iter().map(|m| format!("bolasso_m{m}")));
            let mut t = Table::new("pattern_probability", header);
            for (g, &mu) in grid.iter().enumerate() {
                let mut row = vec![Cell::Real(mu), Cell::Real(curves.lasso[g])];
                row.extend(curves.bolasso.iter().map(|(_, c)| Cell::Real(c[g])));
                t.push(row);
            }
            let mut best = Table::new("best", vec!["method".into(), "m".into(), "best_probability".into(), "best_mu".into()]);
            let argmax = |c: &[f64]| (0..c.len()).fold(0, |b, g| if c[g] > c[b] { g } else { b });
            let g = argmax(&curves.lasso);
            best.push(vec!["lasso".into(), 1usize.into(), curves.lasso[g].into(), grid[g].into()]);
            for (m, c) in &curves.bolasso {
                let g = argmax(c);
                best.push(vec!["bolasso".into(), (*m).into(), c[g].into(), grid[g].into()]);
            }
            let mut series = vec![Series {
                label: "lasso".into(),
                points: grid.iter().copied().zip(curves.lasso.iter().copied()).collect(),
                dashed: true,
            }];
            series.extend(curves.bolasso.iter().map(|(m, c)| Series {
                label: format!("bolasso m={m}"),
                points: grid.iter().copied().zip(c.iter().copied()).collect(),
                dashed: false,
            }));
            out.plots.push((
                "pattern_probability".into(),
                LinePlot {
                    title: format!("Probability of selecting the true support, n = {n}"),
                    x_label: "mu".into(),
                    y_label: "P(correct support)".into(),
                    log_x: true,
                    series,
                }
                .to_svg(),
            ));
            out.tables.extend([t, best]);
            model_summary(&model, &mut out.summary);
        }
        ExperimentKind::MethodComparison { model, ns, reps, replicates, mu_grid, selectors } => {
            let model = model.resolve(seed)?;
            let r = model.j_true().len();
            let base = derive_seed(seed, REPS_STREAM);
            let cells: Vec<(usize, usize)> = (0..ns.len()).flat_map(|a| (0..*reps).map(move |k| (a, k))).collect();
            // errors[cell][selector]
            let errors = cells
                .par_iter()
                .map(|&(a, k)| {
                    let cell_seed = derive_seed(derive_seed(base, a as u64), k as u64);
                    let problem = sample_dataset(&model, ns[a], &mut child_rng(cell_seed, 0))?;
                    selectors
                        .iter()
                        .map(|s| {
                            let est = s
                                .select(&problem, r, mu_grid, *replicates, derive_seed(cell_seed, 1))
                                .context(|| format!("{} at n = {}, replication {k}", s.name(), ns[a]))?;
                            selection_error(&est, model.j_true(), model.p())
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            let mut header = vec!["n".to_string(), "log2_n".into()];
            header.extend(selectors.iter().map(|s| s.name().to_string()));
            let mut t = Table::new("selection_error", header);
            let mut curves = vec![Vec::new(); selectors.len()];
            for (a, &n) in ns.iter().enumerate() {
                let mut row = vec![Cell::from(n), Cell::Real((n as f64).log2())];
                for (s, curve) in curves.iter_mut().enumerate() {
                    let total: usize = (0..*reps).map(|k| errors[a * reps + k][s]).sum();
                    let mean = total as f64 / *reps as f64;
                    curve.push((n as f64, mean));
                    row.push(Cell::Real(mean));
                }
                t.push(row);
            }
            out.plots.push((
                "selection_error".into(),
                LinePlot {
                    title: format!("Mean selection error over {reps} replications"),
                    x_label: "n".into(),
                    y_label: "selection error".into(),
                    log_x: true,
                    series: selectors
                        .iter()
                        .zip(curves)
                        .map(|(s, points)| Series { label: s.name().into(), points, dashed: false })
                        .collect(),
                }
                .to_svg(),
            ));
            out.tables.push(t);
            model_summary(&model, &mut out.summary);
        }
        ExperimentKind::CvBenchmark { data, methods, folds, replications } => {
            let d = data.resolve(seed)?;
            let report = kfold_cv(&d.problem, methods, *folds, *replications, derive_seed(seed, RESAMPLE_STREAM))?;
            out.tables.extend(cv_tables(&report));
            out.plots.push(("cv_curves".into(), cv_plot(&report)));
            out.files.push(("cv_report.json".into(), serde_json::to_string_pretty(&report)? + "\n"));
            out.summary = d.summary;
            out.summary.insert("n".into(), d.problem.n().into());
            out.summary.insert("p".into(), d.problem.p().into());
            out.summary.insert("methods".into(), json!(methods.iter().map(CvMethod::name).collect::<Vec<_>>()));
        }
    }
    Ok(out)
}

fn cv_tables(report: &CvReport) -> [Table; 2] {
    let mut t = Table::new(
        "cv",
        vec![
            "method".into(),
            "parameter".into(),
            "best_index".into(),
            "mean_mse_x100".into(),
            "std_mse_x100".into(),
            "cells".into(),
        ],
    );
    let mut curves =
        Table::new("cv_curves", vec!["method".into(), "grid_index".into(), "parameter".into(), "mean_mse_x100".into()]);
    for m in &report.methods {
        t.push(vec![
            m.name.as_str().into(),
            m.parameter.into(),
            m.best_index.into(),
            m.mean_mse_x100.into(),
            m.std_mse_x100.into(),
            m.cell_mse_x100.len().into(),
        ]);
        for (g, (&param, &mse)) in m.grid.iter().zip(&m.mean_curve_x100).enumerate() {
            curves.push(vec![m.name.as_str().into(), g.into(), param.into(), mse.into()]);
        }
    }
    [t, curves]
}

fn cv_plot(report: &CvReport) -> String {
    LinePlot {
        title: format!("{}x{} cross-validation", report.replications, report.folds),
        x_label: "grid index (decreasing regularization)".into(),
        y_label: "mean held-out MSE x100".into(),
        log_x: false,
        series: report
            .methods
            .iter()
            .map(|m| Series {
                label: m.name.clone(),
                points: m.mean_curve_x100.iter().enumerate().map(|(g, &v)| (g as f64, v)).collect(),
                dashed: false,
            })
            .collect(),
    }
    .to_svg()
}
