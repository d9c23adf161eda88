//! Acceptance checks. Prints one `PASS`/`FAIL` line per check and exits
//! nonzero if any fails. Pass check names as arguments to run a subset.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use bolasso::harness::cv::{kfold_cv, CvReport, Estimator};
use bolasso::lasso::{coordinate_descent, kkt_residual, lars_lasso_path, soft_threshold, support_of};
use bolasso::numerics::Matrix;
use bolasso::population::{
    consistency_kappa, find_model_with_kappa, generate_population, pattern_probability_experiment, sample_dataset,
    sign_frequency_experiment, PopulationModel, SelectionMethod,
};
use bolasso::rng::{child_rng, derive_seed, rng_from_seed};
use common::{correlated_problem, kappa_oracle, mu_grid, orthonormal_problem, random_instance};
use rand::Rng;

type Outcome = Result<String, String>;
/// κ, Lasso curve, best probability per `m` and elapsed time.
type Curves = Result<(f64, Vec<f64>, Vec<(usize, f64)>, Duration), String>;

fn within(start: Instant, limit: Duration, detail: String) -> Outcome {
    let t = start.elapsed();
    if t <= limit {
        Ok(format!("{detail}; {:.1}s", t.as_secs_f64()))
    } else {
        Err(format!("{detail}; took {:.1}s, limit {}s", t.as_secs_f64(), limit.as_secs()))
    }
}

fn kkt_on_random_instances() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    for seed in 0..200 {
        let problem = random_instance(seed);
        let path = lars_lasso_path(&problem, usize::MAX).map_err(|e| format!("instance {seed}: {e}"))?;
        let knots = path.knots();
        let mut points: Vec<(f64, Vec<f64>)> = Vec::new();
        for (k, knot) in knots.iter().enumerate() {
            if knot.mu > 0.0 {
                points.push((knot.mu, knot.weights.clone()));
            }
            if let Some(next) = knots.get(k + 1) {
                let mid = 0.5 * (knot.mu + next.mu);
                points.push((mid, path.at(mid)));
            }
        }
        for mu in mu_grid(&problem) {
            let cd = coordinate_descent(&problem, mu, 1e-13, 1_000_000).map_err(|e| format!("instance {seed}: {e}"))?;
            points.push((mu, cd));
        }
        for (mu, w) in points {
            let r = kkt_residual(&problem, mu, &w);
            worst = worst.max(r);
            checked += 1;
            if !(r <= 1e-8) {
                return Err(format!("instance {seed} at mu {mu:e}: residual {r:e}"));
            }
        }
    }
    within(start, Duration::from_secs(60), format!("{checked} points, worst residual {worst:.2e}"))
}

fn path_agrees_with_coordinate_descent() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..200 {
        let problem = random_instance(seed);
        let path = lars_lasso_path(&problem, usize::MAX).map_err(|e| e.to_string())?;
        for mu in mu_grid(&problem) {
            let cd = coordinate_descent(&problem, mu, 1e-13, 1_000_000).map_err(|e| e.to_string())?;
            let diff = path.at(mu).iter().zip(&cd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            worst = worst.max(diff);
        }
    }
    if worst > 1e-6 {
        return Err(format!("max |lars - cd| = {worst:e}"));
    }
    let mut rng = rng_from_seed(5);
    let mut worst_soft: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.gen_range(10..100);
        let p = rng.gen_range(1..=n.min(20));
        let problem = orthonormal_problem(&mut rng, n, p);
        let z = problem.moments().corr;
        let path = lars_lasso_path(&problem, usize::MAX).map_err(|e| e.to_string())?;
        for mu in mu_grid(&problem) {
            let w = path.at(mu);
            for j in 0..p {
                worst_soft = worst_soft.max((w[j] - soft_threshold(z[j], mu)).abs());
            }
        }
    }
    if worst_soft > 1e-8 {
        return Err(format!("orthonormal designs: max deviation from soft-thresholding {worst_soft:e}"));
    }
    Ok(format!("max |lars - cd| {worst:.2e}, orthonormal deviation {worst_soft:.2e}"))
}

fn zero_above_mu_max_full_below() -> Outcome {
    for seed in 0..200 {
        let problem = random_instance(seed);
        let path = lars_lasso_path(&problem, usize::MAX).map_err(|e| e.to_string())?;
        for factor in [1.0, 1.0 + 1e-9, 2.0, 1e3] {
            let mu = problem.mu_max() * factor;
            if path.at(mu).iter().any(|&v| v != 0.0) {
                return Err(format!("instance {seed}: nonzero estimate at mu_max x {factor}"));
            }
            let cd = coordinate_descent(&problem, mu, 1e-13, 1000).map_err(|e| e.to_string())?;
            if cd.iter().any(|&v| v != 0.0) {
                return Err(format!("instance {seed}: coordinate descent nonzero at mu_max x {factor}"));
            }
        }
    }
    let mut full = 0;
    for run in 0..64 {
        let mut rng = child_rng(3, run);
        let p = rng.gen_range(2..=20);
        let problem = correlated_problem(&mut rng, 1000, p);
        let path = lars_lasso_path(&problem, usize::MAX).map_err(|e| e.to_string())?;
        if support_of(&path.at(problem.mu_max() * 1e-6), 0.0).len() == p {
            full += 1;
        }
    }
    if full * 100 >= 95 * 64 {
        Ok(format!("exact zeros on 200 instances; full support in {full}/64 runs"))
    } else {
        Err(format!("full support in only {full}/64 runs"))
    }
}

/// Mid-range `μ₀` chosen on a pilot run: all relevant variables always
/// selected and the most irrelevant frequencies strictly inside (0.05, 0.95).
fn consistent_model_frequencies() -> Outcome {
    let start = Instant::now();
    let model = find_model_with_kappa(16, 8, true, &mut rng_from_seed(0), 10_000).map_err(|e| e.to_string())?;
    let kappa = consistency_kappa(&model).map_err(|e| e.to_string())?;
    let n = 1000;
    let root_n = (n as f64).sqrt();
    let mu0: Vec<f64> = (0..24).map(|k| 10f64.powf(0.5 - k as f64 * 0.125)).collect();
    let grid: Vec<f64> = mu0.iter().map(|m| m / root_n).collect();
    let irrelevant_mixed = |f: &dyn Fn(usize) -> f64| (8..16).filter(|&j| (0.05..=0.95).contains(&f(j))).count();

    let pilot = sign_frequency_experiment(&model, n, &grid, 64, 1, &SelectionMethod::Lasso).map_err(|e| e.to_string())?;
    let best = (0..grid.len())
        .filter(|&g| (0..8).all(|j| pilot.frequency(g, j) == 1.0))
        .max_by_key(|&g| (irrelevant_mixed(&|j| pilot.frequency(g, j)), std::cmp::Reverse(g)))
        .ok_or("no pilot grid point selects every relevant variable")?;

    let table = sign_frequency_experiment(&model, n, &grid[best..=best], 256, 2, &SelectionMethod::Lasso)
        .map_err(|e| e.to_string())?;
    let min_relevant = (0..8).map(|j| table.frequency(0, j)).fold(1.0, f64::min);
    let mixed = irrelevant_mixed(&|j| table.frequency(0, j));
    let detail = format!("kappa {kappa:.3}, mu0 {:.4}: min relevant {min_relevant:.3}, {mixed} irrelevant in [0.05, 0.95]", mu0[best]);
    if min_relevant >= 0.99 && mixed >= 1 {
        within(start, Duration::from_secs(300), detail)
    } else {
        Err(detail)
    }
}

fn inconsistent_model() -> Result<(PopulationModel, Vec<f64>), String> {
    let model = find_model_with_kappa(16, 8, false, &mut rng_from_seed(0), 10_000).map_err(|e| e.to_string())?;
    let grid = model.mu_grid(64, 1e-3).map_err(|e| e.to_string())?;
    Ok((model, grid))
}

/// Shared by the recovery and monotonicity checks.
fn pattern_curves() -> Curves {
    let start = Instant::now();
    let (model, grid) = inconsistent_model()?;
    let kappa = consistency_kappa(&model).map_err(|e| e.to_string())?;
    let ms: Vec<usize> = (1..=8).map(|k| 1 << k).collect();
    let curves = pattern_probability_experiment(&model, 1000, &grid, 64, 100, &ms).map_err(|e| e.to_string())?;
    Ok((kappa, curves.lasso.clone(), curves.best_bolasso(), start.elapsed()))
}

fn inconsistent_recovery(curves: &Curves) -> Outcome {
    let (kappa, lasso, best, elapsed) = curves.as_ref().map_err(Clone::clone)?;
    let worst_lasso = lasso.iter().copied().fold(0.0, f64::max);
    let m128 = best.iter().find(|(m, _)| *m == 128).map(|b| b.1).ok_or("m = 128 missing")?;
    let detail = format!("kappa {kappa:.3}: lasso max {worst_lasso:.3}, bolasso m=128 best {m128:.3}; {:.1}s", elapsed.as_secs_f64());
    if worst_lasso < 0.05 && m128 >= 0.9 && *elapsed <= Duration::from_secs(900) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn monotone_in_replicates(curves: &Curves) -> Outcome {
    let (_, _, best, _) = curves.as_ref().map_err(Clone::clone)?;
    let inversions: Vec<f64> = best.windows(2).map(|w| w[0].1 - w[1].1).filter(|&d| d > 0.0).collect();
    let listing: Vec<String> = best.iter().map(|(m, p)| format!("{m}:{p:.3}")).collect();
    let detail = format!("best probabilities {}", listing.join(" "));
    if inversions.len() <= 1 && inversions.iter().all(|&d| d <= 0.03) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn kappa_matches_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let mut rng = child_rng(7, k);
        let p = rng.gen_range(3..=20);
        let r = rng.gen_range(1..p);
        let model = generate_population(p, r, &mut rng).map_err(|e| e.to_string())?;
        let kappa = consistency_kappa(&model).map_err(|e| e.to_string())?;
        let oracle = kappa_oracle(model.q(), model.w_true());
        worst = worst.max((kappa - oracle).abs());
    }
    if worst > 1e-10 {
        return Err(format!("max |kappa - oracle| {worst:e}"));
    }
    for p in [2, 5, 16] {
        let w: Vec<f64> = (0..p).map(|j| if j < p / 2 { 0.5 } else { 0.0 }).collect();
        let model = PopulationModel::new(Matrix::identity(p), w, 0.1).map_err(|e| e.to_string())?;
        let kappa = consistency_kappa(&model).map_err(|e| e.to_string())?;
        if kappa != 0.0 {
            return Err(format!("identity covariance, p = {p}: kappa {kappa:e}"));
        }
    }
    Ok(format!("max |kappa - oracle| {worst:.2e}; identity gives 0"))
}

fn bolasso_cv_beats_lasso() -> Outcome {
    let mut wins = 0;
    let mut ratios = Vec::new();
    for k in 0..20u64 {
        let mut rng = child_rng(8, k);
        let model = generate_population(32, 8, &mut rng).map_err(|e| e.to_string())?;
        let data = sample_dataset(&model, 64, &mut rng).map_err(|e| e.to_string())?;
        let methods = [Estimator::Lasso, Estimator::Bolasso { replicates: 128 }];
        let report = kfold_cv(&data, &methods, 10, 10, derive_seed(8, 1000 + k)).map_err(|e| e.to_string())?;
        let (lasso, bolasso) = (report.methods[0].mean_mse_x100, report.methods[1].mean_mse_x100);
        if bolasso <= lasso {
            wins += 1;
        }
        ratios.push(bolasso / lasso);
    }
    ratios.sort_by(f64::total_cmp);
    let detail = format!("bolasso <= lasso on {wins}/20 models, median MSE ratio {:.3}", ratios[10]);
    if wins * 100 >= 70 * 20 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bolasso"))
}

fn run_cli(args: &[&str], out: &Path) -> Result<(), String> {
    let status = bin()
        .args(args)
        .arg("--out")
        .arg(out)
        .arg("--plot")
        .stderr(std::process::Stdio::null())
        .status()
        .map_err(|e| e.to_string())?;
    if status.success() {
        Ok(())
    } else {
        Err(format!("`{}` exited with {status}", args.join(" ")))
    }
}

/// A messy but well-formed CSV: quoted header, missing cells, a constant
/// column, the response in the middle.
fn write_messy_csv(path: &Path, rows: usize, seed: u64) -> std::io::Result<()> {
    let mut rng = rng_from_seed(seed);
    let mut text = String::from("\"a\",b,response,const,c,d\n");
    for i in 0..rows {
        let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let y = 2.0 * x[0] - x[2] + rng.gen_range(-0.5..0.5);
        let b = if i % 17 == 5 { "NA".to_string() } else { x[1].to_string() };
        text.push_str(&format!("{},{b},{y},7,{},{}\n", x[0], x[2], x[3]));
    }
    std::fs::write(path, text)
}

fn cv_pipeline_on_csv() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut notes = Vec::new();
    for (k, rows) in [40usize, 97, 150].into_iter().enumerate() {
        let csv = dir.path().join(format!("in{k}.csv"));
        write_messy_csv(&csv, rows, k as u64).map_err(|e| e.to_string())?;
        let out = dir.path().join(format!("out{k}"));
        let csv_arg = csv.to_string_lossy().to_string();
        run_cli(
            &["cv", "--data", &csv_arg, "--target", "response", "--folds", "5", "--reps", "2", "--m", "16"],
            &out,
        )?;
        let report: CvReport = serde_json::from_str(
            &std::fs::read_to_string(out.join("cv_report.json")).map_err(|e| e.to_string())?,
        )
        .map_err(|e| format!("cv_report.json: {e}"))?;
        let manifest: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(out.join("manifest.json")).map_err(|e| e.to_string())?,
        )
        .map_err(|e| format!("manifest.json: {e}"))?;
        if report.methods.len() != 5 || report.methods.iter().any(|m| !m.mean_mse_x100.is_finite()) {
            return Err(format!("{rows} rows: malformed report"));
        }
        if manifest["command"] != "cv" || !out.join("cv.csv").exists() {
            return Err(format!("{rows} rows: manifest or table missing"));
        }
        notes.push(format!("{}x{} ok", report.n, report.methods.len()));
    }
    Ok(notes.join(", "))
}

fn files_in(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().to_string(), std::fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

fn cli_is_reproducible() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let csv = dir.path().join("data.csv");
    write_messy_csv(&csv, 60, 4).map_err(|e| e.to_string())?;
    let csv_arg = csv.to_string_lossy().to_string();
    let model = ["--p", "8", "--r", "3"];
    let with = |head: &[&str], tail: &[&str]| -> Vec<String> {
        head.iter().chain(tail).map(|s| s.to_string()).collect()
    };
    let commands: Vec<Vec<String>> = vec![
        with(&["synth", "--n", "40"], &model),
        with(&["kappa", "--consistency", "inconsistent"], &model),
        with(&["lasso-path", "--n", "60"], &model),
        with(&["bolasso", "--data", &csv_arg, "--target", "response", "--m", "16"], &[]),
        with(&["freq", "--n", "80", "--reps", "6", "--method", "bolasso-s", "--m", "8", "--mu-grid", "10,1e-2"], &model),
        with(&["pattern-prob", "--n", "80", "--reps", "6", "--m", "8", "--mu-grid", "10,1e-2"], &model),
        with(&["compare", "--ns", "20,40", "--reps", "3", "--m", "8", "--mu-grid", "10,1e-2"], &model),
        with(&["cv", "--data", &csv_arg, "--target", "2", "--folds", "3", "--reps", "2", "--m", "8"], &[]),
    ];
    for args in &commands {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let mut outputs = Vec::new();
        for attempt in 0..2 {
            let out = dir.path().join(format!("{}-{attempt}", args[0]));
            run_cli(&[&args[..], &["--seed", "11"]].concat(), &out)?;
            outputs.push(files_in(&out));
        }
        if outputs[0].is_empty() || outputs[0] != outputs[1] {
            return Err(format!("{}: outputs differ between identical runs", args[0]));
        }
        let stdout: Vec<Vec<u8>> = (0..2)
            .map(|_| bin().args(&args).args(["--seed", "11"]).output().map(|o| o.stdout).unwrap_or_default())
            .collect();
        if stdout[0].is_empty() || stdout[0] != stdout[1] {
            return Err(format!("{}: stdout differs between identical runs", args[0]));
        }
    }
    Ok(format!("{} commands byte-identical on re-run", commands.len()))
}

fn main() {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let selected = |name: &str| filters.is_empty() || filters.iter().any(|f| name.contains(f.as_str()));
    let mut failures = 0;
    let mut report = |name: &str, outcome: Outcome| match outcome {
        Ok(detail) => println!("PASS {name}: {detail}"),
        Err(detail) => {
            failures += 1;
            println!("FAIL {name}: {detail}");
        }
    };
    type Check = (&'static str, fn() -> Outcome);
    let checks: [Check; 6] = [
        ("kkt-residual", kkt_on_random_instances),
        ("lars-vs-cd", path_agrees_with_coordinate_descent),
        ("mu-max-boundary", zero_above_mu_max_full_below),
        ("consistent-frequencies", consistent_model_frequencies),
        ("kappa-oracle", kappa_matches_oracle),
        ("cv-beats-lasso", bolasso_cv_beats_lasso),
    ];
    for (name, check) in checks {
        if selected(name) {
            report(name, check());
        }
    }
    if selected("inconsistent-recovery") || selected("monotone-in-m") {
        let curves = pattern_curves();
        if selected("inconsistent-recovery") {
            report("inconsistent-recovery", inconsistent_recovery(&curves));
        }
        if selected("monotone-in-m") {
            report("monotone-in-m", monotone_in_replicates(&curves));
        }
    }
    if selected("cv-pipeline") {
        report("cv-pipeline", cv_pipeline_on_csv());
    }
    if selected("cli-reproducible") {
        report("cli-reproducible", cli_is_reproducible());
    }
    if failures > 0 {
        println!("{failures} acceptance check(s) failed");
        std::process::exit(1);
    }
}
