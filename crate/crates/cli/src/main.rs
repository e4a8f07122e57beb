//! `nuindex` command-line interface.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use nuindex_core::datagen::{builtin_scenarios, catalog_toml, parse_catalog, sample_cohort_with, scenario_by_name, ScenarioSpec};
use nuindex_core::glm::{CvLoss, SelectionRule};
use nuindex_core::harness::{
    default_out_dir, format::sig6, read_coefficients, run_pipeline, run_study, write_coefficients, write_curves,
    write_cv_profile, write_study, Arms, ScoreTable, StudyConfig, OUT_DIR_ENV,
};
use nuindex_core::index::score;
use nuindex_core::metrics::{auc, aucpr, cv_threshold_curve, wilcoxon_statistic};
use nuindex_core::pipeline::{fit_index, PipelineConfig, Weighting};
use nuindex_core::rng::{stream, stream_id};
use nuindex_core::theory::{
    interior_grid, magnitude_relation, MagnitudeRelation, null_attenuation_region, or_closed_form, or_curve, phi_threshold,
    region_grid, theta_x, ConfounderDesign, TheoryPoint,
};
use nuindex_core::Cohort;

#[derive(Parser)]
#[command(name = "nuindex", version, about = "Symptom indices from negative-unlabeled data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a cohort from a scenario and write it as CSV.
    #[command(alias = "datagen")]
    Simulate(SimulateArgs),
    /// Print the built-in scenario catalog as TOML.
    Scenarios,
    /// Run a replicated simulation study.
    Study(StudyArgs),
    /// Fit the cross-validated lasso on a cohort CSV.
    Fit(FitArgs),
    /// Score a cohort with a coefficients CSV.
    Index(IndexArgs),
    /// Discrimination metrics of a scores CSV.
    Metrics(MetricsArgs),
    /// Cross-validated threshold curves of the index and the symptom count.
    Curve(CurveArgs),
    /// Closed-form odds ratios and related theory quantities.
    Theory(TheoryArgs),
    /// Fit, score and compute curves in one run, with a manifest.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct OutDir {
    /// Output directory [default: $NUINDEX_OUT_DIR or ./nuindex-out]
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl OutDir {
    fn resolve(&self) -> Result<PathBuf> {
        let dir = self.out_dir.clone().unwrap_or_else(default_out_dir);
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(dir)
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario name (see `nuindex scenarios`).
    #[arg(long)]
    scenario: String,
    /// TOML catalog to look the scenario up in instead of the built-ins.
    #[arg(long)]
    catalog: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Master seed [default: the scenario's seed].
    #[arg(long)]
    seed: Option<u64>,
    /// Replicate number; selects the random stream.
    #[arg(long, default_value_t = 0)]
    replicate: u64,
    /// Output file [default: <out-dir>/<scenario>.csv]
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    dir: OutDir,
}

#[derive(Args)]
struct StudyArgs {
    /// Study config (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario to include; repeatable; replaces the config's list.
    #[arg(long = "scenario")]
    scenarios: Vec<String>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    master_seed: Option<u64>,
    /// unadjusted, balancing or both.
    #[arg(long)]
    arms: Option<Arms>,
    /// Worker threads (0 = one per core).
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    dir: OutDir,
}

/// Fitting options shared by `fit`, `curve` and `pipeline`. Flags override
/// the `--config` file.
#[derive(Args)]
struct FitOptionsArgs {
    /// Pipeline config (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// auto, on or off.
    #[arg(long)]
    weighting: Option<Weighting>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    n_lambda: Option<usize>,
    #[arg(long)]
    min_ratio: Option<f64>,
    /// min or one_se.
    #[arg(long)]
    rule: Option<SelectionRule>,
    /// deviance or misclassification.
    #[arg(long)]
    loss: Option<CvLoss>,
    /// Seed of the fold assignment.
    #[arg(long)]
    seed: Option<u64>,
    /// Fit at this penalty instead of cross-validating.
    #[arg(long)]
    lambda: Option<f64>,
    /// Folds of the cross-validation behind the threshold curves.
    #[arg(long)]
    curve_folds: Option<usize>,
}

impl FitOptionsArgs {
    fn resolve(&self) -> Result<PipelineConfig> {
        let mut c = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => PipelineConfig::default(),
        };
        if let Some(v) = self.weighting {
            c.weighting = v;
        }
        if let Some(v) = self.folds {
            c.cv.folds = v;
        }
        if let Some(v) = self.n_lambda {
            c.cv.n_lambda = v;
        }
        if let Some(v) = self.min_ratio {
            c.cv.min_ratio = v;
        }
        if let Some(v) = self.rule {
            c.cv.rule = v;
        }
        if let Some(v) = self.loss {
            c.cv.loss = v;
        }
        if let Some(v) = self.seed {
            c.cv.seed = v;
        }
        if self.lambda.is_some() {
            c.fixed_lambda = self.lambda;
        }
        if let Some(v) = self.curve_folds {
            c.curve_folds = v;
        }
        Ok(c)
    }
}

#[derive(Args)]
struct FitArgs {
    /// Cohort CSV.
    #[arg(long)]
    cohort: PathBuf,
    #[command(flatten)]
    options: FitOptionsArgs,
    #[command(flatten)]
    dir: OutDir,
}

#[derive(Args)]
struct IndexArgs {
    /// Coefficients CSV written by `fit`.
    #[arg(long)]
    coefficients: PathBuf,
    #[arg(long)]
    cohort: PathBuf,
    /// Output file [default: <out-dir>/scores.csv]
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    dir: OutDir,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Label {
    /// `y_latent` when present, otherwise `infected`.
    Auto,
    Infected,
    YLatent,
}

#[derive(Args)]
struct MetricsArgs {
    /// Scores CSV written by `index` or `pipeline`.
    #[arg(long)]
    scores: PathBuf,
    #[arg(long, value_enum, default_value_t = Label::Auto)]
    label: Label,
    /// Output file [default: <out-dir>/metrics.csv]
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    dir: OutDir,
}

#[derive(Args)]
struct CurveArgs {
    #[arg(long)]
    cohort: PathBuf,
    #[command(flatten)]
    options: FitOptionsArgs,
    /// Output file [default: <out-dir>/curve.csv]
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    dir: OutDir,
}

#[derive(Args)]
struct TheoryArgs {
    #[command(subcommand)]
    mode: TheoryMode,
}

#[derive(Subcommand)]
enum TheoryMode {
    /// Odds ratio and intermediate quantities at one parameter point.
    Point {
        #[arg(long, default_value_t = 0.8)]
        alpha: f64,
        #[arg(long)]
        pi: f64,
        #[arg(long)]
        beta0: f64,
        #[arg(long)]
        beta1: f64,
    },
    /// Odds ratios over a risk-ratio grid, optionally under a binary confounder.
    Curve {
        #[arg(long, default_value_t = 0.8)]
        alpha: f64,
        #[arg(long)]
        pi: f64,
        #[arg(long)]
        beta0: f64,
        #[arg(long, default_value_t = 0.5)]
        pz: f64,
        #[arg(long, default_value_t = 1.0)]
        rr_az: f64,
        #[arg(long, default_value_t = 1.0)]
        rr_xz: f64,
        /// Largest risk ratio on the grid [default: 1/beta0].
        #[arg(long)]
        beta1_max: Option<f64>,
        #[arg(long, default_value_t = 50)]
        steps: usize,
    },
    /// Where the odds ratio is attenuated toward the null for every effect.
    Region {
        #[arg(long, default_value_t = 99)]
        steps: usize,
    },
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    cohort: PathBuf,
    #[command(flatten)]
    options: FitOptionsArgs,
    #[command(flatten)]
    dir: OutDir,
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let mut spec: ScenarioSpec = match &args.catalog {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_catalog(&text)?
                .into_iter()
                .find(|s| s.name == args.scenario)
                .with_context(|| format!("scenario `{}` not in {}", args.scenario, path.display()))?
        }
        None => scenario_by_name(&args.scenario)?,
    };
    if let Some(n) = args.n {
        spec.n = n;
    }
    let seed = args.seed.unwrap_or(spec.seed);
    let mut rng = stream(seed, stream_id(&spec.name, args.replicate));
    let cohort = sample_cohort_with(&spec, &mut rng)?;
    let out = match &args.out {
        Some(p) => p.clone(),
        None => args.dir.resolve()?.join(format!("{}.csv", spec.name)),
    };
    cohort.write_csv(&out)?;
    log::info!("wrote {} individuals to {}", cohort.len(), out.display());
    println!("{}", out.display());
    Ok(())
}

fn study(args: &StudyArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => StudyConfig::read(path)?,
        None => StudyConfig::default(),
    };
    if !args.scenarios.is_empty() {
        config.scenarios = args.scenarios.clone();
        config.inline.clear();
    }
    if config.scenarios.is_empty() && config.inline.is_empty() {
        config.scenarios = builtin_scenarios().into_iter().map(|s| s.name).collect();
    }
    if let Some(v) = args.replicates {
        config.replicates = v;
    }
    if args.n.is_some() {
        config.n = args.n;
    }
    if let Some(v) = args.master_seed {
        config.master_seed = v;
    }
    if let Some(v) = args.arms {
        config.arms = v;
    }
    if let Some(v) = args.workers {
        config.workers = v;
    }
    let dir = match (&args.dir.out_dir, &config.out_dir) {
        (None, Some(d)) => {
            std::fs::create_dir_all(d)?;
            d.clone()
        }
        _ => args.dir.resolve()?,
    };
    let result = run_study(&config)?;
    for path in write_study(&result, &dir)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn fit(args: &FitArgs) -> Result<()> {
    let config = args.options.resolve()?;
    let cohort = Cohort::read_csv(&args.cohort)?;
    let fitted = fit_index(&cohort, &config)?;
    let dir = args.dir.resolve()?;
    let coefficients = dir.join("coefficients.csv");
    write_coefficients(&coefficients, &cohort.feature_names, &fitted.model)?;
    println!("{}", coefficients.display());
    if let Some(fit) = &fitted.fit {
        let profile = dir.join("cv_profile.csv");
        write_cv_profile(&profile, fit)?;
        println!("{}", profile.display());
    }
    let negative = fitted.model.negative_features();
    if !negative.is_empty() {
        let names: Vec<&str> = negative.iter().map(|&j| cohort.feature_names[j].as_str()).collect();
        log::warn!("negative index weights for {}", names.join(", "));
    }
    Ok(())
}

fn index(args: &IndexArgs) -> Result<()> {
    let (names, model) = read_coefficients(&args.coefficients)?;
    let cohort = Cohort::read_csv(&args.cohort)?;
    if names != cohort.feature_names {
        bail!(
            "coefficients list features [{}] but the cohort has [{}]",
            names.join(", "),
            cohort.feature_names.join(", ")
        );
    }
    let scores = score(&model, &cohort.features)?;
    let out = match &args.out {
        Some(p) => p.clone(),
        None => args.dir.resolve()?.join("scores.csv"),
    };
    ScoreTable::new(&cohort, scores).write(&out)?;
    println!("{}", out.display());
    Ok(())
}

fn metrics(args: &MetricsArgs) -> Result<()> {
    let table = ScoreTable::read(&args.scores)?;
    let (label_name, labels) = match (args.label, &table.latent) {
        (Label::Auto | Label::YLatent, Some(l)) => ("y_latent", l.clone()),
        (Label::YLatent, None) => bail!("{} has no y_latent column", args.scores.display()),
        (Label::Auto | Label::Infected, _) => ("infected", table.infected.clone()),
    };
    let out = match &args.out {
        Some(p) => p.clone(),
        None => args.dir.resolve()?.join("metrics.csv"),
    };
    let mut w = csv_writer(&out)?;
    w.write_record(["scorer", "label", "auc", "aucpr", "wilcoxon_u", "wilcoxon_z"])?;
    for (scorer, values) in [("index", &table.index), ("symptom_count", &table.symptom_count)] {
        let s: Vec<f64> = values.iter().map(|&v| v as f64).collect();
        let wx = wilcoxon_statistic(&s, &labels)?;
        w.write_record([
            scorer.to_string(),
            label_name.to_string(),
            sig6(auc(&s, &labels)?),
            sig6(aucpr(&s, &labels)?),
            sig6(wx.u),
            sig6(wx.z),
        ])?;
    }
    w.flush()?;
    println!("{}", out.display());
    Ok(())
}

fn curve(args: &CurveArgs) -> Result<()> {
    let config = args.options.resolve()?;
    let cohort = Cohort::read_csv(&args.cohort)?;
    let curves = cv_threshold_curve(&cohort, config.curve_folds, &config)?;
    let out = match &args.out {
        Some(p) => p.clone(),
        None => args.dir.resolve()?.join("curve.csv"),
    };
    write_curves(&out, &curves)?;
    println!("{}", out.display());
    Ok(())
}

fn theory(args: &TheoryArgs) -> Result<()> {
    let stdout = std::io::stdout();
    let mut w = csv::Writer::from_writer(stdout.lock());
    match args.mode {
        TheoryMode::Point { alpha, pi, beta0, beta1 } => {
            let pt = TheoryPoint::new(alpha, pi, beta0, beta1)?;
            w.write_record([
                "alpha", "pi", "beta0", "beta1", "or", "theta1", "theta0", "phi", "relation", "null_attenuation",
            ])?;
            w.write_record([
                sig6(alpha),
                sig6(pi),
                sig6(beta0),
                sig6(beta1),
                sig6(or_closed_form(&pt)),
                sig6(theta_x(&pt, alpha, true)?),
                sig6(theta_x(&pt, alpha, false)?),
                sig6(phi_threshold(pi, beta0)?),
                match magnitude_relation(&pt) {
                    MagnitudeRelation::OrFarther => "or_farther",
                    MagnitudeRelation::Equal => "equal",
                    MagnitudeRelation::OrCloser => "or_closer",
                }
                .to_string(),
                null_attenuation_region(pi, beta0)?.to_string(),
            ])?;
        }
        TheoryMode::Curve { alpha, pi, beta0, pz, rr_az, rr_xz, beta1_max, steps } => {
            let design = ConfounderDesign { pz, rr_az, rr_xz };
            let hi = beta1_max.unwrap_or(1.0 / beta0);
            let grid = interior_grid(0.0, hi, steps);
            w.write_record(["beta1", "or_unconfounded", "or_unadjusted", "or_weighted"])?;
            let points = or_curve(alpha, pi, beta0, &design, &grid)?;
            if points.is_empty() {
                log::warn!("every grid point is infeasible under the confounder design");
            }
            for p in points {
                w.write_record([p.beta1, p.or_unconfounded, p.or_unadjusted, p.or_weighted].map(sig6))?;
            }
        }
        TheoryMode::Region { steps } => {
            w.write_record(["pi", "beta0", "null_attenuation"])?;
            for p in region_grid(steps) {
                w.write_record([sig6(p.pi), sig6(p.beta0), p.in_region.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn pipeline(args: &PipelineArgs) -> Result<()> {
    let config = args.options.resolve()?;
    let dir = args.dir.resolve()?;
    let artifacts = run_pipeline(&args.cohort, &config, &dir)?;
    let mut out = std::io::stdout().lock();
    for path in [Some(&artifacts.coefficients), artifacts.cv_profile.as_ref(), Some(&artifacts.scores), Some(&artifacts.curve), Some(&artifacts.manifest)]
        .into_iter()
        .flatten()
    {
        writeln!(out, "{}", path.display())?;
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    log::debug!("default output directory from ${OUT_DIR_ENV}: {}", default_out_dir().display());
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Scenarios => {
            print!("{}", catalog_toml(&builtin_scenarios()));
            Ok(())
        }
        Command::Study(a) => study(a),
        Command::Fit(a) => fit(a),
        Command::Index(a) => index(a),
        Command::Metrics(a) => metrics(a),
        Command::Curve(a) => curve(a),
        Command::Theory(a) => theory(a),
        Command::Pipeline(a) => pipeline(a),
    }
}
