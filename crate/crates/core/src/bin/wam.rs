use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use wam::config::RunConfig;
use wam::evaluation::{self, EvalConfig, Model};
use wam::kernel::{self, ParamSet, TaggedParams};
use wam::physics::{min_horizon, BrakingQuery};
use wam::predictor::{self, constant_velocity_predict};
use wam::synth::{self, Scenario, SynthConfig};
use wam::training::{self, GridSearchConfig};
use wam::trajectory_data::{self as td, Category, Corpus, FilterConfig};
use wam::{DisplacementDatabase, Error, Result, RoadUserState, SimilarityParams, TrafficSituationState, Vec2};

#[derive(Parser)]
#[command(
    name = "wam",
    version,
    about = "Similarity-weighted displacement prediction for road users"
)]
struct Cli {
    /// key = value configuration file; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Raise log verbosity (-v info, -vv debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest, downsample, derive orientations and filter outliers
    Preprocess(PreprocessArgs),
    /// Split a corpus into train and test by whole recordings
    Split(SplitArgs),
    /// Learn kernel parameters per category and location by cross-validation
    Fit(FitArgs),
    /// Build displacement databases, one per category and location
    BuildDb(BuildDbArgs),
    /// Predict one query state
    Predict(PredictArgs),
    /// Score the kernel model and constant velocity on a test corpus
    Evaluate(EvaluateArgs),
    /// Minimum prediction horizon for emergency braking
    Hmin(HminArgs),
    /// Generate a synthetic scenario corpus
    Synth(SynthArgs),
}

#[derive(Args)]
struct PreprocessArgs {
    /// Directory of InD-style *_tracks.csv tables
    #[arg(long, conflicts_with = "corpus", required_unless_present = "corpus")]
    input_dir: Option<PathBuf>,
    /// Corpus file instead of raw tables
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long, short)]
    output: PathBuf,
    /// Target sample period in seconds
    #[arg(long)]
    sample_period: Option<f64>,
    /// Location ids to drop, comma separated
    #[arg(long, value_delimiter = ',')]
    exclude_locations: Vec<i64>,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long)]
    target_fraction: Option<f64>,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Parameter file to write
    #[arg(long, short)]
    output: PathBuf,
    /// CSV trace of every evaluated grid point
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    refinement_rounds: Option<usize>,
    #[arg(long)]
    train_horizon: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    grid_a: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    grid_b: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    grid_c_orient: Option<Vec<f64>>,
    /// Other-vehicle weight written into every block
    #[arg(long)]
    interaction_d: Option<f64>,
}

#[derive(Args)]
struct BuildDbArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Output directory; one database file per category and location
    #[arg(long, short)]
    output: PathBuf,
    #[arg(long, value_delimiter = ',')]
    horizons: Option<Vec<usize>>,
    #[arg(long)]
    warmup_offset: Option<usize>,
}

#[derive(Args)]
struct PredictArgs {
    /// Database file, or a directory written by build-db
    #[arg(long, required_unless_present = "cv")]
    database: Option<PathBuf>,
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, default_value = "vehicle")]
    category: Category,
    #[arg(long, default_value_t = 1)]
    location: i64,
    #[arg(long, allow_hyphen_values = true)]
    x: f64,
    #[arg(long, allow_hyphen_values = true)]
    y: f64,
    #[arg(long)]
    speed: f64,
    /// Heading in degrees, counter-clockwise from +x
    #[arg(long, allow_hyphen_values = true)]
    heading: f64,
    #[arg(long)]
    horizon: usize,
    /// Constant-velocity prediction instead of the kernel model
    #[arg(long)]
    cv: bool,
    /// Use the interaction kernel with this other-vehicle position (x,y)
    #[arg(long, value_delimiter = ',', num_args = 2, allow_hyphen_values = true)]
    other: Option<Vec<f64>>,
    /// Use the interaction kernel with no other vehicle present
    #[arg(long, conflicts_with = "other")]
    no_other: bool,
    #[arg(long)]
    sample_period: Option<f64>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Database file, or a directory written by build-db
    #[arg(long)]
    database: PathBuf,
    #[arg(long)]
    params: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, short)]
    output_dir: PathBuf,
    #[arg(long)]
    fallback_to_cv: bool,
    /// Also score the interaction kernel
    #[arg(long)]
    interaction: bool,
    #[arg(long, value_delimiter = ',')]
    horizons: Option<Vec<usize>>,
    /// Error map cell size in metres
    #[arg(long, default_value_t = 2.0)]
    map_cell: f64,
}

#[derive(Args)]
struct HminArgs {
    #[arg(long, conflicts_with = "speed", required_unless_present = "speed")]
    speed_kmh: Option<f64>,
    /// Speed in m/s
    #[arg(long)]
    speed: Option<f64>,
    #[arg(long)]
    mu: f64,
}

#[derive(Args)]
struct SynthArgs {
    /// bifurcation, stop_yield, constant_velocity or curved_road
    scenario: Scenario,
    #[arg(long)]
    seed: Option<u64>,
    /// Position noise standard deviation in metres
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Also write InD-style tables at 25 Hz into this directory
    #[arg(long)]
    ind_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        cfg.merge_file(path)?;
    }
    match cli.command {
        Command::Preprocess(a) => preprocess(cfg, a),
        Command::Split(a) => split(cfg, a),
        Command::Fit(a) => fit(cfg, a),
        Command::BuildDb(a) => build_db(cfg, a),
        Command::Predict(a) => predict(cfg, a),
        Command::Evaluate(a) => evaluate(cfg, a),
        Command::Hmin(a) => hmin(a),
        Command::Synth(a) => synth_cmd(cfg, a),
    }
}

fn parent(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn preprocess(mut cfg: RunConfig, a: PreprocessArgs) -> Result<()> {
    if let Some(p) = a.sample_period {
        cfg.sample_period = p;
    }
    cfg.input = a.input_dir.clone().or(a.corpus.clone());
    cfg.output = Some(a.output.clone());
    cfg.validate()?;
    let raw = match (&a.input_dir, &a.corpus) {
        (Some(dir), _) => {
            let (c, report) = td::ingest_ind_dir(dir, &td::SchemaAdapter::default())?;
            info!("ingested {} tracks from {} rows", report.tracks, report.rows);
            for (class, n) in &report.skipped {
                warn!("skipped {n} tracks of unknown class '{class}'");
            }
            c
        }
        (None, Some(path)) => td::read_corpus_file(path)?,
        (None, None) => return Err(Error::InvalidArgument("need --input-dir or --corpus".into())),
    };
    let excluded: BTreeSet<i64> = a.exclude_locations.iter().copied().collect();
    let mut kept = Vec::with_capacity(raw.len());
    for t in raw.iter().filter(|t| !excluded.contains(&t.location_id)) {
        let factor = (cfg.sample_period / t.sample_period).round().max(1.0) as usize;
        let mut t = td::downsample(t, factor)?;
        if !t.orientations_complete() {
            match t.derive_orientations() {
                // motionless: left pending, the stationary rule drops it
                Ok(()) | Err(Error::StationaryTrajectory) => {}
                Err(e) => return Err(e),
            }
        }
        kept.push(t);
    }
    let mut corpus = Corpus::new(kept)?;
    corpus.provenance = raw.provenance.clone();
    let (filtered, report) = td::filter_corpus(&corpus, &FilterConfig::default());
    print!("{report}");
    println!("kept {} of {} trajectories", filtered.len(), raw.len());
    td::write_corpus_file(&filtered, &a.output)?;
    cfg.write_echo(parent(&a.output), "preprocess")?;
    Ok(())
}

fn split(mut cfg: RunConfig, a: SplitArgs) -> Result<()> {
    if let Some(f) = a.target_fraction {
        cfg.target_fraction = f;
    }
    cfg.input = Some(a.corpus.clone());
    cfg.validate()?;
    let corpus = td::read_corpus_file(&a.corpus)?;
    let outcome = td::split_by_recordings(&corpus, cfg.target_fraction)?;
    let mut report = String::new();
    writeln!(report, "target fraction {}", cfg.target_fraction).unwrap();
    writeln!(report, "train recordings {:?}", outcome.train_recordings).unwrap();
    writeln!(report, "category,location_id,train_fraction").unwrap();
    for ((cat, loc), f) in &outcome.fractions {
        writeln!(report, "{},{},{:.4}", cat.as_str(), loc, f).unwrap();
    }
    writeln!(report, "deviation {:.6}", outcome.deviation).unwrap();
    print!("{report}");
    td::write_corpus_file(&outcome.train, &a.train)?;
    td::write_corpus_file(&outcome.test, &a.test)?;
    write(&parent(&a.train).join("split_report.txt"), &report)?;
    cfg.write_echo(parent(&a.train), "split")?;
    Ok(())
}

fn fit(mut cfg: RunConfig, a: FitArgs) -> Result<()> {
    if let Some(k) = a.k {
        cfg.k = k;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(r) = a.refinement_rounds {
        cfg.refinement_rounds = r;
    }
    if let Some(h) = a.train_horizon {
        cfg.train_horizon = h;
    }
    if let Some(g) = a.grid_a {
        cfg.grids.a = g;
    }
    if let Some(g) = a.grid_b {
        cfg.grids.b = g;
    }
    if let Some(g) = a.grid_c_orient {
        cfg.grids.c_orient = g;
    }
    cfg.input = Some(a.corpus.clone());
    cfg.params = Some(a.output.clone());
    cfg.validate()?;
    let corpus = td::read_corpus_file(&a.corpus)?;
    if corpus.is_empty() {
        return Err(Error::Empty(format!("no trajectories in {}", a.corpus.display())));
    }
    let gs = GridSearchConfig {
        k: cfg.k,
        grids: cfg.grids.clone(),
        refinement_rounds: cfg.refinement_rounds,
        horizon: cfg.train_horizon,
        warmup_offset: cfg.warmup_offset,
        r: cfg.r,
        seed: cfg.seed,
    };
    let mut set = ParamSet::default();
    let mut trace = String::from("category,location_id,a,b,c_orient,cv_loss,round\n");
    for (cat, loc) in corpus.cells() {
        let cell = corpus.cell(cat, loc);
        let fallback = || {
            let mut p = SimilarityParams::reference(cat, loc).unwrap_or_default();
            p.r = cfg.r;
            p
        };
        let params = if cell.len() < cfg.k {
            warn!(
                "{} at location {loc}: {} trajectories cannot fill {} folds, using fallback parameters",
                cat.as_str(),
                cell.len(),
                cfg.k
            );
            fallback()
        } else {
            match training::grid_search(&cell, &gs) {
                Ok(r) => {
                    println!(
                        "{} location {loc}: a={} b={} c_orient={} cv_loss={:.6}",
                        cat.as_str(),
                        r.best.a,
                        r.best.b,
                        r.best.c_orient,
                        r.cv_loss
                    );
                    for line in training::format_trace(&r.trace).lines().skip(1) {
                        writeln!(trace, "{},{},{}", cat.as_str(), loc, line).unwrap();
                    }
                    r.best
                }
                Err(e @ (Error::Empty(_) | Error::InvalidArgument(_))) => {
                    warn!("{} at location {loc}: {e}; using fallback parameters", cat.as_str());
                    fallback()
                }
                Err(e) => return Err(e),
            }
        };
        let mut block = TaggedParams::new(Some(cat), Some(loc), params);
        block.d = a.interaction_d;
        set.blocks.push(block);
    }
    kernel::write_params_file(&set, &a.output)?;
    if let Some(path) = &a.trace {
        write(path, &trace)?;
    }
    cfg.write_echo(parent(&a.output), "fit")?;
    Ok(())
}

fn db_file_name(cat: Category, loc: i64) -> String {
    format!("db_{}_{}.txt", cat.as_str(), loc)
}

fn build_db(mut cfg: RunConfig, a: BuildDbArgs) -> Result<()> {
    if let Some(h) = a.horizons {
        cfg.horizons = h;
    }
    if let Some(w) = a.warmup_offset {
        cfg.warmup_offset = w;
    }
    cfg.input = Some(a.corpus.clone());
    cfg.database = Some(a.output.clone());
    cfg.validate()?;
    let corpus = td::read_corpus_file(&a.corpus)?;
    std::fs::create_dir_all(&a.output).map_err(|e| Error::Io {
        path: a.output.clone(),
        source: e,
    })?;
    let mut written = 0;
    for (cat, loc) in corpus.cells() {
        match DisplacementDatabase::build(&corpus.cell(cat, loc), &cfg.horizons, cfg.warmup_offset) {
            Ok(db) => {
                let path = a.output.join(db_file_name(cat, loc));
                predictor::write_database_file(&db, &path)?;
                println!("{}: {} entries", path.display(), db.len());
                written += 1;
            }
            Err(Error::Empty(msg)) => warn!("{} at location {loc}: {msg}", cat.as_str()),
            Err(e) => return Err(e),
        }
    }
    if written == 0 {
        return Err(Error::Empty("no database could be built".into()));
    }
    cfg.write_echo(&a.output, "build-db")?;
    Ok(())
}

/// A database file is used for every cell; a directory is searched for the
/// cell's file.
fn load_db(path: &Path, cat: Category, loc: i64) -> Result<Option<DisplacementDatabase>> {
    if path.is_dir() {
        let file = path.join(db_file_name(cat, loc));
        if !file.exists() {
            return Ok(None);
        }
        return predictor::read_database_file(&file).map(Some);
    }
    predictor::read_database_file(path).map(Some)
}

fn predict(cfg: RunConfig, a: PredictArgs) -> Result<()> {
    let orientation = Vec2::from_angle(a.heading.to_radians());
    let state = RoadUserState::new(Vec2::new(a.x, a.y), a.speed, orientation)?;
    let p = if a.cv {
        constant_velocity_predict(&state, a.horizon, a.sample_period.unwrap_or(cfg.sample_period))?
    } else {
        let path = a.database.as_ref().expect("required unless --cv");
        let db = load_db(path, a.category, a.location)?.ok_or_else(|| {
            Error::Empty(format!(
                "no database for {} at location {} in {}",
                a.category.as_str(),
                a.location,
                path.display()
            ))
        })?;
        let set = match &a.params {
            Some(p) => kernel::read_params_file(p)?,
            None => ParamSet::reference(),
        };
        let tagged = set.lookup(a.category, a.location).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "no parameters for {} at location {}",
                a.category.as_str(),
                a.location
            ))
        })?;
        if a.other.is_some() || a.no_other {
            let ip = tagged
                .interaction()
                .ok_or_else(|| Error::InvalidArgument("parameter block has no interaction weight d".into()))?;
            let other = a.other.as_ref().map(|o| Vec2::new(o[0], o[1]));
            db.interaction_predict(&ip, &TrafficSituationState::new(state, other)?, a.horizon)?
        } else {
            db.predict(&tagged.params, &state, a.horizon)?
        }
    };
    println!("horizon_steps = {}", p.horizon_steps);
    println!("displacement = {},{}", p.displacement.x, p.displacement.y);
    println!("position = {},{}", p.position.x, p.position.y);
    println!("total_weight = {}", p.total_weight);
    println!("support_count = {}", p.support_count);
    Ok(())
}

fn evaluate(mut cfg: RunConfig, a: EvaluateArgs) -> Result<()> {
    if let Some(h) = a.horizons {
        cfg.horizons = h;
    }
    cfg.fallback_to_cv |= a.fallback_to_cv;
    cfg.input = Some(a.corpus.clone());
    cfg.database = Some(a.database.clone());
    cfg.params = Some(a.params.clone());
    cfg.output = Some(a.output_dir.clone());
    cfg.validate()?;
    let test = td::read_corpus_file(&a.corpus)?;
    if test.is_empty() {
        return Err(Error::Empty(format!("no trajectories in {}", a.corpus.display())));
    }
    let params = kernel::read_params_file(&a.params)?;
    let ecfg = EvalConfig {
        horizons: cfg.horizons.clone(),
        warmup_offset: cfg.warmup_offset,
        fallback_to_cv: cfg.fallback_to_cv,
    };
    let mut records = Vec::new();
    for (cat, loc) in test.cells() {
        let cell = test.cell(cat, loc);
        let period = cell.trajectories()[0].sample_period;
        records.extend(evaluation::evaluate(
            &Model::ConstantVelocity { sample_period: period },
            &cell,
            &ecfg,
        )?);
        let Some(db) = load_db(&a.database, cat, loc)? else {
            warn!(
                "no database for {} at location {loc}; kernel model not scored",
                cat.as_str()
            );
            continue;
        };
        records.extend(evaluation::evaluate(
            &Model::Wam {
                db: &db,
                params: &params,
            },
            &cell,
            &ecfg,
        )?);
        if a.interaction {
            records.extend(evaluation::evaluate(
                &Model::Interaction {
                    db: &db,
                    params: &params,
                },
                &cell,
                &ecfg,
            )?);
        }
    }
    let max_h = *cfg.horizons.iter().max().expect("validated");
    let summaries = evaluation::summarize(&records, max_h);
    let report = evaluation::ade_fde_table(&summaries, cfg.sample_period);
    print!("{report}");
    std::fs::create_dir_all(&a.output_dir).map_err(|e| Error::Io {
        path: a.output_dir.clone(),
        source: e,
    })?;
    write(&a.output_dir.join("records.csv"), &evaluation::records_csv(&records))?;
    write(&a.output_dir.join("summary.csv"), &evaluation::summary_csv(&summaries))?;
    write(&a.output_dir.join("report.txt"), &report)?;
    let map = evaluation::error_map(
        &records
            .iter()
            .filter(|r| r.model == evaluation::ModelKind::Wam)
            .cloned()
            .collect::<Vec<_>>(),
        max_h,
        a.map_cell,
    )?;
    write(
        &a.output_dir.join("error_map.csv"),
        &evaluation::error_map_csv(&map, a.map_cell),
    )?;
    cfg.write_echo(&a.output_dir, "evaluate")?;
    Ok(())
}

fn hmin(a: HminArgs) -> Result<()> {
    let q = match (a.speed_kmh, a.speed) {
        (Some(kmh), _) => BrakingQuery::from_kmh(kmh, a.mu),
        (None, Some(v)) => BrakingQuery::new(v, a.mu),
        (None, None) => return Err(Error::InvalidArgument("need --speed-kmh or --speed".into())),
    };
    println!("{:.2}", min_horizon(&q)?);
    Ok(())
}

fn synth_cmd(mut cfg: RunConfig, a: SynthArgs) -> Result<()> {
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if a.output.is_none() && a.ind_dir.is_none() {
        return Err(Error::InvalidArgument("need --output or --ind-dir".into()));
    }
    let mut sc = SynthConfig::new(a.scenario, cfg.seed, a.noise);
    sc.trajectories = a.count;
    sc.sample_period = cfg.sample_period;
    if let Some(path) = &a.output {
        let corpus = synth::generate(&sc)?;
        td::write_corpus_file(&corpus, path)?;
        println!("{} trajectories written to {}", corpus.len(), path.display());
        cfg.output = Some(path.clone());
        cfg.write_echo(parent(path), "synth")?;
    }
    if let Some(dir) = &a.ind_dir {
        sc.sample_period = td::NATIVE_SAMPLE_PERIOD;
        synth::write_ind_dir(&synth::generate(&sc)?, dir)?;
        cfg.write_echo(dir, "synth")?;
    }
    Ok(())
}
