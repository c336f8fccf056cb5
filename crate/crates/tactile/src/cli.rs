//! The `tactile` subcommands.
//!
//! Every run writes `run.json` into the output directory: the parsed
//! arguments, the fully resolved configuration and a short result summary.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tactile_core::calib::{
    cross_validate, prepare_samples, rmse, CvReport, CvSample, MlpSpec, ModelSpec, RansacConfig, WrenchModel,
    AXIS_NAMES,
};
use tactile_core::features::compute_features_using;
use tactile_core::field::{GridSpec, VectorField2D};
use tactile_core::grasp::{simulate_holding, ControllerConfig, PipelineSensor, PlantTruth, Scenario, SimulationResult};
use tactile_core::ingest::{displacements, rbf_interpolate, MarkerSet, TrackState};
use tactile_core::nhhd::{PoissonSolver, SolverConfig, SolverMethod, DEFAULT_SIGNIFICANCE};
use tactile_core::surrogate::{gen_calibration_dataset, median_cell_magnitude, DatasetRanges, SurrogateConfig};

use crate::error::{CliError, Result};
use crate::report::{self, ReportColumn};
use crate::{dataset, fieldio, markers, modelio::ModelFile, svg, trace};

#[derive(Debug, Parser, Serialize)]
#[command(name = "tactile", version, about = "Contact wrench estimation from tactile displacement fields")]
pub struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "TACTILE_OUT", default_value = "tactile-out")]
    pub out: PathBuf,
    /// Seed for every random choice the subcommand makes.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Generate a surrogate calibration dataset.
    Synth(SynthArgs),
    /// Turn a marker-centroid stream into per-frame displacement fields.
    Track(TrackArgs),
    /// Decompose one field and print its features as JSON.
    Decompose(DecomposeArgs),
    /// Compute features for a batch of field files.
    Features(FeaturesArgs),
    /// Fit models on a dataset, save them and write a cross-validation report.
    Calibrate(CalibrateArgs),
    /// Cross-validate models on a dataset and score saved models against it.
    Evaluate(EvaluateArgs),
    /// Simulate a holding task and write the trace and ratio plot.
    Grasp(GraspArgs),
    /// Plot the ratio traces of a grasp trace CSV.
    Plot(PlotArgs),
}

fn parse_range(s: &str) -> std::result::Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    let nums: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|e| e.to_string())?;
    match nums.as_slice() {
        [x] => Ok([*x, *x]),
        [lo, hi] if lo <= hi => Ok([*lo, *hi]),
        _ => Err(format!("expected LO,HI with LO <= HI, got {s:?}")),
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 6)]
    pub objects: usize,
    #[arg(long, default_value_t = 50)]
    pub per_object: usize,
    /// Cells per axis of the square grid.
    #[arg(long, default_value_t = 24)]
    pub grid: usize,
    /// Cell spacing (mm).
    #[arg(long, default_value_t = 1.0)]
    pub spacing: f64,
    /// Normal-force range (N).
    #[arg(long, value_parser = parse_range)]
    pub f_n: Option<[f64; 2]>,
    /// Tangential-force magnitude range (N).
    #[arg(long, value_parser = parse_range)]
    pub f_t: Option<[f64; 2]>,
    /// Torsion range (N·mm).
    #[arg(long, value_parser = parse_range)]
    pub f_tau: Option<[f64; 2]>,
    /// Per-object contact radius range (mm).
    #[arg(long, value_parser = parse_range)]
    pub contact_radius: Option<[f64; 2]>,
    /// Per-object shear envelope width range (mm).
    #[arg(long, value_parser = parse_range)]
    pub falloff: Option<[f64; 2]>,
    /// Relative per-object gain perturbation.
    #[arg(long, default_value_t = 0.0)]
    pub gain_perturbation: f64,
    /// Contact-center jitter (mm).
    #[arg(long, default_value_t = 0.0)]
    pub center_jitter: f64,
    #[arg(long, default_value_t = 0.0)]
    pub outlier_fraction: f64,
    /// Additive noise standard deviation (mm).
    #[arg(long, conflicts_with = "noise_rel")]
    pub noise_sigma: Option<f64>,
    /// Noise as a fraction of the median per-cell displacement of the noiseless dataset.
    #[arg(long)]
    pub noise_rel: Option<f64>,
    /// Amplitude saturation scale (mm).
    #[arg(long)]
    pub saturation: Option<f64>,
    /// Friction ceiling applied to drawn loads.
    #[arg(long)]
    pub max_friction: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct TrackArgs {
    /// Stream directory (or single CSV) of `frame_idx,marker_x,marker_y` rows.
    pub stream: PathBuf,
    /// Tracking gate (mm); defaults to 0.3 × the marker pitch.
    #[arg(long)]
    pub max_step: Option<f64>,
    /// Smallest allowed distance between detections in one frame (mm).
    #[arg(long, default_value_t = 1e-6)]
    pub min_separation: f64,
    /// Cells per axis of the output grid.
    #[arg(long, default_value_t = 24)]
    pub grid: usize,
    /// Cell spacing (mm); defaults to spanning the first frame's bounding box.
    #[arg(long)]
    pub spacing: Option<f64>,
    /// Gaussian kernel width (mm); defaults to the marker pitch.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Retire tracks after this many consecutive misses.
    #[arg(long)]
    pub max_misses: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SolverArg {
    Direct,
    Fft,
}

impl SolverArg {
    fn config(self) -> SolverConfig {
        let method = match self {
            SolverArg::Direct => SolverMethod::Direct,
            SolverArg::Fft => SolverMethod::Fft,
        };
        SolverConfig { method, ..SolverConfig::default() }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct DecomposeArgs {
    pub field: PathBuf,
    #[arg(long, value_enum, default_value = "direct")]
    pub solver: SolverArg,
    /// Fraction of max |R| a rotation center must reach.
    #[arg(long, default_value_t = DEFAULT_SIGNIFICANCE)]
    pub significance: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct FeaturesArgs {
    /// Field files.
    pub fields: Vec<PathBuf>,
    /// JSON file holding a list of field paths (relative to the list file).
    #[arg(long)]
    pub list: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "direct")]
    pub solver: SolverArg,
    #[arg(long, default_value_t = DEFAULT_SIGNIFICANCE)]
    pub significance: f64,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
pub enum ModelKind {
    Ransac,
    Mlp,
    MlpRaw,
}

#[derive(Debug, Args, Serialize)]
pub struct ModelArgs {
    /// Models to fit; repeat for several.
    #[arg(long = "model", value_enum, default_values = ["ransac"])]
    pub models: Vec<ModelKind>,
    /// Hidden layer sizes for the MLP models.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    /// L-BFGS iteration cap for the MLP models.
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long, default_value_t = 200)]
    pub ransac_iters: usize,
    /// RANSAC inlier tolerance; defaults to 1.5 × MAD of the least-squares residuals.
    #[arg(long)]
    pub ransac_tol: Option<f64>,
    #[arg(long, default_value_t = 6)]
    pub folds: usize,
    #[arg(long, default_value_t = DEFAULT_SIGNIFICANCE)]
    pub significance: f64,
}

impl ModelArgs {
    fn specs(&self, seed: u64) -> Result<Vec<ModelSpec>> {
        if self.models.is_empty() {
            return Err(CliError::Config("no model requested".into()));
        }
        let mlp = |mut s: MlpSpec| -> Result<MlpSpec> {
            if let Some(h) = &self.hidden {
                if h.is_empty() || h.contains(&0) {
                    return Err(CliError::Config("hidden layer sizes must be positive".into()));
                }
                s.hidden = h.clone();
            }
            if let Some(n) = self.max_iter {
                s.train.max_iter = n;
            }
            s.train.seed = seed;
            Ok(s)
        };
        self.models
            .iter()
            .map(|m| {
                Ok(match m {
                    ModelKind::Ransac => ModelSpec::Ransac(RansacConfig {
                        iters: self.ransac_iters,
                        inlier_tol: self.ransac_tol,
                        seed,
                        ..RansacConfig::default()
                    }),
                    ModelKind::Mlp => ModelSpec::MlpFeatures(mlp(MlpSpec::small())?),
                    ModelKind::MlpRaw => ModelSpec::MlpRaw(mlp(MlpSpec::raw_baseline())?),
                })
            })
            .collect()
    }
}

#[derive(Debug, Args, Serialize)]
pub struct CalibrateArgs {
    pub dataset: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    pub dataset: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Saved models to score on the whole dataset; skips cross validation when given.
    #[arg(long = "model-file")]
    pub model_files: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SensorMode {
    PlantTruth,
    Pipeline,
}

#[derive(Debug, Args, Serialize)]
pub struct GraspArgs {
    /// Scenario JSON; the built-in ramp scenario when omitted.
    pub scenario: Option<PathBuf>,
    /// Overrides the scenario's sensor mode.
    #[arg(long, value_enum)]
    pub mode: Option<SensorMode>,
    /// Shorthand for `--mode plant-truth`.
    #[arg(long, conflicts_with = "mode")]
    pub plant_truth: bool,
    /// Run with the controller removed (fixed opening).
    #[arg(long)]
    pub no_controller: bool,
    /// Exit with code 3 if the grasp fails.
    #[arg(long, conflicts_with = "expect_fail")]
    pub expect_hold: bool,
    /// Exit with code 3 if the grasp holds.
    #[arg(long)]
    pub expect_fail: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct PlotArgs {
    pub trace: PathBuf,
    #[arg(long, default_value_t = 0.6)]
    pub mu: f64,
    #[arg(long, default_value_t = 0.2)]
    pub band: f64,
    #[arg(long, default_value = "contact ratio")]
    pub title: String,
    /// Output file; `ratio.svg` in the output directory by default.
    #[arg(long = "svg")]
    pub svg: Option<PathBuf>,
}

/// What a subcommand reports back: the resolved configuration and a result summary.
struct Outcome {
    resolved: Value,
    result: Value,
    /// Set when the run completed but the outcome is a domain failure.
    failure: Option<String>,
}

/// Writes to standard output, ignoring a closed pipe.
fn emit(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn json_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

/// Runs the parsed command line.
pub fn run(cli: &Cli) -> Result<()> {
    std::fs::create_dir_all(&cli.out).map_err(|e| CliError::io(&cli.out, e))?;
    let outcome = match &cli.command {
        Command::Synth(a) => synth(cli, a)?,
        Command::Track(a) => track(cli, a)?,
        Command::Decompose(a) => decompose(cli, a)?,
        Command::Features(a) => features(cli, a)?,
        Command::Calibrate(a) => calibrate(cli, &a.dataset, &a.model, true, &[])?,
        Command::Evaluate(a) => calibrate(cli, &a.dataset, &a.model, false, &a.model_files)?,
        Command::Grasp(a) => grasp(cli, a)?,
        Command::Plot(a) => plot(cli, a)?,
    };
    let record = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "args": json_value(cli),
        "resolved": outcome.resolved,
        "result": outcome.result,
    });
    let path = cli.out.join("run.json");
    let text = serde_json::to_string_pretty(&record).map_err(|e| CliError::json(&path, e))?;
    fieldio::write_text(&path, &(text + "\n"))?;
    match outcome.failure {
        Some(msg) => Err(CliError::Domain(msg)),
        None => Ok(()),
    }
}

fn synth(cli: &Cli, a: &SynthArgs) -> Result<Outcome> {
    let grid = GridSpec::centered(a.grid, a.grid, a.spacing)?;
    let d = DatasetRanges::default();
    let ranges = DatasetRanges {
        f_n: a.f_n.unwrap_or(d.f_n),
        f_t: a.f_t.unwrap_or(d.f_t),
        f_tau: a.f_tau.unwrap_or(d.f_tau),
        contact_radius: a.contact_radius.unwrap_or(d.contact_radius),
        falloff_sigma: a.falloff.unwrap_or(d.falloff_sigma),
        gain_perturbation: a.gain_perturbation,
        center_jitter: a.center_jitter,
        outlier_fraction: a.outlier_fraction,
    };
    let mut cfg = SurrogateConfig {
        noise_sigma: a.noise_sigma.unwrap_or(0.0),
        seed: cli.seed,
        saturation: a.saturation,
        max_friction: a.max_friction,
        ..SurrogateConfig::default()
    };
    if let Some(rel) = a.noise_rel {
        if !(rel.is_finite() && rel >= 0.0) {
            return Err(CliError::Config("--noise-rel must be >= 0".into()));
        }
        let (clean, _) = gen_calibration_dataset(&cfg, grid, a.objects, a.per_object, &ranges, cli.seed)?;
        cfg.noise_sigma = rel * median_cell_magnitude(&clean);
    }
    let (samples, objects) = gen_calibration_dataset(&cfg, grid, a.objects, a.per_object, &ranges, cli.seed)?;
    let hash = dataset::write_dataset(&cli.out, grid, cli.seed, cfg, ranges, objects, &samples)?;
    emit(&format!("{hash}\n"));
    Ok(Outcome {
        resolved: json!({ "grid": grid, "surrogate": cfg, "ranges": ranges }),
        result: json!({ "samples": samples.len(), "dataset_hash": hash }),
        failure: None,
    })
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    if xs.is_empty() {
        return 0.0;
    }
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Median nearest-neighbor distance.
fn marker_pitch(points: &[[f64; 2]]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let nn = points
        .iter()
        .enumerate()
        .map(|(k, p)| {
            points
                .iter()
                .enumerate()
                .filter(|(m, _)| *m != k)
                .map(|(_, q)| (p[0] - q[0]).hypot(p[1] - q[1]))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Some(median(nn)).filter(|p| *p > 0.0)
}

fn track(cli: &Cli, a: &TrackArgs) -> Result<Outcome> {
    let frames = markers::read_stream(&a.stream)?;
    let (&first_idx, first) = frames.iter().next().expect("stream is non-empty");
    let first_set = MarkerSet::new(first.clone(), a.min_separation)?;
    let pitch = marker_pitch(first)
        .ok_or_else(|| CliError::Config("the first frame needs at least two distinct markers".into()))?;
    let max_step = a.max_step.unwrap_or(0.3 * pitch);
    let epsilon = a.epsilon.unwrap_or(pitch);

    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in first {
        for c in 0..2 {
            lo[c] = lo[c].min(p[c]);
            hi[c] = hi[c].max(p[c]);
        }
    }
    let n = a.grid;
    let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let spacing = a.spacing.unwrap_or(extent / (n.max(2) - 1) as f64);
    let half = 0.5 * (n as f64 - 1.0) * spacing;
    let center = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    let grid = GridSpec::new(n, n, spacing, [center[0] - half, center[1] - half])?;

    let mut state = TrackState::init(&first_set);
    let fields_dir = cli.out.join("fields");
    let mut written = Vec::new();
    let mut frozen_last = Vec::new();
    for (&idx, points) in &frames {
        if idx != first_idx {
            state.update(&MarkerSet::new(points.clone(), a.min_separation)?, max_step);
            if let Some(m) = a.max_misses {
                state.retire_stale(m);
            }
        }
        let field = rbf_interpolate(&displacements(&state), grid, epsilon, None)?;
        let file = fields_dir.join(format!("frame_{idx:06}.csv"));
        fieldio::save_vector(&file, &field)?;
        frozen_last = state.frozen();
        written.push(file);
    }
    let alive = state.alive.iter().filter(|x| **x).count();
    emit(&format!(
        "{} frames, {} tracks ({} alive, {} frozen in the last frame)\n",
        frames.len(),
        state.len(),
        alive,
        frozen_last.len()
    ));
    Ok(Outcome {
        resolved: json!({ "max_step": max_step, "epsilon": epsilon, "grid": grid, "pitch": pitch }),
        result: json!({
            "frames": frames.len(),
            "tracks": state.len(),
            "alive": alive,
            "frozen": frozen_last,
            "fields": written,
        }),
        failure: None,
    })
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "field".to_string(), |s| s.to_string_lossy().into_owned())
}

fn decompose(cli: &Cli, a: &DecomposeArgs) -> Result<Outcome> {
    let field = fieldio::load_vector(&a.field)?;
    let solver = PoissonSolver::new(*field.grid(), &a.solver.config())?;
    let report = compute_features_using(&field, a.significance, &solver)?;
    let name = stem(&a.field);
    let dec = &report.decomposition;
    for (suffix, f) in [("d", &dec.d), ("r", &dec.r), ("h", &dec.h)] {
        fieldio::save_vector(&fieldio::sibling(&cli.out, &name, suffix), f)?;
    }
    for (suffix, f) in [("D", &dec.potential_d), ("R", &dec.potential_r)] {
        fieldio::save_scalar(&fieldio::sibling(&cli.out, &name, suffix), f)?;
    }
    let t = report.features;
    let arr = t.as_array();
    let norm = arr.iter().map(|x| x * x).sum::<f64>().sqrt();
    let normalized: Vec<f64> = arr.iter().map(|x| if norm > 0.0 { x / norm } else { 0.0 }).collect();
    let summary = json!({
        "s_n": t.s_n,
        "s_t": t.s_t,
        "s_t_direction": t.s_t_direction,
        "s_tau": t.s_tau,
        "normalized": normalized,
        "rotation_centers": report.centers,
    });
    emit(&(serde_json::to_string_pretty(&summary).expect("plain JSON values") + "\n"));
    Ok(Outcome {
        resolved: json!({ "solver": a.solver, "significance": a.significance, "grid": field.grid() }),
        result: summary,
        failure: None,
    })
}

fn feature_row(path: &Path, field: &VectorField2D, solver: &PoissonSolver, significance: f64) -> Result<String> {
    let t = compute_features_using(field, significance, solver)?.features;
    let (dx, dy) = t.s_t_direction.map_or((String::new(), String::new()), |d| (d[0].to_string(), d[1].to_string()));
    Ok(format!("{},{},{},{dx},{dy},{}", path.display(), t.s_n, t.s_t, t.s_tau))
}

fn features(cli: &Cli, a: &FeaturesArgs) -> Result<Outcome> {
    let mut paths = a.fields.clone();
    if let Some(list) = &a.list {
        let listed: Vec<PathBuf> =
            serde_json::from_str(&fieldio::read_text(list)?).map_err(|e| CliError::json(list, e))?;
        let base = list.parent().unwrap_or(Path::new(""));
        paths.extend(listed.into_iter().map(|p| if p.is_absolute() { p } else { base.join(p) }));
    }
    if paths.is_empty() {
        return Err(CliError::Config("no field files given".into()));
    }
    let fields: Vec<VectorField2D> = paths.iter().map(|p| fieldio::load_vector(p)).collect::<Result<_>>()?;
    let grid = *fields[0].grid();
    if let Some(k) = fields.iter().position(|f| *f.grid() != grid) {
        return Err(CliError::Config(format!("{}: grid differs from {}", paths[k].display(), paths[0].display())));
    }
    let solver = PoissonSolver::new(grid, &a.solver.config())?;
    let jobs = a.jobs.clamp(1, fields.len());
    let chunk = fields.len().div_ceil(jobs);
    let rows: Vec<Result<String>> = std::thread::scope(|scope| {
        let handles: Vec<_> = paths
            .chunks(chunk)
            .zip(fields.chunks(chunk))
            .map(|(ps, fs)| {
                let solver = &solver;
                scope.spawn(move || {
                    ps.iter().zip(fs).map(|(p, f)| feature_row(p, f, solver, a.significance)).collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("feature worker panicked")).collect()
    });
    let mut csv = String::from("path,s_n,s_t,dir_x,dir_y,s_tau\n");
    for r in rows {
        csv.push_str(&r?);
        csv.push('\n');
    }
    let out = cli.out.join("features.csv");
    fieldio::write_text(&out, &csv)?;
    emit(&csv);
    Ok(Outcome {
        resolved: json!({ "files": paths, "solver": a.solver, "significance": a.significance, "jobs": jobs }),
        result: json!({ "rows": paths.len(), "csv": out }),
        failure: None,
    })
}

fn spec_json(spec: &ModelSpec) -> Value {
    match spec {
        ModelSpec::Ransac(c) => json!({ "method": spec.name(), "config": c }),
        ModelSpec::MlpFeatures(s) | ModelSpec::MlpRaw(s) => json!({
            "method": spec.name(),
            "hidden": s.hidden,
            "max_iter": s.train.max_iter,
            "tol": s.train.tol,
            "seed": s.train.seed,
        }),
    }
}

fn calibrate(cli: &Cli, dir: &Path, m: &ModelArgs, save: bool, model_files: &[PathBuf]) -> Result<Outcome> {
    let (manifest, samples) = dataset::read_dataset(dir)?;
    let hash = dataset::dataset_hash(dir)?;
    let cv = prepare_samples(&samples, m.significance)?;
    let mut result = json!({ "dataset_hash": hash });

    if !model_files.is_empty() {
        let mut csv = String::from("model,normal,tangential,torsion\n");
        let mut scores = Vec::new();
        for path in model_files {
            let (model, grid) = ModelFile::load(path)?.to_model()?;
            if grid.is_some_and(|g| g != manifest.grid) {
                return Err(CliError::Config(format!("{}: model grid differs from the dataset", path.display())));
            }
            let r = score(&model, &cv)?;
            csv.push_str(&format!("{},{},{},{}\n", path.display(), r[0], r[1], r[2]));
            scores.push(json!({ "model": path, "rmse": r }));
        }
        fieldio::write_text(&cli.out.join("evaluation.csv"), &csv)?;
        emit(&csv);
        result["scores"] = Value::Array(scores);
        return Ok(Outcome {
            resolved: json!({ "significance": m.significance }),
            result,
            failure: None,
        });
    }

    let specs = m.specs(cli.seed)?;
    let reports: Vec<CvReport> = specs.iter().map(|s| cross_validate(&cv, s, m.folds)).collect::<std::result::Result<_, _>>()?;
    let columns: Vec<ReportColumn<'_>> =
        specs.iter().zip(&reports).map(|(spec, report)| ReportColumn { spec, report }).collect();
    fieldio::write_text(&cli.out.join("report.csv"), &report::table_csv(&columns))?;
    fieldio::write_text(&cli.out.join("folds.csv"), &report::folds_csv(&columns))?;
    emit(&report::table_text(&columns));

    if save {
        let mut saved = Vec::new();
        for spec in &specs {
            let model = WrenchModel::fit(spec, &cv)?;
            let path = cli.out.join("models").join(format!("{}.json", spec.name()));
            ModelFile::from_model(spec.name(), &model, manifest.grid).save(&path)?;
            saved.push(path);
        }
        result["models"] = json_value(&saved);
    }
    result["rmse"] = reports
        .iter()
        .map(|r| (r.model.to_string(), json!({ "mean": r.mean, "std": r.std })))
        .collect::<serde_json::Map<_, _>>()
        .into();
    Ok(Outcome {
        resolved: json!({
            "models": specs.iter().map(spec_json).collect::<Vec<_>>(),
            "folds": m.folds,
            "significance": m.significance,
            "axes": AXIS_NAMES,
        }),
        result,
        failure: None,
    })
}

fn score(model: &WrenchModel, samples: &[CvSample]) -> Result<[f64; 3]> {
    let mut pred: [Vec<f64>; 3] = Default::default();
    let mut truth: [Vec<f64>; 3] = Default::default();
    for s in samples {
        let p = model.predict_sample(s)?.axes();
        for a in 0..3 {
            pred[a].push(p[a]);
            truth[a].push(s.truth[a]);
        }
    }
    Ok([rmse(&pred[0], &truth[0])?, rmse(&pred[1], &truth[1])?, rmse(&pred[2], &truth[2])?])
}

/// Sensor settings in a scenario file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum SensorDoc {
    #[default]
    PlantTruth,
    Pipeline(PipelineDoc),
}


/// Pipeline-in-the-loop sensing: each true wrench is rendered by the
/// surrogate and estimated back through a feature model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineDoc {
    /// Saved feature model; calibrated in-process when absent.
    #[serde(default)]
    pub model: Option<PathBuf>,
    #[serde(default = "PipelineDoc::default_grid")]
    pub grid: usize,
    #[serde(default = "PipelineDoc::default_radius")]
    pub contact_radius: f64,
    #[serde(default = "PipelineDoc::default_noise")]
    pub noise_sigma: f64,
}

impl PipelineDoc {
    fn default_grid() -> usize {
        16
    }

    fn default_radius() -> f64 {
        2.5
    }

    fn default_noise() -> f64 {
        0.002
    }
}

impl Default for PipelineDoc {
    fn default() -> Self {
        Self { model: None, grid: 16, contact_radius: 2.5, noise_sigma: 0.002 }
    }
}

/// Scenario JSON: the simulation fields plus a `sensor` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    #[serde(flatten)]
    pub scenario: Scenario,
    #[serde(default)]
    pub sensor: SensorDoc,
}

/// Dataset ranges used when the grasp command calibrates its own sensor model.
pub fn grasp_calibration_ranges() -> DatasetRanges {
    DatasetRanges { f_n: [0.5, 15.0], f_t: [0.0, 8.0], f_tau: [-2.0, 2.0], ..DatasetRanges::default() }
}

fn pipeline_sensor(doc: &PipelineDoc, seed: u64, base: &Path) -> Result<(PipelineSensor, Value)> {
    let grid = GridSpec::centered(doc.grid, doc.grid, 1.0)?;
    let surrogate = SurrogateConfig { noise_sigma: doc.noise_sigma, seed, ..SurrogateConfig::default() };
    let (model, source) = match &doc.model {
        Some(p) => {
            let path = if p.is_absolute() { p.clone() } else { base.join(p) };
            let (model, _) = ModelFile::load(&path)?.to_model()?;
            (model, json!({ "model_file": path }))
        }
        None => {
            let ranges = DatasetRanges { contact_radius: [doc.contact_radius; 2], ..grasp_calibration_ranges() };
            let (samples, _) = gen_calibration_dataset(&surrogate, grid, 6, 50, &ranges, seed)?;
            let cv = prepare_samples(&samples, DEFAULT_SIGNIFICANCE)?;
            let spec = ModelSpec::Ransac(RansacConfig { seed, ..RansacConfig::default() });
            (WrenchModel::fit(&spec, &cv)?, json!({ "calibrated": { "ranges": ranges, "samples": samples.len(), "method": "ransac" } }))
        }
    };
    Ok((PipelineSensor::new(surrogate, grid, doc.contact_radius, model)?, source))
}

fn grasp(cli: &Cli, a: &GraspArgs) -> Result<Outcome> {
    let (mut file, base) = match &a.scenario {
        Some(p) => {
            let f: ScenarioFile = serde_json::from_str(&fieldio::read_text(p)?).map_err(|e| CliError::json(p, e))?;
            (f, p.parent().unwrap_or(Path::new("")).to_path_buf())
        }
        None => (
            ScenarioFile { scenario: Scenario::ramp(Some(ControllerConfig::default())), sensor: SensorDoc::default() },
            PathBuf::new(),
        ),
    };
    if a.no_controller {
        file.scenario.controller = None;
    }
    let mode = if a.plant_truth { Some(SensorMode::PlantTruth) } else { a.mode };
    match (mode, &file.sensor) {
        (Some(SensorMode::PlantTruth), _) => file.sensor = SensorDoc::PlantTruth,
        (Some(SensorMode::Pipeline), SensorDoc::PlantTruth) => file.sensor = SensorDoc::Pipeline(PipelineDoc::default()),
        _ => {}
    }
    file.scenario.validate()?;

    let (result, sensor_info): (SimulationResult, Value) = match &file.sensor {
        SensorDoc::PlantTruth => (simulate_holding(&file.scenario, &mut PlantTruth)?, json!("plant-truth")),
        SensorDoc::Pipeline(doc) => {
            let (mut sensor, info) = pipeline_sensor(doc, cli.seed, &base)?;
            (simulate_holding(&file.scenario, &mut sensor)?, info)
        }
    };

    let trace_path = cli.out.join("trace.csv");
    let trace_csv = trace::to_csv(&result.trace);
    fieldio::write_text(&trace_path, &trace_csv)?;
    let (mu, band) = file.scenario.controller.map_or_else(
        || {
            let c = ControllerConfig::default();
            (c.mu, c.band)
        },
        |c| (c.mu, c.band),
    );
    let rows = trace::parse(&trace_csv, &trace_path)?;
    let title = match file.scenario.controller {
        Some(_) => "contact ratio, controller on",
        None => "contact ratio, controller off",
    };
    fieldio::write_text(&cli.out.join("ratio.svg"), &svg::ratio_plot(&rows, mu, band, title))?;
    let resolved_path = cli.out.join("scenario.json");
    let text = serde_json::to_string_pretty(&file).map_err(|e| CliError::json(&resolved_path, e))?;
    fieldio::write_text(&resolved_path, &(text + "\n"))?;

    let upper = mu + band / 2.0;
    let longest = result.excursions_above(upper).into_iter().max().unwrap_or(0);
    let held = !result.failed();
    match result.failure_time {
        Some(t) => emit(&format!("grasp failed at t = {t} s\n")),
        None => emit(&format!("grasp held; longest excursion above {upper} lasted {longest} periods\n")),
    }
    let failure = if a.expect_hold && !held {
        Some(format!("grasp failed at t = {} s", result.failure_time.unwrap_or(f64::NAN)))
    } else if a.expect_fail && held {
        Some("grasp held but a failure was expected".to_string())
    } else {
        None
    };
    Ok(Outcome {
        resolved: json!({ "scenario": json_value(&file), "sensor": sensor_info }),
        result: json!({
            "held": held,
            "failure_time": result.failure_time,
            "longest_excursion_periods": longest,
            "rows": result.trace.len(),
        }),
        failure,
    })
}

fn plot(cli: &Cli, a: &PlotArgs) -> Result<Outcome> {
    if !(a.mu.is_finite() && a.band.is_finite() && a.band > 0.0) {
        return Err(CliError::Config("--mu and --band must be finite with band > 0".into()));
    }
    let rows = trace::parse(&fieldio::read_text(&a.trace)?, &a.trace)?;
    let out = a.svg.clone().unwrap_or_else(|| cli.out.join("ratio.svg"));
    fieldio::write_text(&out, &svg::ratio_plot(&rows, a.mu, a.band, &a.title))?;
    Ok(Outcome {
        resolved: json!({ "mu": a.mu, "band": a.band }),
        result: json!({ "svg": out, "rows": rows.len() }),
        failure: None,
    })
}
