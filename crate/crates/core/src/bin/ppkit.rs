//! `ppkit` command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use ppkit::ap::{self, ApConfig, ClusteringResult, Preference};
use ppkit::eval::{self, Summary};
use ppkit::io;
use ppkit::knn::{self, Aggregation, CutoffSearchConfig};
use ppkit::novelty::{self, NoveltyModel, Scoring, Verdict};
use ppkit::setdist::{self, DEFAULT_ORDER};
use ppkit::simgen::{Scenario, ScenarioSpec};
use ppkit::{BaseDistance, DistanceSpec, Family, LabeledDataset};

#[derive(Parser)]
#[command(name = "ppkit", version, about = "Learning with point patterns under set distances")]
struct Cli {
    /// Worker threads (falls back to PPKIT_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a simulated scenario dataset.
    Gen(GenArgs),
    /// Compute a pairwise distance matrix.
    Dist(DistArgs),
    /// Cluster with affinity propagation.
    Cluster(ClusterArgs),
    /// Cross-validated k-NN classification.
    Classify(ClassifyArgs),
    /// Nearest-normal-neighbour novelty detection.
    Detect(DetectArgs),
    /// Score a clustering or detection result against ground truth.
    Eval(EvalArgs),
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum FamilyArg {
    Hausdorff,
    Wasserstein,
    Ospa,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum BaseArg {
    Euclidean,
    Discrete,
}

#[derive(Args, Clone)]
struct DistanceArgs {
    /// Set distance.
    #[arg(long, value_enum)]
    distance: FamilyArg,
    /// Order p >= 1.
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    p: f64,
    /// OSPA cutoff c > 0 (OSPA only).
    #[arg(long)]
    cutoff: Option<f64>,
    /// Base distance between elements [default: euclidean for numeric data,
    /// discrete for tokens].
    #[arg(long, value_enum)]
    base: Option<BaseArg>,
}

#[derive(Args)]
struct GenArgs {
    /// Built-in scenario: i, ii or iii.
    #[arg(long, required_unless_present = "config")]
    scenario: Option<String>,
    /// Scenario JSON (clusters with rate, mean, cov, count, plus seed).
    #[arg(long, conflicts_with = "scenario")]
    config: Option<PathBuf>,
    /// Random seed (overrides the seed of --config).
    #[arg(long)]
    seed: Option<u64>,
    /// Output dataset (JSON lines).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DistArgs {
    /// Input dataset (JSON lines).
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    distance: DistanceArgs,
    /// Output CSV matrix; row ids go to <out stem>.ids.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    distance: DistanceArgs,
    /// Preference: median, min, or a number shared by every observation.
    #[arg(long, default_value = "median")]
    preference: String,
    /// Search a shared preference giving this many clusters instead.
    #[arg(long, conflicts_with = "preference")]
    clusters: Option<usize>,
    /// Runs allowed for the --clusters search.
    #[arg(long, default_value_t = 20)]
    probes: usize,
    /// Message damping in [0, 1).
    #[arg(long, default_value_t = 0.5)]
    damping: f64,
    /// Stop when no message changes by this much.
    #[arg(long, default_value_t = 1e-6)]
    theta: f64,
    #[arg(long, default_value_t = 1000)]
    max_iterations: usize,
    /// Stop when labels are unchanged for this many sweeps.
    #[arg(long, default_value_t = 50)]
    stable_iterations: usize,
    /// Output clustering result (JSON).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Labelled dataset.
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    distance: DistanceArgs,
    /// Neighbours; with --k-max every k in 1..=k-max is evaluated.
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Learn the OSPA cutoff by minimising rho over the default grid.
    #[arg(long)]
    learn_cutoff: bool,
    /// Aggregation used by --learn-cutoff.
    #[arg(long, default_value = "average")]
    aggregation: String,
    /// Neighbours used inside rho for --learn-cutoff.
    #[arg(long, default_value_t = 5)]
    rho_k: usize,
    /// Metrics output (JSON).
    #[arg(long)]
    out: PathBuf,
    /// Also write per-k accuracy as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    /// Normal training patterns (labels ignored).
    #[arg(long)]
    normal: PathBuf,
    /// Candidates to score.
    #[arg(long)]
    candidates: PathBuf,
    #[command(flatten)]
    distance: DistanceArgs,
    /// Pick the OSPA cutoff from the normal set.
    #[arg(long)]
    select_cutoff: bool,
    /// Percentile of the large-value statistics used by --select-cutoff.
    #[arg(long, default_value_t = 95.0)]
    select_percentile: f64,
    /// Threshold percentile of leave-one-out scores.
    #[arg(long, default_value_t = novelty::DEFAULT_PERCENTILE)]
    percentile: f64,
    #[arg(long, value_enum, default_value = "distance")]
    scoring: ScoringArg,
    /// Detection report (JSON lines).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ScoringArg {
    Distance,
    UncappedOspa,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum EvalKind {
    Cluster,
    Detect,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, value_enum)]
    kind: EvalKind,
    /// Clustering result JSON or detection report.
    #[arg(long)]
    result: PathBuf,
    /// Labelled dataset with the ground truth, aligned with the result.
    #[arg(long)]
    truth: PathBuf,
    /// For detection: the label of normal patterns; others are novel.
    #[arg(long, required_if_eq("kind", "detect"))]
    normal_label: Option<u32>,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Data(ppkit::Error),
}

impl From<ppkit::Error> for Failure {
    fn from(e: ppkit::Error) -> Self {
        Failure::Data(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.into())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(msg.into()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(msg) = init_threads(cli.threads) {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    let outcome = match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Dist(a) => dist(a),
        Command::Cluster(a) => cluster(a),
        Command::Classify(a) => classify(a),
        Command::Detect(a) => detect(a),
        Command::Eval(a) => evaluate(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn init_threads(flag: Option<usize>) -> std::result::Result<(), String> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("PPKIT_THREADS") {
            Ok(v) if !v.trim().is_empty() => Some(
                v.trim()
                    .parse()
                    .map_err(|_| format!("PPKIT_THREADS={v:?} is not a number"))?,
            ),
            _ => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err("thread count must be >= 1".into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn resolve_spec(a: &DistanceArgs, ds: &LabeledDataset, cutoff: Option<f64>) -> CliResult<DistanceSpec> {
    let cutoff = cutoff.or(a.cutoff);
    let family = match (a.distance, cutoff) {
        (FamilyArg::Ospa, Some(c)) => Family::Ospa { cutoff: c },
        (FamilyArg::Ospa, None) => return usage("--distance ospa needs --cutoff"),
        (_, Some(_)) => return usage("--cutoff only applies to --distance ospa"),
        (FamilyArg::Hausdorff, None) => Family::Hausdorff,
        (FamilyArg::Wasserstein, None) => Family::Wasserstein,
    };
    let base = match a.base {
        Some(BaseArg::Euclidean) => BaseDistance::Euclidean,
        Some(BaseArg::Discrete) => BaseDistance::Discrete,
        None => ds.kind().map(BaseDistance::for_kind).unwrap_or_default(),
    };
    let spec = DistanceSpec {
        family,
        order: a.p,
        base,
    };
    if let Err(e) = spec.validate() {
        return usage(e.to_string());
    }
    Ok(spec)
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

/// `run-manifest.json` next to the primary output. It records the resolved
/// configuration only, so identical runs give identical manifests.
fn write_manifest(out: &Path, command: &str, config: Value) -> CliResult<()> {
    let manifest = json!({
        "tool": "ppkit",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "output": out.file_name().map(|f| f.to_string_lossy().into_owned()),
        "config": config,
    });
    let path = out
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
        .join("run-manifest.json");
    write_text(&path, &io::to_json_pretty(&manifest)?)
}

fn path_str(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn spec_json(spec: &DistanceSpec) -> Value {
    serde_json::to_value(spec).expect("spec serializes")
}

fn gen(a: &GenArgs) -> CliResult<()> {
    let mut spec: ScenarioSpec = match (&a.scenario, &a.config) {
        (Some(name), _) => {
            let sc: Scenario = match name.parse() {
                Ok(s) => s,
                Err(e) => return usage(e.to_string()),
            };
            sc.spec(a.seed.unwrap_or(0))
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path)?;
            serde_json::from_str(&text).map_err(ppkit::Error::from)?
        }
        (None, None) => return usage("give --scenario or --config"),
    };
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    let ds = spec.generate()?;
    write_text(&a.out, &io::dataset_to_string(&ds))?;
    write_manifest(
        &a.out,
        "gen",
        json!({ "scenario": a.scenario, "spec": spec }),
    )
}

fn ids_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "matrix".into());
    out.with_file_name(format!("{stem}.ids.json"))
}

fn dist(a: &DistArgs) -> CliResult<()> {
    let ds = io::read_dataset(&a.input)?;
    let spec = resolve_spec(&a.distance, &ds, None)?;
    let d = setdist::distance_matrix(&ds, &spec, None)?;
    let mut buf = Vec::new();
    io::write_matrix_csv(&d, &mut buf)?;
    write_text(&a.out, &String::from_utf8(buf).expect("ascii"))?;
    write_text(&ids_path(&a.out), &io::matrix_ids_json(&ds))?;
    write_manifest(
        &a.out,
        "dist",
        json!({ "input": path_str(&a.input), "distance": spec_json(&spec) }),
    )
}

fn cluster(a: &ClusterArgs) -> CliResult<()> {
    let ds = io::read_dataset(&a.input)?;
    let spec = resolve_spec(&a.distance, &ds, None)?;
    let preference = match a.preference.as_str() {
        "median" => Preference::Median,
        "min" => Preference::Min,
        other => match other.parse::<f64>() {
            Ok(v) if v.is_finite() => Preference::Explicit(vec![v; ds.len()]),
            _ => return usage(format!("--preference {other:?}: expected median, min or a number")),
        },
    };
    let config = ApConfig {
        preference,
        damping: a.damping,
        threshold: a.theta,
        max_iterations: a.max_iterations,
        stable_iterations: a.stable_iterations,
    };
    if let Err(e) = config.validate() {
        return usage(e.to_string());
    }
    let d = setdist::distance_matrix(&ds, &spec, None)?;
    let (result, tuned): (ClusteringResult, Option<f64>) = match a.clusters {
        Some(0) => return usage("--clusters must be >= 1"),
        Some(target) => {
            let (pref, r) = ap::tune_preference(&d, target, &config, a.probes)?;
            (r, Some(pref))
        }
        None => (ap::cluster_distances(&d, &config)?, None),
    };
    let mut out = result.to_json();
    if let Some(p) = tuned {
        out["preference"] = json!(p);
    }
    out["ids"] = json!(ds.patterns().iter().map(|p| p.id()).collect::<Vec<_>>());
    write_text(&a.out, &io::to_json_pretty(&out)?)?;
    write_manifest(
        &a.out,
        "cluster",
        json!({
            "input": path_str(&a.input),
            "distance": spec_json(&spec),
            "preference": a.preference,
            "clusters": a.clusters,
            "probes": a.probes,
            "damping": a.damping,
            "theta": a.theta,
            "max_iterations": a.max_iterations,
            "stable_iterations": a.stable_iterations,
        }),
    )
}

fn classify(a: &ClassifyArgs) -> CliResult<()> {
    let ds = io::read_dataset(&a.input)?;
    let labels = ds.require_labels()?.to_vec();
    let aggregation: Aggregation = match a.aggregation.parse() {
        Ok(x) => x,
        Err(e) => return usage(e.to_string()),
    };
    let mut learned = None;
    if a.learn_cutoff {
        if !matches!(a.distance.distance, FamilyArg::Ospa) {
            return usage("--learn-cutoff needs --distance ospa");
        }
        if a.distance.cutoff.is_some() {
            return usage("--learn-cutoff and --cutoff are exclusive");
        }
        let cfg = CutoffSearchConfig::with_default_grid(&ds, a.distance.p, a.rho_k, aggregation)?;
        learned = Some(knn::learn_cutoff(&ds, &cfg)?);
    }
    let spec = resolve_spec(&a.distance, &ds, learned.as_ref().map(|s| s.cutoff))?;
    let ks: Vec<usize> = match a.k_max {
        Some(m) => (1..=m).collect(),
        None => vec![a.k],
    };
    if ks.iter().any(|&k| k == 0) || ks.is_empty() {
        return usage("k must be >= 1");
    }
    if a.folds < 2 || a.folds > ds.len() {
        return usage(format!("--folds must be in 2..={}", ds.len()));
    }
    let d = setdist::distance_matrix(&ds, &spec, None)?;
    let folds = eval::kfold(&ds, a.folds, a.seed, true)?;
    let acc = knn::cv_accuracy(&d, &labels, &folds, &ks)?;
    let summaries: Vec<Summary> = acc.iter().map(|v| Summary::of(v)).collect();
    let best = (0..ks.len())
        .max_by(|&x, &y| summaries[x].mean.total_cmp(&summaries[y].mean).then(y.cmp(&x)))
        .expect("at least one k");

    // Pooled out-of-fold predictions for the best k.
    let mut predicted = vec![0u32; ds.len()];
    for fold in &folds {
        let train = eval::complement(ds.len(), fold);
        let train_labels: Vec<u32> = train.iter().map(|&i| labels[i]).collect();
        for &q in fold {
            let row: Vec<f64> = train.iter().map(|&t| d.get(q, t)).collect();
            predicted[q] = knn::classify_from_distances(&row, &train_labels, ks[best].min(train.len()));
        }
    }
    let pooled = eval::classification_metrics(&predicted, &labels)?;

    let per_k: Vec<Value> = ks
        .iter()
        .zip(&summaries)
        .zip(&acc)
        .map(|((k, s), folds)| json!({ "k": k, "accuracy": s, "fold_accuracy": folds }))
        .collect();
    let report = json!({
        "distance": spec_json(&spec),
        "learned_cutoff": learned,
        "folds": a.folds,
        "per_k": per_k,
        "best_k": ks[best],
        "best_accuracy": summaries[best],
        "pooled": pooled,
    });
    write_text(&a.out, &io::to_json_pretty(&report)?)?;
    if let Some(csv) = &a.csv {
        let mut text = String::from("k,mean_accuracy,std_accuracy\n");
        for (k, s) in ks.iter().zip(&summaries) {
            text += &format!("{k},{},{}\n", io::format_sig17(s.mean), io::format_sig17(s.std));
        }
        write_text(csv, &text)?;
    }
    write_manifest(
        &a.out,
        "classify",
        json!({
            "input": path_str(&a.input),
            "distance": spec_json(&spec),
            "ks": ks,
            "folds": a.folds,
            "seed": a.seed,
            "learn_cutoff": a.learn_cutoff,
            "aggregation": aggregation,
            "rho_k": a.rho_k,
        }),
    )
}

fn detect(a: &DetectArgs) -> CliResult<()> {
    let normal = io::read_dataset(&a.normal)?;
    let candidates = io::read_dataset(&a.candidates)?;
    let mut selection = None;
    if a.select_cutoff {
        if !matches!(a.distance.distance, FamilyArg::Ospa) {
            return usage("--select-cutoff needs --distance ospa");
        }
        if a.distance.cutoff.is_some() {
            return usage("--select-cutoff and --cutoff are exclusive");
        }
        let base = match a.distance.base {
            Some(BaseArg::Discrete) => BaseDistance::Discrete,
            Some(BaseArg::Euclidean) => BaseDistance::Euclidean,
            None => normal.kind().map(BaseDistance::for_kind).unwrap_or_default(),
        };
        selection = Some(novelty::select_cutoff(&normal, a.distance.p, a.select_percentile, base)?);
    }
    let spec = resolve_spec(&a.distance, &normal, selection.map(|s| s.cutoff))?;
    let scoring = match a.scoring {
        ScoringArg::Distance => Scoring::Distance,
        ScoringArg::UncappedOspa => {
            if spec.cutoff().is_none() {
                return usage("--scoring uncapped-ospa needs --distance ospa");
            }
            Scoring::UncappedOspa
        }
    };
    if !(0.0..=100.0).contains(&a.percentile) {
        return usage("--percentile must be in [0, 100]");
    }
    let model = NoveltyModel::fit(normal, spec, scoring, a.percentile)?;
    let verdicts = model.detect(&candidates)?;
    let mut buf = Vec::new();
    novelty::write_report(&verdicts, &mut buf)?;
    write_text(&a.out, &String::from_utf8(buf).expect("utf-8"))?;
    write_manifest(
        &a.out,
        "detect",
        json!({
            "normal": path_str(&a.normal),
            "candidates": path_str(&a.candidates),
            "distance": spec_json(&spec),
            "selected_cutoff": selection,
            "percentile": a.percentile,
            "threshold": model.threshold(),
            "scoring": a.scoring,
        }),
    )
}

fn evaluate(a: &EvalArgs) -> CliResult<()> {
    let truth = io::read_dataset(&a.truth)?;
    let labels = truth.require_labels()?;
    let text = fs::read_to_string(&a.result)?;
    let report = match a.kind {
        EvalKind::Cluster => {
            let v: Value = serde_json::from_str(&text).map_err(ppkit::Error::from)?;
            let r = ClusteringResult::from_json(&v)?;
            let predicted: Vec<u32> = r.labels.iter().map(|&k| k as u32 + 1).collect();
            let m = eval::clustering_metrics(&predicted, labels)?;
            json!({ "kind": "cluster", "n_clusters": r.n_clusters(), "metrics": m })
        }
        EvalKind::Detect => {
            let normal_label = a.normal_label.expect("required by clap");
            let verdicts: Vec<Verdict> = text
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(serde_json::from_str)
                .collect::<std::result::Result<_, _>>()
                .map_err(ppkit::Error::from)?;
            if verdicts.len() != truth.len() {
                return Err(ppkit::Error::LengthMismatch(verdicts.len(), truth.len()).into());
            }
            for (v, p) in verdicts.iter().zip(truth.patterns()) {
                if v.id != p.id() {
                    return Err(ppkit::Error::Schema(format!(
                        "report id {} does not match truth id {}",
                        v.id,
                        p.id()
                    ))
                    .into());
                }
            }
            let flags: Vec<bool> = verdicts.iter().map(|v| v.novel).collect();
            let novel: Vec<bool> = labels.iter().map(|&l| l != normal_label).collect();
            let m = eval::detection_metrics(&flags, &novel)?;
            json!({ "kind": "detect", "metrics": m })
        }
    };
    write_text(&a.out, &io::to_json_pretty(&report)?)?;
    write_manifest(
        &a.out,
        "eval",
        json!({
            "kind": a.kind,
            "result": path_str(&a.result),
            "truth": path_str(&a.truth),
            "normal_label": a.normal_label,
        }),
    )
}
