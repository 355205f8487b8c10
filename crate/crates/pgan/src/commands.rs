//! The five subcommands. Each takes a parsed config and writes its artifacts
//! plus manifest entries into the run directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use pgan_core::data::{
    apply_imbalance, class_priors, make_blobs, make_rings, split_per_class, split_stratified, Dataset,
};
use pgan_core::metrics::{MetricsReport, UncertaintyReport};
use pgan_core::models::{ConvexHull, PGanModel};
use pgan_core::nn::grad_check_suite;
use pgan_core::rng::Rng;
use pgan_core::training::{run_method_with, Clock, Evaluation, Method, NoClock, Trained};
use pgan_core::{Error as CoreError, Tensor};

use crate::checkpoint::Checkpoint;
use crate::config::{ConfigError, ExperimentConfig, Source};
use crate::csvio;
use crate::idx::{load_idx, IdxOptions};
use crate::manifest::{sha256_hex, Manifest};
use crate::plot;

pub const TRAIN_CSV: &str = "train.csv";
pub const TEST_CSV: &str = "test.csv";
pub const CHECKPOINT: &str = "checkpoint.pgck";
/// Gradient checks must stay below this relative error.
pub const GRADCHECK_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the configured output directory.
    pub out: Option<PathBuf>,
    /// Record wall-clock time in curves and manifests.
    pub timestamps: bool,
}

struct WallClock(Instant);

impl Clock for WallClock {
    fn elapsed_ms(&self) -> f64 {
        self.0.elapsed().as_secs_f64() * 1e3
    }
}

fn clock(opts: &RunOptions) -> Box<dyn Clock> {
    if opts.timestamps {
        Box::new(WallClock(Instant::now()))
    } else {
        Box::new(NoClock)
    }
}

fn run_dir(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<PathBuf> {
    let dir = cfg.output_dir(opts.out.as_deref());
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    Ok(dir)
}

fn config_hash(cfg: &ExperimentConfig) -> String {
    sha256_hex(cfg.canonical().as_bytes())
}

/// Builds `(train, test)` from the dataset section.
pub fn build_splits(cfg: &ExperimentConfig) -> Result<(Dataset, Dataset)> {
    let ds = &cfg.dataset;
    let split = |full: &Dataset, seed: u64| -> Result<(Dataset, Dataset)> {
        Ok(match ds.test_per_class {
            Some(n) => split_per_class(full, n, seed)?,
            None => split_stratified(full, ds.test_fraction, seed)?,
        })
    };
    let seed = ds.seed;
    match &ds.source {
        Source::Blobs { .. } | Source::Rings { .. } => {
            let counts = ds.counts.clone().expect("validated");
            // Generate the held-out rows alongside so the test set is balanced.
            let extra = ds.test_per_class.unwrap_or(0);
            let total: Vec<usize> = counts.iter().map(|c| c + extra).collect();
            let mut full = match &ds.source {
                Source::Blobs { centers, stddev } => make_blobs(&total, centers, *stddev, seed)?,
                Source::Rings { radii, noise } => make_rings(&total, radii, *noise, seed)?,
                _ => unreachable!(),
            };
            full.name = cfg.name.clone();
            split(&full, seed ^ 0x7e57)
        }
        Source::Idx { images, labels, classes, downscale } => {
            let opts = IdxOptions { downscale: *downscale, classes: classes.clone() };
            let mut full = load_idx(images, labels, &opts)?;
            full.name = cfg.name.clone();
            let (train, test) = split(&full, seed ^ 0x7e57)?;
            let train = match &ds.counts {
                Some(c) => apply_imbalance(&train, c, seed)?,
                None => train,
            };
            Ok((train, test))
        }
        Source::Csv { path, n_classes } => {
            let full = csvio::read_dataset(path, *n_classes, &cfg.name)?;
            let (train, test) = split(&full, seed ^ 0x7e57)?;
            let train = match &ds.counts {
                Some(c) => apply_imbalance(&train, c, seed)?,
                None => train,
            };
            Ok((train, test))
        }
    }
}

#[derive(Debug, Clone)]
pub struct Prepared {
    pub dir: PathBuf,
    pub train: Dataset,
    pub test: Dataset,
    pub manifest_hash: String,
}

/// Writes the train and test splits, the priors table and the canonical
/// config.
pub fn prepare(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Prepared> {
    let dir = run_dir(cfg, opts)?;
    let (train, test) = build_splits(cfg)?;
    let priors = class_priors(&train)?;
    csvio::write_dataset(&train, &dir.join(TRAIN_CSV))?;
    csvio::write_dataset(&test, &dir.join(TEST_CSV))?;
    csvio::write_priors(&priors, &train.counts(), &dir.join("priors.csv"))?;
    csvio::write_text(&dir.join("config.toml"), &cfg.canonical())?;
    let hash = config_hash(cfg);
    let mut m = Manifest::open(&dir)?;
    m.priors = priors.priors.clone();
    m.train_counts = train.counts();
    m.test_counts = test.counts();
    for f in [TRAIN_CSV, TEST_CSV, "priors.csv", "config.toml"] {
        m.record(&dir, f, "prepare", &hash)?;
    }
    m.save(&dir, opts.timestamps)?;
    Ok(Prepared { manifest_hash: m.hash(), dir, train, test })
}

/// Reads the splits written by [`prepare`].
pub fn load_prepared(dir: &Path, name: &str) -> Result<(Dataset, Dataset)> {
    let m = Manifest::open(dir)?;
    let train_path = dir.join(TRAIN_CSV);
    if m.train_counts.is_empty() || !train_path.exists() {
        bail!("no prepared dataset in {}; run `prepare` first", dir.display());
    }
    let k = Some(m.train_counts.len());
    Ok((
        csvio::read_dataset(&train_path, k, name)?,
        csvio::read_dataset(&dir.join(TEST_CSV), k, name)?,
    ))
}

fn checkpoint_meta(cfg: &ExperimentConfig, train: &Dataset) -> BTreeMap<String, String> {
    BTreeMap::from([
        ("config_hash".to_string(), config_hash(cfg)),
        ("eval_mode".into(), cfg.eval_mode().name().into()),
        ("input_dim".into(), train.dim().to_string()),
        ("n_classes".into(), train.n_classes.to_string()),
        ("smote_k".into(), cfg.smote_k.to_string()),
    ])
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub dir: PathBuf,
    pub trained: Trained,
}

/// Trains the configured method on the prepared split and writes
/// `checkpoint.pgck`, `losses.csv` and `losses.svg`.
pub fn train(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<TrainOutput> {
    let dir = run_dir(cfg, opts)?;
    let (train, _) = load_prepared(&dir, &cfg.name)?;
    let tcfg = cfg.training()?;
    let hash = config_hash(cfg);
    let meta = checkpoint_meta(cfg, &train);
    let every = cfg.eval.checkpoint_every;
    let mut snapshots = Vec::new();
    let mut snapshot_err = None;
    let clock = clock(opts);
    let result = run_method_with(&train, &tcfg, cfg.method(), cfg.eval_mode(), clock.as_ref(), &mut |it, model: &PGanModel| {
        if every == 0 || it == 0 || it % every != 0 || snapshot_err.is_some() {
            return;
        }
        let name = format!("checkpoint-{it:06}.pgck");
        let mut ck = Checkpoint::from_pgan(model, meta.clone());
        ck.meta.insert("iteration".into(), it.to_string());
        match ck.save(&dir.join(&name)) {
            Ok(()) => snapshots.push(name),
            Err(e) => snapshot_err = Some(e),
        }
    });
    if let Some(e) = snapshot_err {
        return Err(e);
    }
    let trained = match result {
        Ok(t) => t,
        Err(CoreError::Divergence(d)) => {
            // Keep the finite part of the curve for diagnosis.
            csvio::write_curve(&d.curve, &dir.join("losses.csv"))?;
            return Err(CoreError::Divergence(d).into());
        }
        Err(e) => return Err(e.into()),
    };
    Checkpoint::from_trained(&trained, meta).save(&dir.join(CHECKPOINT))?;
    csvio::write_curve(&trained.curve, &dir.join("losses.csv"))?;
    let title = format!("{} ({})", cfg.name, cfg.method().name());
    csvio::write_text(&dir.join("losses.svg"), &plot::loss_plot(&trained.curve, &title))?;
    let mut m = Manifest::open(&dir)?;
    for f in [CHECKPOINT, "losses.csv", "losses.svg"].into_iter().map(String::from).chain(snapshots) {
        m.record(&dir, &f, "train", &hash)?;
    }
    m.save(&dir, opts.timestamps)?;
    Ok(TrainOutput { dir, trained })
}

fn method_from_meta(ck: &Checkpoint) -> Result<Method> {
    let k = ck.meta.get("smote_k").and_then(|v| v.parse().ok()).unwrap_or(5);
    Ok(match ck.meta.get("method").map(String::as_str) {
        Some("plain") => Method::Plain,
        Some("oversample") => Method::Oversample,
        Some("smote") => Method::Smote { k },
        Some("vanilla_gan") => Method::VanillaGan,
        Some("cgan") => Method::Cgan,
        Some("pgan") => Method::PGan,
        other => bail!("checkpoint method {other:?} is not recognised"),
    })
}

/// Rebuilds a scored model from a checkpoint and the split it was trained on.
pub fn restore(ck: &Checkpoint, train: &Dataset) -> Result<Trained> {
    let extractor = ck.extractor()?;
    if extractor.input_dim() != train.dim() {
        bail!(
            "checkpoint expects {} input features but the dataset has {}",
            extractor.input_dim(),
            train.dim()
        );
    }
    Ok(Trained {
        method: method_from_meta(ck)?,
        extractor,
        classifier: ck.classifier()?.clone(),
        curve: Default::default(),
        pgan: ck.pgan_model(train)?,
        train_counts: train.counts(),
    })
}

#[derive(Debug, Clone)]
pub struct EvalOutput {
    pub dir: PathBuf,
    pub method: Method,
    pub evaluation: Evaluation,
}

/// Scores a checkpoint on the held-out split. Writes `metrics.csv`,
/// `uncertainty.csv`, `summary.txt` and, for 2-D data, `boundary.svg` and
/// `samples.svg`.
pub fn evaluate(cfg: &ExperimentConfig, opts: &RunOptions, checkpoint: Option<&Path>) -> Result<EvalOutput> {
    let dir = run_dir(cfg, opts)?;
    let (train, test) = load_prepared(&dir, &cfg.name)?;
    let ck_path = checkpoint.map_or_else(|| dir.join(CHECKPOINT), Path::to_path_buf);
    let ck = Checkpoint::load(&ck_path)?;
    let trained = restore(&ck, &train)?;
    if test.dim() != train.dim() {
        bail!("test split has {} features, training split {}", test.dim(), train.dim());
    }
    let evaluation = trained.evaluate(&test)?;
    let hash = config_hash(cfg);
    csvio::write_metrics(&evaluation.metrics, &dir.join("metrics.csv"))?;
    csvio::write_uncertainty(&evaluation.uncertainty, &dir.join("uncertainty.csv"))?;
    let summary = csvio::summary_text(trained.method.name(), &evaluation.metrics, &evaluation.uncertainty);
    csvio::write_text(&dir.join("summary.txt"), &summary)?;
    let mut files = vec!["metrics.csv", "uncertainty.csv", "summary.txt"];
    if train.dim() == 2 {
        write_2d_plots(cfg, &dir, &trained, &train)?;
        files.extend(["boundary.svg", "samples.svg"]);
    }
    let mut m = Manifest::open(&dir)?;
    for f in files {
        m.record(&dir, f, "evaluate", &hash)?;
    }
    m.save(&dir, opts.timestamps)?;
    Ok(EvalOutput { dir, method: trained.method, evaluation })
}

fn points(t: &Tensor) -> Vec<[f64; 2]> {
    (0..t.rows()).map(|i| [t.row(i)[0], t.row(i)[1]]).collect()
}

fn write_2d_plots(cfg: &ExperimentConfig, dir: &Path, trained: &Trained, train: &Dataset) -> Result<()> {
    let pts = points(&train.features);
    let predict = |cells: &[[f64; 2]]| -> Vec<usize> {
        let flat = cells.iter().flatten().copied().collect();
        let t = Tensor::matrix(cells.len(), 2, flat).expect("sized");
        trained.predict(&t).map(|p| p.argmax_rows()).unwrap_or_else(|_| vec![0; cells.len()])
    };
    let title = format!("{} decision regions", cfg.method().name());
    csvio::write_text(&dir.join("boundary.svg"), &plot::boundary_plot(&pts, &train.labels, 60, &predict, &title))?;

    let hulls: Vec<(usize, Vec<[f64; 2]>)> = (0..train.n_classes)
        .filter_map(|c| ConvexHull::new(&train.class_features(c)).vertices().map(|v| (c, v.to_vec())))
        .collect();
    // Generated points live in feature space; they share the input plane
    // only when the feature map is the identity.
    let (gen, gen_labels) = match &trained.pgan {
        Some(model) if trained.extractor.is_identity() && cfg.eval.plot_samples > 0 => {
            let labels: Vec<usize> = (0..train.n_classes).flat_map(|c| vec![c; cfg.eval.plot_samples]).collect();
            let mut rng = Rng::new(cfg.training.seed ^ 0x9107);
            (points(&model.generate(&labels, &mut rng)?), labels)
        }
        _ => (Vec::new(), Vec::new()),
    };
    let title = format!("{} samples and class hulls", cfg.method().name());
    csvio::write_text(
        &dir.join("samples.svg"),
        &plot::samples_plot(&pts, &train.labels, &hulls, &gen, &gen_labels, &title),
    )?;
    Ok(())
}

/// One line of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub run: String,
    pub method: String,
    pub macro_f1: f64,
    pub average_accuracy: f64,
    pub uncertainty: [f64; 4],
}

impl CompareRow {
    fn new(run: &str, method: Method, metrics: &MetricsReport, unc: &UncertaintyReport) -> Self {
        Self {
            run: run.into(),
            method: method.name().into(),
            macro_f1: metrics.macro_f1,
            average_accuracy: metrics.average_accuracy,
            uncertainty: csvio::uncertainty_rows(unc).map(|(_, m)| m.mean),
        }
    }
}

/// Runs prepare, train and evaluate for every config in order, then writes
/// `comparison.csv` and `comparison.txt` into `table_dir`. All runs must
/// share one test split.
pub fn compare(configs: &[ExperimentConfig], opts: &RunOptions, table_dir: &Path) -> Result<Vec<CompareRow>> {
    if configs.is_empty() {
        return Err(ConfigError::Invalid("compare needs at least one config".into()).into());
    }
    let mut names: Vec<&str> = configs.iter().map(|c| c.name.as_str()).collect();
    names.sort_unstable();
    if names.windows(2).any(|w| w[0] == w[1]) {
        return Err(ConfigError::Invalid("compared runs need distinct names".into()).into());
    }
    let mut rows = Vec::new();
    let mut split_hash: Option<(String, String)> = None;
    for cfg in configs {
        let run_opts = RunOptions {
            out: opts.out.as_ref().map(|o| o.join(&cfg.name)),
            ..opts.clone()
        };
        let prepared = prepare(cfg, &run_opts)?;
        let test_hash = sha256_hex(&fs::read(prepared.dir.join(TEST_CSV))?);
        match &split_hash {
            Some((first, h)) if *h != test_hash => {
                bail!("split mismatch: `{}` and `{first}` were evaluated on different test sets", cfg.name)
            }
            None => split_hash = Some((cfg.name.clone(), test_hash)),
            _ => {}
        }
        train(cfg, &run_opts)?;
        let e = evaluate(cfg, &run_opts, None)?;
        rows.push(CompareRow::new(&cfg.name, e.method, &e.evaluation.metrics, &e.evaluation.uncertainty));
    }
    fs::create_dir_all(table_dir).with_context(|| format!("cannot create {}", table_dir.display()))?;
    write_comparison(&rows, table_dir)?;
    Ok(rows)
}

fn write_comparison(rows: &[CompareRow], dir: &Path) -> Result<()> {
    let header = "run,method,macro_f1,average_accuracy,least_confidence,margin_of_confidence,ratio_of_confidence,entropy";
    let mut csv = format!("{header}\n");
    let mut txt = format!(
        "{:<20} {:<12} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}\n",
        "run", "method", "macroF1", "avgAcc", "lc", "margin", "ratio", "entropy"
    );
    for r in rows {
        let nums: Vec<String> = [r.macro_f1, r.average_accuracy]
            .iter()
            .chain(&r.uncertainty)
            .map(|&v| csvio::fmt_f64(v))
            .collect();
        csv.push_str(&format!("{},{},{}\n", r.run, r.method, nums.join(",")));
        let u = r.uncertainty;
        txt.push_str(&format!(
            "{:<20} {:<12} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}\n",
            r.run, r.method, r.macro_f1, r.average_accuracy, u[0], u[1], u[2], u[3]
        ));
    }
    csvio::write_text(&dir.join("comparison.csv"), &csv)?;
    csvio::write_text(&dir.join("comparison.txt"), &txt)
}

#[derive(Debug, Clone)]
pub struct GradcheckReport {
    pub cases: usize,
    pub worst: f64,
    pub failures: Vec<String>,
}

/// Finite-difference check of every activation and loss pairing.
pub fn gradcheck(seeds: u64) -> GradcheckReport {
    let cases = grad_check_suite(seeds);
    let worst = cases.iter().map(|c| c.error).fold(0.0, f64::max);
    let failures = cases
        .iter()
        .filter(|c| !(c.error < GRADCHECK_TOLERANCE))
        .map(|c| format!("seed {} hidden {:?} output {:?}: {:.3e}", c.seed, c.hidden, c.output, c.error))
        .collect();
    GradcheckReport { cases: cases.len(), worst, failures }
}
