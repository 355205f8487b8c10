//! Experiment configuration: one TOML file per run, overridable per key.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use pgan_core::training::{EvalMode, LabelFallback, Lipschitz, Method, TrainingConfig};

/// Environment variable naming the root under which runs are written.
pub const OUT_DIR_ENV: &str = "PGAN_OUT_DIR";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("bad override `{0}`: expected key=value")]
    Override(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    Plain,
    Oversample,
    Smote,
    VanillaGan,
    Cgan,
    Pgan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvalModeName {
    #[serde(rename = "retrained-c")]
    RetrainedC,
    #[serde(rename = "adversarial-c")]
    AdversarialC,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    Blobs {
        centers: Vec<Vec<f64>>,
        #[serde(default = "one")]
        stddev: f64,
    },
    Rings {
        radii: Vec<f64>,
        #[serde(default = "tenth")]
        noise: f64,
    },
    /// Paired IDX image and label files.
    Idx {
        images: PathBuf,
        labels: PathBuf,
        /// Digits to keep, relabelled 0.. in this order.
        #[serde(default)]
        classes: Option<Vec<u8>>,
        #[serde(default = "one_usize")]
        downscale: usize,
    },
    /// `f0,...,label` CSV with every row used as given.
    Csv {
        path: PathBuf,
        #[serde(default)]
        n_classes: Option<usize>,
    },
}

fn one() -> f64 {
    1.0
}
fn tenth() -> f64 {
    0.1
}
fn one_usize() -> usize {
    1
}
fn smote_k() -> usize {
    5
}
fn test_fraction() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    #[serde(flatten)]
    pub source: Source,
    /// Training rows per class. Synthetic sources generate exactly these;
    /// file sources subsample to them after the test split.
    #[serde(default)]
    pub counts: Option<Vec<usize>>,
    #[serde(default)]
    pub seed: u64,
    /// Balanced held-out rows per class; takes precedence over the fraction.
    #[serde(default)]
    pub test_per_class: Option<usize>,
    #[serde(default = "test_fraction")]
    pub test_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSection {
    pub epochs: usize,
    pub j_steps: usize,
    pub batch_size: usize,
    pub latent_dim: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub gp_lambda: f64,
    /// `"gradient_penalty"` or `"clip"`.
    pub lipschitz: String,
    pub clip: f64,
    pub lambda_c: f64,
    pub lambda_d: f64,
    pub bank_size: usize,
    pub seed: u64,
    /// `"uniform_minority"` or `"uniform_all"`.
    pub label_fallback: String,
    pub ae_epochs: usize,
    pub ae_lr: f64,
    pub jitter: f64,
    /// Empty means the identity feature map.
    pub extractor_hidden: Vec<usize>,
    pub feature_dim: usize,
    pub classifier_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
    pub generator_hidden: Vec<usize>,
}

impl Default for TrainingSection {
    fn default() -> Self {
        let d = TrainingConfig::default();
        Self {
            epochs: d.epochs,
            j_steps: d.j_steps,
            batch_size: d.batch_size,
            latent_dim: d.latent_dim,
            lr: d.lr,
            beta1: d.beta1,
            beta2: d.beta2,
            epsilon: d.epsilon,
            gp_lambda: d.gp_lambda,
            lipschitz: "gradient_penalty".into(),
            clip: 0.01,
            lambda_c: d.lambda_c,
            lambda_d: d.lambda_d,
            bank_size: d.bank_size,
            seed: d.seed,
            label_fallback: "uniform_minority".into(),
            ae_epochs: d.ae_epochs,
            ae_lr: d.ae_lr,
            jitter: d.jitter,
            extractor_hidden: d.extractor_hidden.unwrap_or_default(),
            feature_dim: d.feature_dim,
            classifier_hidden: d.classifier_hidden,
            critic_hidden: d.critic_hidden,
            generator_hidden: d.generator_hidden,
        }
    }
}

impl TrainingSection {
    pub fn to_core(&self) -> Result<TrainingConfig, ConfigError> {
        let lipschitz = match self.lipschitz.as_str() {
            "gradient_penalty" => Lipschitz::GradientPenalty,
            "clip" => Lipschitz::Clip(self.clip),
            other => return Err(ConfigError::Invalid(format!("unknown lipschitz `{other}`"))),
        };
        let label_fallback = match self.label_fallback.as_str() {
            "uniform_minority" => LabelFallback::UniformMinority,
            "uniform_all" => LabelFallback::UniformAll,
            other => return Err(ConfigError::Invalid(format!("unknown label_fallback `{other}`"))),
        };
        let cfg = TrainingConfig {
            epochs: self.epochs,
            j_steps: self.j_steps,
            batch_size: self.batch_size,
            latent_dim: self.latent_dim,
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
            gp_lambda: self.gp_lambda,
            lipschitz,
            lambda_c: self.lambda_c,
            lambda_d: self.lambda_d,
            bank_size: self.bank_size,
            seed: self.seed,
            label_fallback,
            ae_epochs: self.ae_epochs,
            ae_lr: self.ae_lr,
            jitter: self.jitter,
            extractor_hidden: (!self.extractor_hidden.is_empty()).then(|| self.extractor_hidden.clone()),
            feature_dim: self.feature_dim,
            classifier_hidden: self.classifier_hidden.clone(),
            critic_hidden: self.critic_hidden.clone(),
            generator_hidden: self.generator_hidden.clone(),
        };
        cfg.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub mode: EvalModeName,
    /// Write a P-GAN snapshot every this many iterations; 0 disables.
    pub checkpoint_every: usize,
    /// Generated points per class drawn in the 2-D sample plot.
    pub plot_samples: usize,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            mode: EvalModeName::RetrainedC,
            checkpoint_every: 0,
            plot_samples: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub method: MethodName,
    #[serde(default = "smote_k")]
    pub smote_k: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub training: TrainingSection,
    #[serde(default)]
    pub eval: EvalSection,
}

impl ExperimentConfig {
    pub fn method(&self) -> Method {
        match self.method {
            MethodName::Plain => Method::Plain,
            MethodName::Oversample => Method::Oversample,
            MethodName::Smote => Method::Smote { k: self.smote_k },
            MethodName::VanillaGan => Method::VanillaGan,
            MethodName::Cgan => Method::Cgan,
            MethodName::Pgan => Method::PGan,
        }
    }

    pub fn eval_mode(&self) -> EvalMode {
        match self.eval.mode {
            EvalModeName::RetrainedC => EvalMode::RetrainedC,
            EvalModeName::AdversarialC => EvalMode::AdversarialC,
        }
    }

    pub fn training(&self) -> Result<TrainingConfig, ConfigError> {
        self.training.to_core()
    }

    /// Parses TOML text, applies `key=value` overrides on dotted paths, then
    /// validates. Relative dataset paths resolve against `base`.
    pub fn from_toml(text: &str, overrides: &[String], base: Option<&Path>) -> Result<Self, ConfigError> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let mut cfg: ExperimentConfig =
            toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        if let Some(base) = base {
            cfg.resolve_paths(base);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text, overrides, path.parent())
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut self.dataset.source {
            Source::Idx { images, labels, .. } => {
                fix(images);
                fix(labels);
            }
            Source::Csv { path, .. } => fix(path),
            _ => {}
        }
        if let Some(out) = &mut self.output_dir {
            fix(out);
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad(format!("run name `{}` must be non-empty without path separators", self.name));
        }
        self.training()?;
        let ds = &self.dataset;
        match &ds.source {
            Source::Blobs { centers, stddev } => {
                let Some(counts) = &ds.counts else { return bad("blobs need `counts`".into()) };
                if centers.len() != counts.len() {
                    return bad(format!("{} centers for {} classes", centers.len(), counts.len()));
                }
                if !(*stddev > 0.0) {
                    return bad("stddev must be positive".into());
                }
            }
            Source::Rings { radii, .. } => {
                let Some(counts) = &ds.counts else { return bad("rings need `counts`".into()) };
                if radii.len() != counts.len() {
                    return bad(format!("{} radii for {} classes", radii.len(), counts.len()));
                }
            }
            Source::Idx { downscale, .. } if *downscale == 0 => return bad("downscale must be at least 1".into()),
            _ => {}
        }
        if !(0.0..1.0).contains(&ds.test_fraction) {
            return bad("test_fraction must be in [0, 1)".into());
        }
        if self.method == MethodName::Smote && self.smote_k == 0 {
            return bad("smote_k must be positive".into());
        }
        Ok(())
    }

    /// Canonical TOML rendering; hashed into every manifest.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Explicit `--out`, then the config's `output_dir`, then
    /// `$PGAN_OUT_DIR/<name>`, then `runs/<name>`.
    pub fn output_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(p) = flag {
            return p.to_path_buf();
        }
        if let Some(p) = &self.output_dir {
            return p.clone();
        }
        match std::env::var_os(OUT_DIR_ENV) {
            Some(root) if !root.is_empty() => PathBuf::from(root).join(&self.name),
            _ => PathBuf::from("runs").join(&self.name),
        }
    }
}

/// `a.b.c=value`, where the value is read as a TOML literal and falls back
/// to a bare string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), ConfigError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| ConfigError::Override(assignment.into()))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(ConfigError::Override(assignment.into()));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.into()));
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().expect("non-empty key");
    let mut cur = table;
    for p in parts {
        let entry = cur.entry(p).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| ConfigError::Override(format!("{assignment} (`{p}` is not a table)")))?;
    }
    cur.insert(last.into(), value);
    Ok(())
}
