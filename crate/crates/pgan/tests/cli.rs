use std::fs;
use std::path::{Path, PathBuf};

use pgan::checkpoint::Checkpoint;
use pgan::cli::{self, EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_OK, EXIT_OTHER};
use pgan::commands::{self, load_prepared, restore, RunOptions};
use pgan::config::ExperimentConfig;
use pgan::idx::{encode_images, encode_labels, parse_images, parse_labels, IdxImages};
use pgan::manifest::Manifest;
use pgan_core::data::class_priors;

const BLOBS: &str = r#"
name = "blobs"
method = "pgan"
[dataset]
kind = "blobs"
centers = [[0.0, 0.0], [4.0, 0.0], [2.0, 3.5]]
stddev = 0.6
counts = [120, 24, 8]
test_per_class = 20
seed = 3
[training]
epochs = 2
batch_size = 16
bank_size = 8
ae_epochs = 2
classifier_hidden = [8]
critic_hidden = [8]
generator_hidden = [8]
"#;

fn cfg(text: &str, overrides: &[&str]) -> ExperimentConfig {
    let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    ExperimentConfig::from_toml(text, &o, None).unwrap()
}

fn opts(dir: &Path) -> RunOptions {
    RunOptions { out: Some(dir.to_path_buf()), timestamps: false }
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("exp.toml");
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> i32 {
    cli::run(std::iter::once("pgan").chain(args.iter().copied()))
}

#[test]
fn prepare_writes_exact_counts_and_a_stable_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let c = cfg(BLOBS, &[]);
    let a = commands::prepare(&c, &opts(tmp.path())).unwrap();
    assert_eq!(a.train.counts(), vec![120, 24, 8]);
    assert_eq!(a.test.counts(), vec![20, 20, 20]);
    let (train, test) = load_prepared(tmp.path(), "blobs").unwrap();
    assert_eq!(train.features, a.train.features);
    assert_eq!(test.labels, a.test.labels);
    let b = commands::prepare(&c, &opts(tmp.path())).unwrap();
    assert_eq!(a.manifest_hash, b.manifest_hash);
    let csv = fs::read_to_string(tmp.path().join("train.csv")).unwrap();
    assert!(csv.starts_with("f0,f1,label\n"));
    assert!(!csv.contains('\r'));
}

/// 10 classes of tiny 2x2 images with per-class counts from a list.
fn synthetic_idx(dir: &Path, counts: &[usize]) -> (PathBuf, PathBuf) {
    let mut pixels = Vec::new();
    let mut labels = Vec::new();
    for (c, &n) in counts.iter().enumerate() {
        for i in 0..n {
            pixels.extend([c as u8 * 20, (i % 200) as u8, 7, c as u8]);
            labels.push(c as u8);
        }
    }
    let img = IdxImages { count: labels.len(), rows: 2, cols: 2, pixels };
    let (pi, pl) = (dir.join("img.idx"), dir.join("lab.idx"));
    fs::write(&pi, encode_images(&img)).unwrap();
    fs::write(&pl, encode_labels(&labels)).unwrap();
    (pi, pl)
}

#[test]
fn mnist_count_list_sets_the_priors() {
    let tmp = tempfile::tempdir().unwrap();
    let list = [5000usize, 4000, 3000, 2000, 1500, 1000, 500, 250, 100, 50];
    let total: usize = list.iter().sum();
    // Hand arithmetic on the list: 50 of 17400 rows.
    assert_eq!(total, 17400);
    let have: Vec<usize> = list.iter().map(|n| n + 10).collect();
    let (pi, pl) = synthetic_idx(tmp.path(), &have);
    let text = format!(
        "name = \"mnist\"\nmethod = \"plain\"\n[dataset]\nkind = \"idx\"\nimages = {:?}\nlabels = {:?}\ncounts = {:?}\ntest_per_class = 10\n",
        pi, pl, list
    );
    let c = ExperimentConfig::from_toml(&text, &[], None).unwrap();
    let p = commands::prepare(&c, &opts(&tmp.path().join("run"))).unwrap();
    let m = Manifest::open(&tmp.path().join("run")).unwrap();
    assert_eq!(m.train_counts, list.to_vec());
    assert!((m.priors[9] - 50.0 / 17400.0).abs() < 1e-12);
    assert!((m.priors[9] - 0.00287).abs() < 5e-6);
    assert_eq!(class_priors(&p.train).unwrap().priors, m.priors);
}

#[test]
fn idx_round_trip_on_the_digit_subset() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let ib = fs::read(dir.join("mnist358-images-idx3-ubyte")).unwrap();
    let lb = fs::read(dir.join("mnist358-labels-idx1-ubyte")).unwrap();
    let img = parse_images(&ib).unwrap();
    let labels = parse_labels(&lb).unwrap();
    assert_eq!((img.count, img.rows, img.cols), (1500, 28, 28));
    assert_eq!(encode_images(&img), ib);
    assert_eq!(encode_labels(&labels), lb);
}

#[test]
fn missing_idx_file_names_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "name = \"m\"\nmethod = \"plain\"\n[dataset]\nkind = \"idx\"\nimages = \"nope-images\"\nlabels = \"nope-labels\"\n";
    let c = ExperimentConfig::from_toml(text, &[], Some(tmp.path())).unwrap();
    let err = commands::prepare(&c, &opts(tmp.path())).unwrap_err();
    assert!(format!("{err:#}").contains("nope-images"), "{err:#}");
}

#[test]
fn train_writes_three_artifacts_deterministically() {
    let tmp = tempfile::tempdir().unwrap();
    let c = cfg(BLOBS, &[]);
    commands::prepare(&c, &opts(tmp.path())).unwrap();
    let t = commands::train(&c, &opts(tmp.path())).unwrap();
    for f in ["checkpoint.pgck", "losses.csv", "losses.svg"] {
        assert!(tmp.path().join(f).exists(), "{f}");
    }
    let svg = fs::read_to_string(tmp.path().join("losses.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 3);
    let first = fs::read(tmp.path().join("losses.csv")).unwrap();
    let ck1 = fs::read(tmp.path().join("checkpoint.pgck")).unwrap();
    commands::train(&c, &opts(tmp.path())).unwrap();
    assert_eq!(fs::read(tmp.path().join("losses.csv")).unwrap(), first);
    assert_eq!(fs::read(tmp.path().join("checkpoint.pgck")).unwrap(), ck1);
    let curve = pgan::csvio::read_curve(&tmp.path().join("losses.csv")).unwrap();
    assert_eq!(curve.len(), t.trained.curve.len());

    // The checkpoint restores the same predictions and generator.
    let ck = Checkpoint::load(&tmp.path().join("checkpoint.pgck")).unwrap();
    assert_eq!(Checkpoint::decode(&ck.encode()).unwrap(), ck);
    let (train, test) = load_prepared(tmp.path(), "blobs").unwrap();
    let back = restore(&ck, &train).unwrap();
    assert_eq!(back.predict(&test.features).unwrap(), t.trained.predict(&test.features).unwrap());
    let (m0, m1) = (t.trained.pgan.as_ref().unwrap(), back.pgan.as_ref().unwrap());
    assert_eq!(m0.generator, m1.generator);
    assert_eq!(m0.critic, m1.critic);
}

#[test]
fn snapshots_are_written_and_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    let c = cfg(BLOBS, &["eval.checkpoint_every=2"]);
    commands::prepare(&c, &opts(tmp.path())).unwrap();
    commands::train(&c, &opts(tmp.path())).unwrap();
    let m = Manifest::open(tmp.path()).unwrap();
    let snaps: Vec<_> = m.files.keys().filter(|k| k.starts_with("checkpoint-")).collect();
    assert!(!snaps.is_empty());
    let ck = Checkpoint::load(&tmp.path().join(snaps[0])).unwrap();
    assert_eq!(ck.meta["iteration"], "2");
}

#[test]
fn every_method_trains_and_plots() {
    let tmp = tempfile::tempdir().unwrap();
    for m in ["plain", "oversample", "smote", "vanilla_gan", "cgan", "pgan"] {
        let dir = tmp.path().join(m);
        let c = cfg(BLOBS, &[&format!("method=\"{m}\""), "smote_k=3"]);
        commands::prepare(&c, &opts(&dir)).unwrap();
        let t = commands::train(&c, &opts(&dir)).unwrap();
        let its: Vec<usize> = t.trained.curve.records().iter().map(|r| r.iteration).collect();
        assert!(!its.is_empty() && its.windows(2).all(|w| w[0] < w[1]), "{m}");
        let svg = fs::read_to_string(dir.join("losses.svg")).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 3, "{m}");
        commands::evaluate(&c, &opts(&dir), None).unwrap();
        assert!(dir.join("boundary.svg").exists() && dir.join("samples.svg").exists(), "{m}");
    }
}

#[test]
fn evaluate_writes_reports_and_skips_plots_off_the_plane() {
    let tmp = tempfile::tempdir().unwrap();
    let c = cfg(BLOBS, &["dataset.centers=[[0.0,0.0,0.0],[4.0,0.0,0.0],[2.0,3.5,1.0]]"]);
    commands::prepare(&c, &opts(tmp.path())).unwrap();
    commands::train(&c, &opts(tmp.path())).unwrap();
    commands::evaluate(&c, &opts(tmp.path()), None).unwrap();
    let unc = fs::read_to_string(tmp.path().join("uncertainty.csv")).unwrap();
    let lines: Vec<&str> = unc.lines().collect();
    assert_eq!(lines[0], "measure,sum,mean");
    let names: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(names, ["least_confidence", "margin_of_confidence", "ratio_of_confidence", "entropy"]);
    let metrics = fs::read_to_string(tmp.path().join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 1 + 3 + 1);
    assert!(!tmp.path().join("boundary.svg").exists());
    assert!(!tmp.path().join("samples.svg").exists());
}

#[test]
fn memorized_tiny_set_scores_perfectly() {
    let tmp = tempfile::tempdir().unwrap();
    let text = BLOBS.replace("counts = [120, 24, 8]", "counts = [12, 12, 12]").replace("stddev = 0.6", "stddev = 0.2");
    let c = cfg(&text, &["method=\"plain\"", "training.epochs=300", "training.lr=0.01"]);
    commands::prepare(&c, &opts(tmp.path())).unwrap();
    let t = commands::train(&c, &opts(tmp.path())).unwrap();
    let (train, _) = load_prepared(tmp.path(), "blobs").unwrap();
    assert_eq!(t.trained.evaluate(&train).unwrap().metrics.macro_f1, 1.0);
}

#[test]
fn incompatible_checkpoint_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let c = cfg(BLOBS, &["method=\"plain\""]);
    commands::prepare(&c, &opts(&tmp.path().join("a"))).unwrap();
    commands::train(&c, &opts(&tmp.path().join("a"))).unwrap();
    let c3 = cfg(BLOBS, &["method=\"plain\"", "dataset.centers=[[0.0,0.0,0.0],[4.0,0.0,0.0],[2.0,3.5,1.0]]"]);
    commands::prepare(&c3, &opts(&tmp.path().join("b"))).unwrap();
    let ck = tmp.path().join("a/checkpoint.pgck");
    let err = commands::evaluate(&c3, &opts(&tmp.path().join("b")), Some(&ck)).unwrap_err();
    assert!(format!("{err}").contains("input features"), "{err}");
}

#[test]
fn compare_tabulates_each_run_once() {
    let tmp = tempfile::tempdir().unwrap();
    let plain = cfg(BLOBS, &["method=\"plain\"", "name=\"p1\""]);
    let same = cfg(BLOBS, &["method=\"plain\"", "name=\"p2\""]);
    let pg = cfg(BLOBS, &["name=\"g\""]);
    let rows = commands::compare(&[plain, same, pg], &opts(tmp.path()), tmp.path()).unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!((rows[0].macro_f1, rows[0].uncertainty), (rows[1].macro_f1, rows[1].uncertainty));
    let table = fs::read_to_string(tmp.path().join("comparison.csv")).unwrap();
    assert_eq!(table.lines().count(), 4);
    for run in ["p1", "p2", "g"] {
        assert_eq!(table.lines().filter(|l| l.starts_with(&format!("{run},"))).count(), 1);
    }
}

#[test]
fn compare_rejects_split_mismatch() {
    let tmp = tempfile::tempdir().unwrap();
    let a = cfg(BLOBS, &["method=\"plain\"", "name=\"a\""]);
    let b = cfg(BLOBS, &["method=\"plain\"", "name=\"b\"", "dataset.seed=9"]);
    let err = commands::compare(&[a, b], &opts(tmp.path()), tmp.path()).unwrap_err();
    assert!(format!("{err}").contains("split mismatch"), "{err}");
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write_config(tmp.path(), BLOBS);
    let out = tmp.path().join("run");
    let (p, out) = (p.to_str().unwrap(), out.to_str().unwrap());
    assert_eq!(run(&["train", "-c", p, "--out", out]), EXIT_OTHER, "train before prepare");
    assert_eq!(run(&["prepare", "-c", p, "--out", out, "--no-timestamps"]), EXIT_OK);
    assert_eq!(run(&["prepare", "-c", p, "--set", "training.lr=-1"]), EXIT_CONFIG);
    assert_eq!(run(&["prepare", "-c", "/nonexistent.toml"]), EXIT_CONFIG);
    assert_eq!(run(&["frobnicate"]), EXIT_CONFIG);
    let diverge = [
        "train", "-c", p, "--out", out, "--no-timestamps",
        "--set", "training.lr=1e6", "--set", "training.gp_lambda=1e6", "--epochs", "20",
    ];
    assert_eq!(run(&diverge), EXIT_DIVERGENCE);
    assert_eq!(run(&["train", "-c", p, "--out", out, "--no-timestamps"]), EXIT_OK);
    assert_eq!(run(&["evaluate", "-c", p, "--out", out, "--no-timestamps"]), EXIT_OK);
    assert_eq!(run(&["gradcheck", "--seeds", "2"]), EXIT_OK);
}

#[test]
fn output_root_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let c = cfg(BLOBS, &[]);
    std::env::set_var(pgan::config::OUT_DIR_ENV, tmp.path());
    assert_eq!(c.output_dir(None), tmp.path().join("blobs"));
    assert_eq!(c.output_dir(Some(Path::new("x"))), PathBuf::from("x"));
    std::env::remove_var(pgan::config::OUT_DIR_ENV);
    assert_eq!(c.output_dir(None), PathBuf::from("runs/blobs"));
}

#[test]
fn manifest_records_hash_and_version_for_every_file() {
    let tmp = tempfile::tempdir().unwrap();
    let c = cfg(BLOBS, &[]);
    commands::prepare(&c, &opts(tmp.path())).unwrap();
    commands::train(&c, &opts(tmp.path())).unwrap();
    commands::evaluate(&c, &opts(tmp.path()), None).unwrap();
    let m = Manifest::open(tmp.path()).unwrap();
    let mut on_disk: Vec<String> = fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "manifest.toml")
        .collect();
    on_disk.sort();
    assert_eq!(m.files.keys().cloned().collect::<Vec<_>>(), on_disk);
    let hash = pgan::manifest::sha256_hex(c.canonical().as_bytes());
    for (name, e) in &m.files {
        assert_eq!(e.config_hash, hash, "{name}");
        assert_eq!(e.sha256, pgan::manifest::sha256_hex(&fs::read(tmp.path().join(name)).unwrap()));
        assert!(e.code_version.starts_with("pgan "));
    }
    assert!(m.updated_unix.is_none());
}
