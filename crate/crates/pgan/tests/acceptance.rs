//! Acceptance run: one line per criterion.
//!
//! Every threshold is checked against an oracle written here rather than
//! the library's own helpers where one exists. `PGAN_ACCEPT=2,6` restricts
//! the run to the listed criteria. Criterion 9 is a soft property and only
//! warns. The process exits non-zero when a hard criterion fails.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use pgan::commands::{self, RunOptions};
use pgan::config::ExperimentConfig;
use pgan::idx::{load_idx, IdxOptions};
use pgan_core::data::{apply_imbalance, class_priors, make_blobs, split_per_class, Dataset};
use pgan_core::metrics::{emd_discrete, kl_divergence, sample_uncertainty, Metric};
use pgan_core::models::{generator_forward, hull_membership, ClassBank, Generator, PGanModel, HULL_TOLERANCE};
use pgan_core::nn::{grad_check_suite, Activation, Layer, Network};
use pgan_core::rng::Rng;
use pgan_core::training::{
    pgan_train_with, run_method, sample_minority_labels, train_vanilla_gan, EvalMode, LabelFallback, LabelMode,
    Method, NoClock, TrainingConfig,
};
use pgan_core::Tensor;

// ---------------------------------------------------------------- oracles

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise hull by gift wrapping, collinear points dropped.
fn gift_wrap(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let start = 0;
    let mut hull = vec![];
    let mut cur = start;
    loop {
        hull.push(pts[cur]);
        let mut next = (cur + 1) % pts.len();
        for (i, &p) in pts.iter().enumerate() {
            let c = cross(pts[cur], pts[next], p);
            let farther = || {
                let d = |q: [f64; 2]| (q[0] - pts[cur][0]).powi(2) + (q[1] - pts[cur][1]).powi(2);
                d(p) > d(pts[next])
            };
            if c < 0.0 || (c == 0.0 && farther()) {
                next = i;
            }
        }
        cur = next;
        if cur == start || hull.len() > pts.len() {
            break;
        }
    }
    hull
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 { (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
    ((p[0] - a[0] - t * dx).powi(2) + (p[1] - a[1] - t * dy).powi(2)).sqrt()
}

/// Signed distance to the hull boundary: positive inside, negative outside.
fn polygon_margin(p: [f64; 2], hull: &[[f64; 2]]) -> f64 {
    let n = hull.len();
    let dist = (0..n).map(|i| segment_distance(p, hull[i], hull[(i + 1) % n])).fold(f64::INFINITY, f64::min);
    let inside = n >= 3 && (0..n).all(|i| cross(hull[i], hull[(i + 1) % n], p) >= 0.0);
    if inside {
        dist
    } else {
        -dist
    }
}

/// Convex-combination certificate: weights on the simplex reproducing the point.
fn certificate(sample: &[f64], weights: &[f64], anchors: &Tensor) -> f64 {
    let neg = weights.iter().fold(0.0f64, |m, &w| m.max(-w));
    let sum_err = (weights.iter().sum::<f64>() - 1.0).abs();
    let mut recon_err: f64 = 0.0;
    for j in 0..sample.len() {
        let r: f64 = weights.iter().enumerate().map(|(i, w)| w * anchors.get(i, j)).sum();
        recon_err = recon_err.max((r - sample[j]).abs());
    }
    neg.max(sum_err).max(recon_err)
}

/// Earth mover distance between two 1-D discrete distributions as the
/// integral of the absolute CDF difference.
fn emd_1d_cdf(xs: &[f64], p: &[f64], ys: &[f64], q: &[f64]) -> f64 {
    let mut events: Vec<(f64, f64)> = xs.iter().zip(p).map(|(&x, &w)| (x, w)).collect();
    events.extend(ys.iter().zip(q).map(|(&y, &w)| (y, -w)));
    events.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let (mut total, mut diff) = (0.0, 0.0);
    for w in events.windows(2) {
        diff += w[0].1;
        total += diff.abs() * (w[1].0 - w[0].0);
    }
    total
}

fn macro_f1(pred: &[usize], truth: &[usize], k: usize) -> f64 {
    let mut f = 0.0;
    for c in 0..k {
        let tp = pred.iter().zip(truth).filter(|&(&p, &t)| p == c && t == c).count() as f64;
        let fp = pred.iter().zip(truth).filter(|&(&p, &t)| p == c && t != c).count() as f64;
        let fn_ = pred.iter().zip(truth).filter(|&(&p, &t)| p != c && t == c).count() as f64;
        f += if tp > 0.0 { 2.0 * tp / (2.0 * tp + fp + fn_) } else { 0.0 };
    }
    f / k as f64
}

fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Minimal well-formedness check: balanced tags, quoted attributes.
fn well_formed_xml(s: &str) -> bool {
    let mut stack: Vec<String> = Vec::new();
    let mut rest = s;
    while let Some(i) = rest.find('<') {
        let Some(j) = rest[i..].find('>') else { return false };
        let tag = &rest[i + 1..i + j];
        rest = &rest[i + j + 1..];
        if tag.starts_with('?') || tag.starts_with('!') {
            continue;
        }
        if !tag.matches('"').count().is_multiple_of(2) {
            return false;
        }
        if let Some(name) = tag.strip_prefix('/') {
            if stack.pop().as_deref() != Some(name.trim()) {
                return false;
            }
        } else if !tag.ends_with('/') {
            stack.push(tag.split_whitespace().next().unwrap_or("").to_string());
        }
    }
    stack.is_empty()
}

fn points(t: &Tensor) -> Vec<[f64; 2]> {
    (0..t.rows()).map(|i| [t.get(i, 0), t.get(i, 1)]).collect()
}

// --------------------------------------------------------------- fixtures

/// Three overlapping blobs with a 1000:100:20 skew.
const BENCH_CENTERS: [[f64; 2]; 3] = [[0.0, 0.0], [3.0, 0.0], [1.5, 2.55]];

fn bench_centers() -> Vec<Vec<f64>> {
    BENCH_CENTERS.iter().map(|c| c.to_vec()).collect()
}

fn bench_config(seed: u64) -> TrainingConfig {
    TrainingConfig { epochs: 40, lr: 2e-3, seed, ..Default::default() }
}

fn bench_split(seed: u64) -> (Dataset, Dataset) {
    let train = make_blobs(&[1000, 100, 20], &bench_centers(), 1.0, seed).unwrap();
    let test = make_blobs(&[300, 300, 300], &bench_centers(), 1.0, seed + 1000).unwrap();
    (train, test)
}

fn score(t: &pgan_core::training::Trained, test: &Dataset) -> f64 {
    let pred = t.predict(&test.features).unwrap().argmax_rows();
    macro_f1(&pred, &test.labels, test.n_classes)
}

fn mnist_data(seed: u64) -> (Dataset, Dataset) {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let opts = IdxOptions { downscale: 2, classes: Some(vec![3, 5, 8]) };
    let full = load_idx(
        &dir.join("mnist358-images-idx3-ubyte"),
        &dir.join("mnist358-labels-idx1-ubyte"),
        &opts,
    )
    .unwrap();
    let (rest, test) = split_per_class(&full, 100, seed ^ 0x7e57).unwrap();
    (apply_imbalance(&rest, &[400, 80, 16], seed).unwrap(), test)
}

fn mnist_config(seed: u64) -> TrainingConfig {
    TrainingConfig {
        epochs: 40,
        lr: 2e-3,
        seed,
        extractor_hidden: Some(vec![64]),
        feature_dim: 16,
        bank_size: 32,
        ..Default::default()
    }
}

// ------------------------------------------------------------- criteria

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn c1_gradcheck() -> Verdict {
    let start = Instant::now();
    let cases = grad_check_suite(20);
    let worst = cases.iter().map(|c| c.error).fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst < 1e-4 && secs < 60.0 && cases.len() == 20 * 16,
        format!("{} cases over 20 seeds, worst relative error {worst:.2e}, {secs:.1}s", cases.len()),
    )
}

fn random_generator(dim: usize, per_class: usize, seed: u64) -> Generator {
    let mut rng = Rng::new(seed);
    let k = 3;
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for c in 0..k {
        for _ in 0..per_class {
            rows.push((0..dim).map(|_| 3.0 * rng.normal() + c as f64).collect::<Vec<_>>());
            labels.push(c);
        }
    }
    let feats = Tensor::from_rows(&rows).unwrap();
    let bank = ClassBank::draw(&feats, &labels, k, 16, &mut rng).unwrap();
    let mut g = Generator::new(4, &[16, 16], bank, &mut rng).unwrap();
    // Sharpen the head so samples spread towards the hull boundary too.
    g.p_head.params_mut().for_each(|w| *w *= 8.0);
    g
}

fn hull_check(g: &Generator, n: usize, seed: u64) -> (usize, usize, f64) {
    let mut rng = Rng::new(seed);
    let k = g.n_classes();
    let mut inside_core = 0;
    let mut inside_oracle = 0;
    let mut worst_cert: f64 = 0.0;
    let d = g.feature_dim().unwrap();
    let oracle_hulls: Vec<Vec<[f64; 2]>> = (0..k)
        .map(|c| if d == 2 { gift_wrap(&points(g.bank.anchors(c).unwrap())) } else { vec![] })
        .collect();
    for i in 0..n {
        let c = i % k;
        let z = rng.normal_vec(g.latent_dim);
        let s = generator_forward(g, &z, c).unwrap();
        let anchors = g.bank.anchors(c).unwrap();
        worst_cert = worst_cert.max(certificate(&s.sample, &s.weights, anchors));
        if hull_membership(&s.sample, anchors).inside {
            inside_core += 1;
        }
        let ok = if d == 2 {
            polygon_margin([s.sample[0], s.sample[1]], &oracle_hulls[c]) >= -HULL_TOLERANCE
        } else {
            certificate(&s.sample, &s.weights, anchors) <= HULL_TOLERANCE
        };
        inside_oracle += ok as usize;
    }
    (inside_core, inside_oracle, worst_cert)
}

/// Saturates the head on one bank slot and reports the distance to that anchor.
fn vertex_gap(g: &Generator, class: usize, slot: usize) -> f64 {
    let mut g = g.clone();
    let width = g.p_head.input_dim().unwrap();
    let b = g.bank.capacity();
    let mut bias = vec![-30.0; b];
    bias[slot] = 30.0;
    g.p_head = Network::from_layers(vec![Layer {
        weight: Tensor::zeros(&[b, width]),
        bias: Tensor::vector(bias),
        activation: Activation::Softmax,
    }])
    .unwrap();
    let z = vec![0.1; g.latent_dim];
    let s = generator_forward(&g, &z, class).unwrap();
    let a = g.bank.anchors(class).unwrap();
    let target = a.row(slot % a.rows());
    s.sample.iter().zip(target).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn c2_hull() -> Verdict {
    let start = Instant::now();
    let mut gens: Vec<(String, Generator, usize)> = Vec::new();
    for s in 0..4 {
        gens.push((format!("random-2d-{s}"), random_generator(2, 40, s), 12_500));
    }
    for s in 0..2 {
        gens.push((format!("random-3d-{s}"), random_generator(3, 40, 10 + s), 5_000));
    }
    for s in 0..2 {
        let (train, _) = bench_split(s);
        let cfg = TrainingConfig { epochs: 5, lr: 2e-3, seed: s, ..Default::default() };
        let out = pgan_train_with(&train, &cfg, &NoClock, &mut |_, _| {}).unwrap();
        gens.push((format!("trained-2d-{s}"), out.model.generator, 20_000));
    }
    let (mut total, mut core_in, mut oracle_in, mut cert): (usize, usize, usize, f64) = (0, 0, 0, 0.0);
    for (i, (_, g, n)) in gens.iter().enumerate() {
        let (a, b, c) = hull_check(g, *n, 500 + i as u64);
        total += n;
        core_in += a;
        oracle_in += b;
        cert = cert.max(c);
    }
    let mut worst_vertex: f64 = 0.0;
    for (_, g, _) in &gens {
        for c in 0..g.n_classes() {
            for slot in 0..g.bank.size(c) {
                worst_vertex = worst_vertex.max(vertex_gap(g, c, slot));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        total >= 100_000 && core_in == total && oracle_in == total && worst_vertex < 1e-4 && secs < 120.0,
        format!(
            "{core_in}/{total} inside (library), {oracle_in}/{total} inside (oracle), certificate error {cert:.1e}, \
             worst vertex gap {worst_vertex:.1e}, {secs:.1}s"
        ),
    )
}

fn c3_labels() -> Verdict {
    let priors = pgan_core::data::ClassPriors::from_priors(vec![0.2, 0.3, 0.5]).unwrap();
    let n = 100_000;
    let freq = |mode| {
        let mut rng = Rng::new(31);
        let s = sample_minority_labels(&priors, n, mode, LabelFallback::UniformMinority, &mut rng).unwrap();
        let mut f = vec![0.0; 3];
        s.labels.iter().for_each(|&l| f[l] += 1.0 / n as f64);
        f
    };
    // Gap weights p_k - p_i normalized: (0.3, 0.2, 0) / 0.5.
    let gap_target = [0.6, 0.4, 0.0];
    // Uniform over the two non-majority classes.
    let uni_target = [0.5, 0.5, 0.0];
    let (g, u) = (freq(LabelMode::PriorGap), freq(LabelMode::UniformMinority));
    let (tg, tu) = (total_variation(&g, &gap_target), total_variation(&u, &uni_target));
    verdict(
        tg <= 0.01 && tu <= 0.01,
        format!(
            "prior_gap ({:.4}, {:.4}, {:.4}) tv {tg:.4}; uniform_minority ({:.4}, {:.4}, {:.4}) tv {tu:.4}",
            g[0], g[1], g[2], u[0], u[1], u[2]
        ),
    )
}

fn c4_uncertainty() -> Verdict {
    let mut ok = true;
    for m in [2usize, 3, 5, 10] {
        let uniform = vec![1.0 / m as f64; m];
        let mut onehot = vec![0.0; m];
        onehot[m - 1] = 1.0;
        ok &= sample_uncertainty(&uniform).iter().all(|v| (v - 1.0).abs() < 1e-12);
        ok &= sample_uncertainty(&onehot).iter().all(|v| v.abs() < 1e-12);
    }
    let p = [0.5, 0.3, 0.2];
    // Hand values: 3(1-0.5)/2, 1-(0.5-0.3), 0.3/0.5, and normalized base-2 entropy.
    let h = -p.iter().map(|&x: &f64| x * x.log2()).sum::<f64>() / 3f64.log2();
    let expected = [0.75, 0.8, 0.6, h];
    let got = sample_uncertainty(&p);
    let close = got.iter().zip(expected).all(|(a, b)| (a - b).abs() < 1e-12);
    ok &= close && (h - 0.9372).abs() < 1e-4;
    verdict(
        ok,
        format!("(0.5, 0.3, 0.2) -> ({:.4}, {:.4}, {:.4}, {:.4}); one-hot 0 and uniform 1 for m in 2..10", got[0], got[1], got[2], got[3]),
    )
}

fn c5_emd_kl() -> Verdict {
    let mut rng = Rng::new(5);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (n, m) = (1 + rng.index(8), 1 + rng.index(8));
        let xs: Vec<f64> = (0..n).map(|_| rng.uniform_range(-5.0, 5.0)).collect();
        let ys: Vec<f64> = (0..m).map(|_| rng.uniform_range(-5.0, 5.0)).collect();
        let norm = |v: Vec<f64>| {
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect::<Vec<_>>()
        };
        let p = norm((0..n).map(|_| rng.uniform() + 0.01).collect());
        let q = norm((0..m).map(|_| rng.uniform() + 0.01).collect());
        let lp = emd_discrete(
            &p,
            &Tensor::matrix(n, 1, xs.clone()).unwrap(),
            &q,
            &Tensor::matrix(m, 1, ys.clone()).unwrap(),
            Metric::Euclidean,
        )
        .unwrap()
        .distance;
        worst = worst.max((lp - emd_1d_cdf(&xs, &p, &ys, &q)).abs());
    }
    let mut kl_ok = true;
    let mut kl_min = f64::INFINITY;
    for _ in 0..500 {
        let k = 2 + rng.index(6);
        let mk = |rng: &mut Rng| {
            let v: Vec<f64> = (0..k).map(|_| rng.uniform() + 1e-3).collect();
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect::<Vec<_>>()
        };
        let (p, q) = (mk(&mut rng), mk(&mut rng));
        let d = kl_divergence(&p, &q).unwrap();
        kl_min = kl_min.min(d);
        kl_ok &= d >= 0.0 && kl_divergence(&p, &p).unwrap().abs() < 1e-12;
    }
    verdict(
        worst < 1e-8 && kl_ok,
        format!("100 random 1-D pairs, max |LP - CDF| {worst:.1e}; 500 KL pairs, min {kl_min:.2e}, KL(p,p) = 0"),
    )
}

fn c6_improvement() -> Verdict {
    let start = Instant::now();
    let mut blob = (0.0, 0.0);
    let mut per_seed = Vec::new();
    for seed in 0..5 {
        let (train, test) = bench_split(seed);
        let cfg = bench_config(seed);
        let plain = score(&run_method(&train, &cfg, Method::Plain, EvalMode::RetrainedC, &NoClock).unwrap(), &test);
        let pg = score(&run_method(&train, &cfg, Method::PGan, EvalMode::RetrainedC, &NoClock).unwrap(), &test);
        blob.0 += plain / 5.0;
        blob.1 += pg / 5.0;
        per_seed.push(format!("{:+.3}", pg - plain));
    }
    let blob_secs = start.elapsed().as_secs_f64();
    let mut mnist = (0.0, 0.0);
    let mut mnist_seed = Vec::new();
    for seed in 0..3 {
        let (train, test) = mnist_data(seed);
        let cfg = mnist_config(seed);
        let plain = score(&run_method(&train, &cfg, Method::Plain, EvalMode::RetrainedC, &NoClock).unwrap(), &test);
        let pg = score(&run_method(&train, &cfg, Method::PGan, EvalMode::RetrainedC, &NoClock).unwrap(), &test);
        mnist.0 += plain / 3.0;
        mnist.1 += pg / 3.0;
        mnist_seed.push(format!("{:+.3}", pg - plain));
    }
    let secs = start.elapsed().as_secs_f64();
    let (db, dm) = (blob.1 - blob.0, mnist.1 - mnist.0);
    verdict(
        db >= 0.05 && dm >= 0.03 && secs < 900.0,
        format!(
            "blobs macro-F1 plain {:.3} -> pgan {:.3} ({db:+.3}; seeds {}); mnist 3/5/8 plain {:.3} -> pgan {:.3} ({dm:+.3}; seeds {}); \
             {blob_secs:.0}s + {:.0}s",
            blob.0,
            blob.1,
            per_seed.join(" "),
            mnist.0,
            mnist.1,
            mnist_seed.join(" "),
            secs - blob_secs
        ),
    )
}

fn c7_majority_skew() -> Verdict {
    let centers = vec![vec![0.0, 0.0], vec![4.0, 0.0]];
    let mut fractions = Vec::new();
    let mut minority_inside = 0;
    let mut minority_total = 0;
    for seed in 0..5 {
        let ds = make_blobs(&[950, 50], &centers, 1.0, seed).unwrap();
        let cfg = TrainingConfig { epochs: 30, lr: 2e-3, seed, ..Default::default() };
        let gan = train_vanilla_gan(&ds, &cfg).unwrap();
        let mut rng = Rng::new(seed + 77);
        let s = gan.sample(2000, &mut rng).unwrap();
        // Majority side of the perpendicular bisector x = 2.
        let maj = (0..s.rows()).filter(|&i| s.get(i, 0) < 2.0).count();
        fractions.push(maj as f64 / s.rows() as f64);

        let out = pgan_train_with(&ds, &cfg, &NoClock, &mut |_, _| {}).unwrap();
        let labels = vec![1usize; 2000];
        let gen = out.model.generate(&labels, &mut rng).unwrap();
        let hull = gift_wrap(&points(&ds.class_features(1)));
        minority_inside += points(&gen).iter().filter(|&&p| polygon_margin(p, &hull) >= -HULL_TOLERANCE).count();
        minority_total += gen.rows();
    }
    let min_frac = fractions.iter().cloned().fold(f64::INFINITY, f64::min);
    let shown: Vec<String> = fractions.iter().map(|f| format!("{f:.3}")).collect();
    verdict(
        min_frac >= 0.8 && minority_inside == minority_total,
        format!(
            "vanilla GAN majority-side fraction per seed [{}]; pgan minority samples inside minority hull {minority_inside}/{minority_total}",
            shown.join(", ")
        ),
    )
}

const C8_CONFIG: &str = r#"
name = "c8"
method = "pgan"
smote_k = 3
[dataset]
kind = "blobs"
centers = [[0.0, 0.0], [3.0, 0.0], [1.5, 2.55]]
counts = [300, 60, 12]
test_per_class = 50
seed = 8
[training]
epochs = 3
lr = 2e-3
"#;

fn c8_loss_artifacts() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let mut failures = Vec::new();
    let methods = ["plain", "oversample", "smote", "vanilla_gan", "cgan", "pgan"];
    for m in methods {
        let cfg = ExperimentConfig::from_toml(C8_CONFIG, &[format!("method=\"{m}\"")], None).unwrap();
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let dir = tmp.path().join(format!("{m}-{rep}"));
            let opts = RunOptions { out: Some(dir.clone()), timestamps: false };
            commands::prepare(&cfg, &opts).unwrap();
            commands::train(&cfg, &opts).unwrap();
            outputs.push((
                fs::read(dir.join("losses.csv")).unwrap(),
                fs::read_to_string(dir.join("losses.svg")).unwrap(),
                fs::read(dir.join("checkpoint.pgck")).unwrap(),
            ));
        }
        let (csv, svg, ck) = &outputs[0];
        let text = String::from_utf8(csv.clone()).unwrap();
        let mut lines = text.lines();
        let header_ok = lines.next() == Some("iteration,loss_G,loss_D,loss_C,wall_ms");
        let its: Vec<u64> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
        let monotone = !its.is_empty() && its.windows(2).all(|w| w[0] < w[1]);
        let svg_ok = svg.starts_with("<svg") && well_formed_xml(svg) && svg.matches("<polyline").count() == 3;
        let identical = outputs[1].0 == *csv && outputs[1].1 == *svg && outputs[1].2 == *ck;
        if !(header_ok && monotone && svg_ok && identical) {
            failures.push(format!("{m} (header {header_ok}, monotone {monotone}, svg {svg_ok}, identical {identical})"));
        }
    }
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            format!("{} methods: monotone CSV, well-formed SVG with 3 series, byte-identical reruns", methods.len())
        } else {
            format!("failed: {}", failures.join("; "))
        },
    )
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn minority_margin(model: &PGanModel, hull: &[[f64; 2]], minority: usize) -> f64 {
    let mut rng = Rng::new(4242);
    let gen = model.generate(&vec![minority; 1000], &mut rng).unwrap();
    median(points(&gen).iter().map(|&p| polygon_margin(p, hull)).collect())
}

fn c9_periphery() -> Verdict {
    let mut drops = 0;
    let mut shown = Vec::new();
    for seed in 0..5 {
        let (train, _) = bench_split(seed);
        let cfg = bench_config(seed);
        let priors = class_priors(&train).unwrap();
        let minority = priors.ascending_order[0];
        let hull = gift_wrap(&points(&train.class_features(minority)));
        let mut initial = None;
        let out = pgan_train_with(&train, &cfg, &NoClock, &mut |it, m| {
            if it == 0 {
                initial = Some(minority_margin(m, &hull, minority));
            }
        })
        .unwrap();
        let (a, b) = (initial.unwrap(), minority_margin(&out.model, &hull, minority));
        drops += (b < a) as usize;
        shown.push(format!("{a:.3}->{b:.3}"));
    }
    verdict(drops >= 4, format!("median minority margin dropped in {drops}/5 seeds [{}]", shown.join(", ")))
}

type Criterion = (u32, &'static str, bool, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "gradient fidelity", false, c1_gradcheck),
        (2, "convex-hull guarantee", false, c2_hull),
        (3, "label sampler frequencies", false, c3_labels),
        (4, "uncertainty measures", false, c4_uncertainty),
        (5, "EMD oracle and KL", false, c5_emd_kl),
        (6, "rebalancing improvement", false, c6_improvement),
        (7, "majority skew", false, c7_majority_skew),
        (8, "loss-curve artifacts", false, c8_loss_artifacts),
        (9, "periphery drift", true, c9_periphery),
    ];
    let only: Option<Vec<u32>> = std::env::var("PGAN_ACCEPT")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut hard_failures = 0;
    for (id, name, soft, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let v = panic::catch_unwind(AssertUnwindSafe(f))
            .unwrap_or_else(|e| verdict(false, format!("panicked: {:?}", e.downcast_ref::<String>())));
        let tag = match (v.pass, soft) {
            (true, _) => "PASS",
            (false, true) => "WARN",
            (false, false) => "FAIL",
        };
        hard_failures += (!v.pass && !soft) as usize;
        println!("criterion {id} [{tag}] {name}: {} ({:.1}s)", v.detail, start.elapsed().as_secs_f64());
    }
    if hard_failures > 0 {
        std::process::exit(1);
    }
}
