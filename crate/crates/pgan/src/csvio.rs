//! CSV artifacts: datasets, loss curves, metric and uncertainty reports.

use std::fmt::Write as _;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use pgan_core::data::{ClassPriors, Dataset};
use pgan_core::metrics::{MetricsReport, UncertaintyReport};
use pgan_core::training::{LossCurve, LossRecord};
use pgan_core::Tensor;

/// 17 significant digits: enough to round-trip any f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    csv::Reader::from_path(path).with_context(|| format!("cannot open {}", path.display()))
}

pub fn write_dataset(ds: &Dataset, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    let mut header: Vec<String> = (0..ds.dim()).map(|j| format!("f{j}")).collect();
    header.push("label".into());
    w.write_record(&header)?;
    for i in 0..ds.len() {
        let mut rec: Vec<String> = ds.features.row(i).iter().map(|&v| fmt_f64(v)).collect();
        rec.push(ds.labels[i].to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a dataset written by [`write_dataset`]. The class count defaults to
/// one more than the largest label.
pub fn read_dataset(path: &Path, n_classes: Option<usize>, name: &str) -> Result<Dataset> {
    let mut r = reader(path)?;
    let header = r.headers()?.clone();
    if header.iter().next_back() != Some("label") {
        bail!("{}: last column must be `label`", path.display());
    }
    let d = header.len() - 1;
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = line + 2;
        for j in 0..d {
            let v: f64 = rec[j].trim().parse().with_context(|| format!("{}:{row}: bad number", path.display()))?;
            data.push(v);
        }
        let label: usize = rec[d].trim().parse().with_context(|| format!("{}:{row}: bad label", path.display()))?;
        labels.push(label);
    }
    let k = n_classes.unwrap_or_else(|| labels.iter().max().map_or(0, |m| m + 1));
    let features = Tensor::matrix(labels.len(), d, data)?;
    Ok(Dataset::new(features, labels, k, name)?)
}

pub fn write_curve(curve: &LossCurve, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["iteration", "loss_G", "loss_D", "loss_C", "wall_ms"])?;
    for r in curve.records() {
        w.write_record([
            r.iteration.to_string(),
            fmt_f64(r.loss_g),
            fmt_f64(r.loss_d),
            fmt_f64(r.loss_c),
            format!("{:.3}", r.wall_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_curve(path: &Path) -> Result<LossCurve> {
    let mut r = reader(path)?;
    let mut curve = LossCurve::new();
    for rec in r.records() {
        let rec = rec?;
        let f = |i: usize| -> Result<f64> { Ok(rec[i].parse()?) };
        curve.push(LossRecord {
            iteration: rec[0].parse()?,
            loss_g: f(1)?,
            loss_d: f(2)?,
            loss_c: f(3)?,
            wall_ms: f(4)?,
        })?;
    }
    Ok(curve)
}

pub fn write_priors(priors: &ClassPriors, counts: &[usize], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["class", "count", "prior", "ascending_rank"])?;
    for (c, (&p, &n)) in priors.priors.iter().zip(counts).enumerate() {
        let rank = priors.ascending_order.iter().position(|&x| x == c).unwrap_or(0);
        w.write_record([c.to_string(), n.to_string(), fmt_f64(p), rank.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per class, then a `macro` summary row.
pub fn write_metrics(report: &MetricsReport, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["class", "precision", "recall", "f1", "support", "undefined"])?;
    for (c, m) in report.per_class.iter().enumerate() {
        w.write_record([
            c.to_string(),
            fmt_f64(m.precision),
            fmt_f64(m.recall),
            fmt_f64(m.f1),
            m.support.to_string(),
            m.undefined.to_string(),
        ])?;
    }
    let total: usize = report.per_class.iter().map(|m| m.support).sum();
    w.write_record([
        "macro".to_string(),
        String::new(),
        fmt_f64(report.average_accuracy),
        fmt_f64(report.macro_f1),
        total.to_string(),
        String::new(),
    ])?;
    w.flush()?;
    Ok(())
}

pub fn write_uncertainty(report: &UncertaintyReport, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["measure", "sum", "mean"])?;
    for (name, m) in uncertainty_rows(report) {
        w.write_record([name.to_string(), fmt_f64(m.sum), fmt_f64(m.mean)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn uncertainty_rows(report: &UncertaintyReport) -> [(&'static str, pgan_core::metrics::Measure); 4] {
    [
        ("least_confidence", report.least_confidence),
        ("margin_of_confidence", report.margin_of_confidence),
        ("ratio_of_confidence", report.ratio_of_confidence),
        ("entropy", report.entropy),
    ]
}

/// Plain-text summary for the terminal.
pub fn summary_text(method: &str, metrics: &MetricsReport, unc: &UncertaintyReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "method            {method}");
    let _ = writeln!(s, "macro_f1          {:.4}", metrics.macro_f1);
    let _ = writeln!(s, "average_accuracy  {:.4}", metrics.average_accuracy);
    for (c, m) in metrics.per_class.iter().enumerate() {
        let _ = writeln!(s, "class {c:<3}  p {:.3}  r {:.3}  f1 {:.3}  n {}", m.precision, m.recall, m.f1, m.support);
    }
    for (name, m) in uncertainty_rows(unc) {
        let _ = writeln!(s, "{name:<22} mean {:.4}  sum {:.4}", m.mean, m.sum);
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    f.write_all(text.as_bytes())?;
    Ok(())
}
