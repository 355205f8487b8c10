//! IDX image/label files: big-endian header, unsigned byte payload.

use std::fs;
use std::path::Path;

use pgan_core::data::Dataset;
use pgan_core::Tensor;
use thiserror::Error;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Error)]
pub enum IdxError {
    #[error("{what}: bad magic 0x{found:08x}, expected 0x{expected:08x}")]
    Magic { what: &'static str, expected: u32, found: u32 },
    #[error("{what}: expected {expected} bytes, found {actual}")]
    Truncated { what: &'static str, expected: usize, actual: usize },
    #[error("{images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("downscale factor {factor} does not divide {rows}x{cols} images")]
    Downscale { factor: usize, rows: usize, cols: usize },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] pgan_core::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    /// Row-major, one `rows * cols` block per image.
    pub pixels: Vec<u8>,
}

fn header(bytes: &[u8], what: &'static str, magic: u32, dims: usize) -> Result<Vec<usize>, IdxError> {
    let need = 4 * (1 + dims);
    if bytes.len() < need {
        return Err(IdxError::Truncated { what, expected: need, actual: bytes.len() });
    }
    let word = |i: usize| u32::from_be_bytes(bytes[4 * i..4 * i + 4].try_into().unwrap());
    if word(0) != magic {
        return Err(IdxError::Magic { what, expected: magic, found: word(0) });
    }
    Ok((1..=dims).map(|i| word(i) as usize).collect())
}

fn payload<'a>(bytes: &'a [u8], what: &'static str, offset: usize, len: usize) -> Result<&'a [u8], IdxError> {
    let actual = bytes.len() - offset;
    if actual != len {
        return Err(IdxError::Truncated { what, expected: len, actual });
    }
    Ok(&bytes[offset..])
}

pub fn parse_images(bytes: &[u8]) -> Result<IdxImages, IdxError> {
    let d = header(bytes, "images", IMAGES_MAGIC, 3)?;
    let pixels = payload(bytes, "images", 16, d[0] * d[1] * d[2])?.to_vec();
    Ok(IdxImages { count: d[0], rows: d[1], cols: d[2], pixels })
}

pub fn parse_labels(bytes: &[u8]) -> Result<Vec<u8>, IdxError> {
    let d = header(bytes, "labels", LABELS_MAGIC, 1)?;
    Ok(payload(bytes, "labels", 8, d[0])?.to_vec())
}

pub fn encode_images(images: &IdxImages) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.pixels.len());
    for v in [IMAGES_MAGIC, images.count as u32, images.rows as u32, images.cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(&images.pixels);
    out
}

pub fn encode_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

fn read(path: &Path) -> Result<Vec<u8>, IdxError> {
    fs::read(path).map_err(|source| IdxError::Io { path: path.display().to_string(), source })
}

/// Options for turning IDX files into a [`Dataset`].
#[derive(Debug, Clone, Default)]
pub struct IdxOptions {
    /// Mean-pool `factor x factor` blocks; 0 or 1 keeps native resolution.
    pub downscale: usize,
    /// Keep only these raw labels, mapped to classes `0..len` in order.
    pub classes: Option<Vec<u8>>,
}

/// Image side lengths after downscaling.
pub fn scaled_dims(images: &IdxImages, factor: usize) -> Result<(usize, usize), IdxError> {
    let f = factor.max(1);
    if !images.rows.is_multiple_of(f) || !images.cols.is_multiple_of(f) {
        return Err(IdxError::Downscale { factor: f, rows: images.rows, cols: images.cols });
    }
    Ok((images.rows / f, images.cols / f))
}

/// Pixels scaled to `[0, 1]`, optionally mean-pooled.
pub fn images_to_rows(images: &IdxImages, factor: usize) -> Result<Vec<Vec<f64>>, IdxError> {
    let f = factor.max(1);
    let (r, c) = scaled_dims(images, f)?;
    let block = (f * f) as f64 * 255.0;
    let size = images.rows * images.cols;
    Ok(images
        .pixels
        .chunks(size)
        .map(|img| {
            let mut row = vec![0.0; r * c];
            for (i, &p) in img.iter().enumerate() {
                let (y, x) = (i / images.cols, i % images.cols);
                row[(y / f) * c + x / f] += p as f64;
            }
            row.iter_mut().for_each(|v| *v /= block);
            row
        })
        .collect())
}

pub fn dataset_from_idx(images: &IdxImages, labels: &[u8], opts: &IdxOptions, name: &str) -> Result<Dataset, IdxError> {
    if images.count != labels.len() {
        return Err(IdxError::CountMismatch { images: images.count, labels: labels.len() });
    }
    let rows = images_to_rows(images, opts.downscale)?;
    let d = rows.first().map_or(0, Vec::len);
    let mut data = Vec::with_capacity(rows.len() * d);
    let mut ys = Vec::with_capacity(rows.len());
    for (row, &label) in rows.iter().zip(labels) {
        let class = match &opts.classes {
            Some(sel) => match sel.iter().position(|&s| s == label) {
                Some(c) => c,
                None => continue,
            },
            None => label as usize,
        };
        data.extend_from_slice(row);
        ys.push(class);
    }
    let n_classes = match &opts.classes {
        Some(sel) => sel.len(),
        None => labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0),
    };
    let features = Tensor::matrix(ys.len(), d, data)?;
    Ok(Dataset::new(features, ys, n_classes, name)?)
}

pub fn load_idx(images_path: &Path, labels_path: &Path, opts: &IdxOptions) -> Result<Dataset, IdxError> {
    let images = parse_images(&read(images_path)?)?;
    let labels = parse_labels(&read(labels_path)?)?;
    let name = images_path.file_name().map_or("idx".into(), |n| n.to_string_lossy().into_owned());
    dataset_from_idx(&images, &labels, opts, &name)
}

/// Inverse of the `[0, 1]` scaling; exact for datasets loaded at native
/// resolution with raw labels.
pub fn dataset_to_idx(ds: &Dataset, rows: usize, cols: usize) -> Result<(Vec<u8>, Vec<u8>), IdxError> {
    if rows * cols != ds.dim() {
        return Err(IdxError::Core(pgan_core::Error::Dimension {
            context: "image size".into(),
            expected: ds.dim(),
            found: rows * cols,
        }));
    }
    let pixels = ds.features.data().iter().map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8).collect();
    let images = IdxImages { count: ds.len(), rows, cols, pixels };
    let labels: Vec<u8> = ds.labels.iter().map(|&l| l as u8).collect();
    Ok((encode_images(&images), encode_labels(&labels)))
}
