//! Dense row-major `f64` tensor.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{dim, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(dim("tensor data length", n, data.len()));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let n = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: vec![0.0; n],
        }
    }

    pub fn filled(shape: &[usize], value: f64) -> Self {
        let n = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: vec![value; n],
        }
    }

    pub fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Self::new(vec![rows, cols], data)
    }

    pub fn vector(data: Vec<f64>) -> Self {
        Self {
            shape: vec![data.len()],
            data,
        }
    }

    /// Stack equal-length rows into an `[n x d]` matrix.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * d);
        for r in rows {
            if r.len() != d {
                return Err(dim("row width", d, r.len()));
            }
            data.extend_from_slice(r);
        }
        Self::matrix(rows.len(), d, data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Row count of a matrix (first dimension).
    pub fn rows(&self) -> usize {
        self.shape.first().copied().unwrap_or(0)
    }

    /// Column count of a matrix; 1 for vectors.
    pub fn cols(&self) -> usize {
        match self.shape.len() {
            0 => 0,
            1 => 1,
            _ => self.shape[1..].iter().product(),
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let c = self.cols();
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let c = self.cols();
        self.data[i * c + j] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// New matrix made of the selected rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Tensor {
        let c = self.cols();
        let mut data = Vec::with_capacity(idx.len() * c);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Tensor {
            shape: vec![idx.len(), c],
            data,
        }
    }

    /// `[n x a] ++ [n x b] -> [n x (a+b)]`.
    pub fn hcat(&self, other: &Tensor) -> Result<Tensor> {
        if self.rows() != other.rows() {
            return Err(dim("hcat rows", self.rows(), other.rows()));
        }
        let (a, b) = (self.cols(), other.cols());
        let mut data = Vec::with_capacity(self.rows() * (a + b));
        for i in 0..self.rows() {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(other.row(i));
        }
        Tensor::matrix(self.rows(), a + b, data)
    }

    /// Stack two matrices with the same width.
    pub fn vcat(&self, other: &Tensor) -> Result<Tensor> {
        if self.rows() == 0 {
            return Ok(other.clone());
        }
        if other.rows() == 0 {
            return Ok(self.clone());
        }
        if self.cols() != other.cols() {
            return Err(dim("vcat width", self.cols(), other.cols()));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Tensor::matrix(self.rows() + other.rows(), self.cols(), data)
    }

    /// Leading `cols` columns of a matrix.
    pub fn take_cols(&self, cols: usize) -> Tensor {
        let mut data = Vec::with_capacity(self.rows() * cols);
        for i in 0..self.rows() {
            data.extend_from_slice(&self.row(i)[..cols]);
        }
        Tensor {
            shape: vec![self.rows(), cols],
            data,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|x| *x *= s);
    }

    pub fn add_assign(&mut self, other: &Tensor) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::Consistency(alloc::format!(
                "add shapes {:?} vs {:?}",
                self.shape,
                other.shape
            )));
        }
        self.data
            .iter_mut()
            .zip(&other.data)
            .for_each(|(a, b)| *a += b);
        Ok(())
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        if self.data.is_empty() {
            0.0
        } else {
            self.sum() / self.data.len() as f64
        }
    }

    /// Index of the largest entry in each row; ties resolve to the lowest index.
    pub fn argmax_rows(&self) -> Vec<usize> {
        (0..self.rows())
            .map(|i| {
                let r = self.row(i);
                let mut best = 0;
                for j in 1..r.len() {
                    if r[j] > r[best] {
                        best = j;
                    }
                }
                best
            })
            .collect()
    }

    /// One-hot rows for labels in `[0, k)`.
    pub fn one_hot(labels: &[usize], k: usize) -> Tensor {
        let mut t = Tensor::zeros(&[labels.len(), k]);
        for (i, &l) in labels.iter().enumerate() {
            t.set(i, l, 1.0);
        }
        t
    }
}
