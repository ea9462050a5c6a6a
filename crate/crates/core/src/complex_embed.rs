//! Real embedding of complex linear maps that survives a ReLU.
//!
//! A complex entry `x` becomes `((Re x)₊, (Im x)₊, (Re x)₋, (Im x)₋)` and a
//! complex weight `a` the 4×4 block
//!
//! ```text
//! [ Re −Im −Re  Im ]
//! [ Im  Re −Im −Re ]
//! [−Re  Im  Re −Im ]
//! [−Im −Re  Im  Re ]
//! ```
//!
//! so that `relu(â · embed(x)) = embed(a·x)`.

use crate::error::{invalid, Result};
use crate::factors::{ButterflyFactors, SparseMatrix};
use crate::oracle::{ComplexMatrix, ComplexVector};
use num_complex::Complex64;

/// Nonnegative real vector of length `4n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedVector(pub Vec<f64>);

/// Row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl RealMatrix {
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.data.chunks_exact(self.cols).map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }
}

pub fn embed_vector(x: &[Complex64]) -> EmbeddedVector {
    EmbeddedVector(
        x.iter()
            .flat_map(|z| [z.re.max(0.0), z.im.max(0.0), (-z.re).max(0.0), (-z.im).max(0.0)])
            .collect(),
    )
}

pub fn embed_scalar(a: Complex64) -> [[f64; 4]; 4] {
    let (re, im) = (a.re, a.im);
    [[re, -im, -re, im], [im, re, -im, -re], [-re, im, re, -im], [-im, -re, im, re]]
}

pub fn embed_matrix(a: &ComplexMatrix) -> RealMatrix {
    let (rows, cols) = (4 * a.rows(), 4 * a.cols());
    let mut data = vec![0.0; rows * cols];
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let b = embed_scalar(a.get(i, j));
            for (u, row) in b.iter().enumerate() {
                data[(4 * i + u) * cols + 4 * j..(4 * i + u) * cols + 4 * j + 4].copy_from_slice(row);
            }
        }
    }
    RealMatrix { rows, cols, data }
}

pub fn relu(v: &mut [f64]) {
    for x in v {
        *x = x.max(0.0);
    }
}

/// `Re = (Re)₊ − (Re)₋`, `Im = (Im)₊ − (Im)₋`; non-canonical input is accepted.
pub fn unembed(v: &EmbeddedVector) -> Result<ComplexVector> {
    if v.0.len() % 4 != 0 {
        return invalid(format!("embedded length {} is not a multiple of 4", v.0.len()));
    }
    Ok(v.0.chunks_exact(4).map(|c| Complex64::new(c[0] - c[2], c[1] - c[3])).collect())
}

/// Sparse factor with every nonzero expanded to its 4×4 block.
#[derive(Debug, Clone)]
pub struct EmbeddedFactor {
    rows: usize,
    entries: Vec<(usize, usize, [[f64; 4]; 4])>,
}

impl EmbeddedFactor {
    pub fn from_sparse(s: &SparseMatrix) -> Self {
        let mut entries = Vec::with_capacity(s.values.len());
        for r in 0..s.rows {
            for idx in s.indptr[r]..s.indptr[r + 1] {
                entries.push((r, s.indices[idx], embed_scalar(s.values[idx])));
            }
        }
        EmbeddedFactor { rows: s.rows, entries }
    }

    /// `relu(F̂ · v)`.
    pub fn forward(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; 4 * self.rows];
        for (r, c, b) in &self.entries {
            let src = &v[4 * c..4 * c + 4];
            for u in 0..4 {
                out[4 * r + u] += b[u].iter().zip(src).map(|(a, x)| a * x).sum::<f64>();
            }
        }
        relu(&mut out);
        out
    }
}

/// Real ReLU network with zero biases built from the chain.
pub fn embed_chain(f: &ButterflyFactors) -> Vec<EmbeddedFactor> {
    f.factors().iter().map(|x| EmbeddedFactor::from_sparse(&x.to_sparse())).collect()
}

/// Run `x` through the embedded network and map back to complex values.
pub fn embedded_apply(chain: &[EmbeddedFactor], x: &[Complex64]) -> Result<ComplexVector> {
    let mut v = embed_vector(x).0;
    for layer in chain {
        v = layer.forward(&v);
    }
    unembed(&EmbeddedVector(v))
}
