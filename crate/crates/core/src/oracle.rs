//! Dense discrete Fourier kernel and direct `O(NK)` application; the ground
//! truth every approximation is measured against.

use crate::error::{invalid, Error, Result};
use crate::geometry::ButterflyGeometry;
use num_complex::Complex64;
use std::f64::consts::PI;

pub type ComplexVector = Vec<Complex64>;

/// Largest `rows·cols` a dense matrix may have.
pub const DENSE_LIMIT: usize = 1 << 24;

/// Sign of the exponent in `K(ξ, t) = exp(±2πi ξt)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum KernelSign {
    /// `exp(−2πi ξt)`, the forward transform.
    #[default]
    Negative,
    Positive,
}

impl KernelSign {
    pub fn flipped(self) -> Self {
        match self {
            KernelSign::Negative => KernelSign::Positive,
            KernelSign::Positive => KernelSign::Negative,
        }
    }

    fn factor(self) -> f64 {
        match self {
            KernelSign::Negative => -1.0,
            KernelSign::Positive => 1.0,
        }
    }
}

/// `exp(±2πi z)`, with the argument reduced modulo one first.
#[inline]
pub fn fourier_kernel(z: f64, sign: KernelSign) -> Complex64 {
    let frac = z - z.round();
    Complex64::from_polar(1.0, sign.factor() * 2.0 * PI * frac)
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        check_dense(rows, cols)?;
        Ok(ComplexMatrix { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] })
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return invalid(format!("{} entries for a {rows}x{cols} matrix", data.len()));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return invalid("matrix entries must be finite");
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = ComplexMatrix { rows: n, cols: n, data: vec![Complex64::new(0.0, 0.0); n * n] };
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Result<ComplexVector> {
        if x.len() != self.cols {
            return invalid(format!("vector length {} != {} columns", x.len(), self.cols));
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn sub(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return invalid("matrix shapes differ");
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(ComplexMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn conj(&self) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let mut sums = vec![0.0; self.cols];
        for r in 0..self.rows {
            for (s, z) in sums.iter_mut().zip(self.row(r)) {
                *s += z.norm();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

pub(crate) fn check_dense(rows: usize, cols: usize) -> Result<()> {
    match rows.checked_mul(cols) {
        Some(n) if n <= DENSE_LIMIT => Ok(()),
        _ => Err(Error::Resource(format!(
            "dense {rows}x{cols} matrix exceeds the {DENSE_LIMIT}-entry limit"
        ))),
    }
}

/// Kernel entry for integer frequency `xi` and sample `q` of `n`, reduced
/// exactly in integer arithmetic before the exponential.
#[inline]
fn exact_entry(xi: usize, q: usize, n: usize, sign: KernelSign) -> Complex64 {
    let phase = ((xi as u128 * q as u128) % n as u128) as f64 / n as f64;
    Complex64::from_polar(1.0, sign.factor() * 2.0 * PI * phase)
}

/// `K×N` matrix with entries `exp(∓2πi ξ_p t_q)`, unnormalized.
pub fn dense_kernel(geometry: &ButterflyGeometry) -> Result<ComplexMatrix> {
    window_kernel(geometry.n(), geometry.k0(), geometry.k(), geometry.sign())
}

/// Dense kernel for an arbitrary window `[k0, k0 + k)` over `n` samples.
pub fn window_kernel(n: usize, k0: usize, k: usize, sign: KernelSign) -> Result<ComplexMatrix> {
    check_dense(k, n)?;
    let mut data = Vec::with_capacity(k * n);
    for p in 0..k {
        for q in 0..n {
            data.push(exact_entry(k0 + p, q, n, sign));
        }
    }
    Ok(ComplexMatrix { rows: k, cols: n, data })
}

/// `x̂(ξ_p) = Σ_q K(ξ_p t_q) x(t_q)` by direct summation.
pub fn oracle_apply(geometry: &ButterflyGeometry, x: &[Complex64]) -> Result<ComplexVector> {
    window_apply(geometry.n(), geometry.k0(), geometry.k(), geometry.sign(), x)
}

/// Direct windowed transform of `x` (length `n`) onto `[k0, k0 + k)`.
pub fn window_apply(
    n: usize,
    k0: usize,
    k: usize,
    sign: KernelSign,
    x: &[Complex64],
) -> Result<ComplexVector> {
    if x.len() != n {
        return invalid(format!("input length {} != N = {n}", x.len()));
    }
    Ok((0..k)
        .map(|p| {
            x.iter()
                .enumerate()
                .map(|(q, v)| exact_entry(k0 + p, q, n, sign) * v)
                .sum()
        })
        .collect())
}
