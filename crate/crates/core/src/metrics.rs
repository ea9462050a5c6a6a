//! Relative matrix p-norm errors and the closed-form accuracy bound.

use crate::chebyshev::lebesgue_bound;
use crate::error::{invalid, Error, Result};
use crate::factors::{materialize, ButterflyFactors};
use crate::geometry::ButterflyGeometry;
use crate::oracle::{dense_kernel, ComplexMatrix};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::{E, PI};

/// Matrix p-norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormKind {
    /// Maximum absolute column sum.
    One,
    /// Largest singular value.
    Two,
    /// Maximum absolute row sum.
    Inf,
}

impl NormKind {
    pub const ALL: [NormKind; 3] = [NormKind::One, NormKind::Two, NormKind::Inf];

    /// `1/p`.
    pub fn inverse_p(self) -> f64 {
        match self {
            NormKind::One => 1.0,
            NormKind::Two => 0.5,
            NormKind::Inf => 0.0,
        }
    }

    /// The norm of the transposed matrix.
    pub fn transposed(self) -> NormKind {
        match self {
            NormKind::One => NormKind::Inf,
            NormKind::Two => NormKind::Two,
            NormKind::Inf => NormKind::One,
        }
    }
}

impl std::str::FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "one" => Ok(NormKind::One),
            "2" | "two" => Ok(NormKind::Two),
            "inf" | "Inf" | "infinity" => Ok(NormKind::Inf),
            other => invalid(format!("unknown norm `{other}`")),
        }
    }
}

/// Exact matrix norm; the 2-norm comes from the largest eigenvalue of the
/// smaller Gram matrix.
pub fn matrix_norm(m: &ComplexMatrix, p: NormKind) -> f64 {
    match p {
        NormKind::One => m.norm_one(),
        NormKind::Inf => m.norm_inf(),
        NormKind::Two => {
            let a = DMatrix::from_row_slice(m.rows(), m.cols(), m.data());
            let gram = if m.rows() <= m.cols() { &a * a.adjoint() } else { a.adjoint() * &a };
            let eig = gram.symmetric_eigenvalues();
            eig.iter().fold(0.0f64, |acc, v| acc.max(*v)).max(0.0).sqrt()
        }
    }
}

/// `‖reference − approx‖_p / ‖reference‖_p`.
pub fn rel_error_dense(reference: &ComplexMatrix, approx: &ComplexMatrix, p: NormKind) -> Result<f64> {
    let diff = reference.sub(approx)?;
    let denom = matrix_norm(reference, p);
    if denom == 0.0 {
        return invalid("reference matrix is zero");
    }
    Ok(matrix_norm(&diff, p) / denom)
}

/// Relative error of the factor chain against the dense kernel.
pub fn rel_error(f: &ButterflyFactors, p: NormKind) -> Result<f64> {
    let kernel = dense_kernel(f.geometry())?;
    rel_error_dense(&kernel, &materialize(f)?, p)
}

/// All three relative errors plus the absolute error norms, from one
/// materialization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub eps1: f64,
    pub eps2: f64,
    pub eps_inf: f64,
    pub abs1: f64,
    pub abs2: f64,
    pub abs_inf: f64,
}

impl ErrorReport {
    pub fn relative(&self, p: NormKind) -> f64 {
        match p {
            NormKind::One => self.eps1,
            NormKind::Two => self.eps2,
            NormKind::Inf => self.eps_inf,
        }
    }

    pub fn absolute(&self, p: NormKind) -> f64 {
        match p {
            NormKind::One => self.abs1,
            NormKind::Two => self.abs2,
            NormKind::Inf => self.abs_inf,
        }
    }
}

pub fn error_report(f: &ButterflyFactors) -> Result<ErrorReport> {
    let kernel = dense_kernel(f.geometry())?;
    let diff = kernel.sub(&materialize(f)?)?;
    let abs = NormKind::ALL.map(|p| matrix_norm(&diff, p));
    let rel = NormKind::ALL.map(|p| abs[p as usize] / matrix_norm(&kernel, p));
    Ok(ErrorReport {
        eps1: rel[0],
        eps2: rel[1],
        eps_inf: rel[2],
        abs1: abs[0],
        abs2: abs[1],
        abs_inf: abs[2],
    })
}

/// Closed-form accuracy bound on `‖K x − B x‖_p / ‖x‖_p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem3Bound {
    pub value: f64,
    /// Depth-explicit form, defined when `L ≤ log K`.
    pub depth_form: Option<f64>,
    pub admissible: bool,
}

pub fn theorem3_bound(g: &ButterflyGeometry, p: NormKind) -> Theorem3Bound {
    let r = g.rank() as f64;
    let k = g.k() as f64;
    let (l, lt, lx) = (g.depth() as f64, g.time_depth() as f64, g.freq_depth() as f64);
    let lam = lebesgue_bound(g.rank());
    let ip = p.inverse_p();
    let m = (k / 2f64.powf(l)).min(1.0);
    let r_exp = lt * (1.0 - ip) + lx * ip;
    // Work in logs: (πe)^r and r^{r−1} overflow for large r.
    let ln_value = ip * m.ln() + (r_exp + 1.0) * r.ln() + (l + 3.0) * (2.0 * lam).ln() + k.ln()
        + r * (PI * E).ln()
        - (r - 1.0) * r.ln();
    let depth_form = (g.depth() <= g.log_k()).then(|| {
        let ln_c = 3.0 * (2.0 * lam).ln() + r * (PI * E * k).ln() - (r - 1.0) * (2.0 * r).ln();
        (ln_c + l * (lam.ln() - (r - 2.0) * 2f64.ln()) + r_exp * r.ln()).exp()
    });
    Theorem3Bound { value: ln_value.exp(), depth_form, admissible: g.theorem3_admissible() }
}

/// Largest singular value by power iteration on `MᴴM`, from the normalized
/// all-ones start vector.
pub fn spectral_norm(m: &ComplexMatrix) -> Result<f64> {
    const TOL: f64 = 1e-10;
    const MAX_ITERS: usize = 2000;
    if m.data().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return invalid("matrix entries must be finite");
    }
    let n = m.cols();
    if n == 0 || m.rows() == 0 {
        return Ok(0.0);
    }
    let mut v = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
    let mut sigma = 0.0;
    for _ in 0..MAX_ITERS {
        let u = m.mul_vec(&v)?;
        let mut w = vec![Complex64::new(0.0, 0.0); n];
        for (r, ur) in u.iter().enumerate() {
            for (wc, a) in w.iter_mut().zip(m.row(r)) {
                *wc += a.conj() * ur;
            }
        }
        let wn = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if wn == 0.0 {
            return Ok(0.0);
        }
        let next = wn.sqrt();
        let done = (next - sigma).abs() <= TOL * next;
        sigma = next;
        if done {
            return Ok(sigma);
        }
        v = w.into_iter().map(|z| z / wn).collect();
    }
    Err(Error::NotConverged { iterations: MAX_ITERS, last: sigma })
}
