//! Chebyshev grids, Lagrange basis evaluation and the low-rank
//! interpolation bound for the Fourier kernel on a domain pair.

use crate::error::{invalid, Error, Result};
use crate::oracle::{fourier_kernel, KernelSign};
use std::f64::consts::{E, PI};

/// Node placement on the reference interval `[-1/2, 1/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum GridKind {
    /// Chebyshev points of the first kind, `½cos((2i−1)π/(2r))`.
    ///
    /// All nodes are interior, the Lebesgue constant obeys
    /// `Λ_r ≤ (2/π)ln r + 1`, and this is the grid that reproduces the
    /// published approximation tables.
    #[default]
    Roots,
    /// `½cos((i−1)π/r)`, `i = 1..r`: includes `+½`, omits `−½`.
    Literal,
}

impl GridKind {
    pub fn name(self) -> &'static str {
        match self {
            GridKind::Roots => "roots",
            GridKind::Literal => "literal",
        }
    }
}

impl std::str::FromStr for GridKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "roots" => Ok(GridKind::Roots),
            "literal" => Ok(GridKind::Literal),
            other => invalid(format!("unknown grid kind `{other}`")),
        }
    }
}

/// A closed-open interval `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    /// Zero-width intervals are accepted; they stand for a single point.
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || hi < lo {
            return invalid(format!("interval [{lo}, {hi}) is not well formed"));
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x < self.hi
    }
}

/// Chebyshev nodes of order `r` on the reference interval.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevGrid {
    kind: GridKind,
    points: Vec<f64>,
}

impl ChebyshevGrid {
    pub fn new(order: usize, kind: GridKind) -> Result<Self> {
        if order == 0 {
            return invalid("Chebyshev order must be at least 1");
        }
        let r = order as f64;
        let points = (0..order)
            .map(|i| {
                let i = i as f64;
                match kind {
                    GridKind::Roots => 0.5 * ((2.0 * i + 1.0) * PI / (2.0 * r)).cos(),
                    GridKind::Literal => 0.5 * (i * PI / r).cos(),
                }
            })
            .collect();
        Ok(ChebyshevGrid { kind, points })
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    /// Reference nodes in `[-1/2, 1/2]`.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Nodes mapped affinely onto `target`: `center + width·z_i`.
    pub fn mapped(&self, target: &Interval) -> Vec<f64> {
        let (c, w) = (target.center(), target.width());
        self.points.iter().map(|z| c + w * z).collect()
    }
}

/// Nodes of order `r` mapped onto `target`, in grid order.
pub fn cheb_points(r: usize, target: &Interval, kind: GridKind) -> Result<Vec<f64>> {
    Ok(ChebyshevGrid::new(r, kind)?.mapped(target))
}

/// `k`-th Lagrange basis polynomial of `nodes` evaluated at `x`, via the
/// plain product formula. `k` is zero-based.
pub fn lagrange_eval(nodes: &[f64], k: usize, x: f64) -> Result<f64> {
    if k >= nodes.len() {
        return invalid(format!("basis index {k} out of range for {} nodes", nodes.len()));
    }
    for (i, a) in nodes.iter().enumerate() {
        for (j, b) in nodes.iter().enumerate().skip(i + 1) {
            if a == b {
                return Err(Error::DegenerateGrid(i, j));
            }
        }
    }
    Ok(lagrange(nodes, k, x))
}

/// Unchecked product-form basis evaluation; callers guarantee distinct nodes.
#[inline]
pub(crate) fn lagrange(nodes: &[f64], k: usize, x: f64) -> f64 {
    let zk = nodes[k];
    nodes
        .iter()
        .enumerate()
        .filter(|&(p, _)| p != k)
        .fold(1.0, |acc, (_, &zp)| acc * (x - zp) / (zk - zp))
}

/// `(2/π) ln r + 1`, the classical Lebesgue-constant bound.
pub fn lebesgue_bound(r: usize) -> f64 {
    2.0 / PI * (r as f64).ln() + 1.0
}

/// Sampled Lebesgue constant `max_x Σ_i |L_i(x)|` over `samples` uniformly
/// spaced points of `[-1/2, 1/2]` (endpoints included). Sampling can only
/// underestimate the true maximum.
pub fn lebesgue_constant(r: usize, samples: usize, kind: GridKind) -> Result<f64> {
    if samples < 1000 {
        return invalid("Lebesgue sampling needs at least 1000 points");
    }
    let grid = ChebyshevGrid::new(r, kind)?;
    let nodes = grid.points();
    let mut best: f64 = 0.0;
    for s in 0..samples {
        let x = -0.5 + s as f64 / (samples - 1) as f64;
        let sum: f64 = (0..r).map(|k| lagrange(nodes, k, x).abs()).sum();
        best = best.max(sum);
    }
    Ok(best)
}

/// Which variable the low-rank expansion interpolates in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowRankForm {
    /// Interpolate in `t` on `B`, phase-corrected by the center of `A`.
    Time,
    /// Interpolate in `ξ` on `A`, phase-corrected by the center of `B`.
    Frequency,
}

/// Result of a sampled low-rank residual check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowRankCheck {
    pub measured_sup_error: f64,
    pub theorem_bound: f64,
    /// Whether `w(A)·w(B) ≤ r/(πe)` holds; the bound is only claimed then.
    pub admissible: bool,
}

/// `(2 + (2/π)ln r)·(πe·w(A)·w(B)/(2r))^r`.
pub fn lowrank_bound(width_product: f64, r: usize) -> f64 {
    let rf = r as f64;
    (2.0 + 2.0 / PI * rf.ln()) * (PI * E * width_product / (2.0 * rf)).powi(r as i32)
}

/// Sample `n_samples × n_samples` uniformly spaced `(ξ, t)` pairs in the
/// closure of `freq × time` and return the largest deviation of the rank-`r`
/// Chebyshev expansion from the Fourier kernel, next to the closed-form bound.
pub fn lowrank_residual(
    freq: &Interval,
    time: &Interval,
    r: usize,
    n_samples: usize,
    form: LowRankForm,
    kind: GridKind,
) -> Result<LowRankCheck> {
    if n_samples == 0 {
        return invalid("need at least one sample per axis");
    }
    let grid = ChebyshevGrid::new(r, kind)?;
    let sign = KernelSign::default();
    let sample = |iv: &Interval, i: usize| {
        if n_samples == 1 {
            iv.center()
        } else {
            iv.lo() + iv.width() * i as f64 / (n_samples - 1) as f64
        }
    };

    let mut worst: f64 = 0.0;
    match form {
        LowRankForm::Time => {
            let nodes = grid.mapped(time);
            let xi0 = freq.center();
            for a in 0..n_samples {
                let t = sample(time, a);
                let basis: Vec<f64> = (0..r).map(|k| lagrange(&nodes, k, t)).collect();
                for b in 0..n_samples {
                    let xi = sample(freq, b);
                    let approx: num_complex::Complex64 = (0..r)
                        .map(|k| {
                            fourier_kernel(xi * nodes[k], sign)
                                * fourier_kernel(xi0 * (t - nodes[k]), sign)
                                * basis[k]
                        })
                        .sum();
                    worst = worst.max((fourier_kernel(xi * t, sign) - approx).norm());
                }
            }
        }
        LowRankForm::Frequency => {
            let nodes = grid.mapped(freq);
            let t0 = time.center();
            for a in 0..n_samples {
                let xi = sample(freq, a);
                let basis: Vec<f64> = (0..r).map(|k| lagrange(&nodes, k, xi)).collect();
                for b in 0..n_samples {
                    let t = sample(time, b);
                    let approx: num_complex::Complex64 = (0..r)
                        .map(|k| {
                            fourier_kernel((xi - nodes[k]) * t0, sign)
                                * basis[k]
                                * fourier_kernel(nodes[k] * t, sign)
                        })
                        .sum();
                    worst = worst.max((fourier_kernel(xi * t, sign) - approx).norm());
                }
            }
        }
    }

    let product = freq.width() * time.width();
    Ok(LowRankCheck {
        measured_sup_error: worst,
        theorem_bound: lowrank_bound(product, r),
        admissible: product <= r as f64 / (PI * E),
    })
}
