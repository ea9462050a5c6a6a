//! Hierarchical time/frequency partitions shared by every layer of the
//! factorization.
//!
//! Time `[0, 1)` is bisected `L` times. Frequency `[K0, K0+K)` is bisected
//! in step with time for the first `L_min` levels, held fixed up to the
//! switch level `L_t`, and bisected again afterwards. Level `ℓ` pairs the
//! frequency partition `A^ℓ` with the time partition `B^{L−ℓ}`; every such
//! pair has `w(A)·w(B)` bounded, which is what makes the kernel low-rank on
//! it.

use crate::chebyshev::{GridKind, Interval};
use crate::error::{invalid, Result};
use crate::oracle::KernelSign;
use std::f64::consts::{E, PI};

/// Which side of the time/frequency pair a domain lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Frequency,
    Time,
}

/// Domain counts and widths on one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerLayout {
    pub level: usize,
    /// Number of frequency domains `A^ℓ_i`.
    pub freq_count: usize,
    pub freq_width: f64,
    /// Number of time domains `B^{L−ℓ}_j`.
    pub time_count: usize,
    pub time_width: f64,
}

impl LayerLayout {
    pub fn width_product(&self) -> f64 {
        self.freq_width * self.time_width
    }
}

/// Partition and shape parameters of a butterfly factorization.
///
/// Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ButterflyGeometry {
    n: usize,
    k: usize,
    k0: usize,
    depth: usize,
    freq_depth: usize,
    rank: usize,
    grid: GridKind,
    sign: KernelSign,
    layers: Vec<LayerLayout>,
}

fn log2_exact(v: usize, what: &str) -> Result<usize> {
    if v == 0 || !v.is_power_of_two() {
        return invalid(format!("{what} = {v} is not a power of two"));
    }
    Ok(v.trailing_zeros() as usize)
}

impl ButterflyGeometry {
    /// `n` samples on `[0, 1)`, output window `[k0, k0 + k)`, `depth` levels of
    /// which the last `freq_depth` interpolate in frequency, `rank` Chebyshev
    /// nodes per domain.
    pub fn new(
        n: usize,
        k: usize,
        k0: usize,
        depth: usize,
        freq_depth: usize,
        rank: usize,
    ) -> Result<Self> {
        let log_n = log2_exact(n, "N")?;
        let log_k = log2_exact(k, "K")?;
        if k > n {
            return invalid(format!("K = {k} exceeds N = {n}"));
        }
        if depth > log_n {
            return invalid(format!("L = {depth} exceeds log2 N = {log_n}"));
        }
        if freq_depth > log_k {
            return invalid(format!("L_xi = {freq_depth} exceeds log2 K = {log_k}"));
        }
        if freq_depth > depth {
            return invalid(format!("L_xi = {freq_depth} exceeds L = {depth}"));
        }
        if rank == 0 {
            return invalid("r must be at least 1");
        }
        let mut g = ButterflyGeometry {
            n,
            k,
            k0,
            depth,
            freq_depth,
            rank,
            grid: GridKind::default(),
            sign: KernelSign::default(),
            layers: Vec::new(),
        };
        g.layers = (0..=depth)
            .map(|level| LayerLayout {
                level,
                freq_count: g.freq_count(level),
                freq_width: k as f64 / g.freq_count(level) as f64,
                time_count: 1 << (depth - level),
                time_width: (level as f64 - depth as f64).exp2(),
            })
            .collect();
        Ok(g)
    }

    pub fn with_grid(mut self, grid: GridKind) -> Self {
        self.grid = grid;
        self
    }

    pub fn with_sign(mut self, sign: KernelSign) -> Self {
        self.sign = sign;
        self
    }

    /// Input length `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Window width `K`.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Window start `K0`.
    pub fn k0(&self) -> usize {
        self.k0
    }

    /// Total depth `L`.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Levels before the switch, `L_t = L − L_ξ`.
    pub fn time_depth(&self) -> usize {
        self.depth - self.freq_depth
    }

    /// Levels after the switch, `L_ξ`.
    pub fn freq_depth(&self) -> usize {
        self.freq_depth
    }

    /// `L_min = min(L_t, log2 K − L_ξ)`: levels on which both sides bisect.
    pub fn shared_depth(&self) -> usize {
        self.time_depth().min(self.log_k() - self.freq_depth)
    }

    /// Mixing-channel count `r`.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn grid(&self) -> GridKind {
        self.grid
    }

    pub fn sign(&self) -> KernelSign {
        self.sign
    }

    pub fn log_k(&self) -> usize {
        self.k.trailing_zeros() as usize
    }

    pub fn log_n(&self) -> usize {
        self.n.trailing_zeros() as usize
    }

    pub fn layers(&self) -> &[LayerLayout] {
        &self.layers
    }

    pub fn layer(&self, level: usize) -> &LayerLayout {
        &self.layers[level]
    }

    /// Number of frequency domains on `level`.
    pub fn freq_count(&self, level: usize) -> usize {
        let (lmin, lt) = (self.shared_depth(), self.time_depth());
        if level <= lmin {
            1 << level
        } else if level <= lt {
            1 << lmin
        } else {
            1 << (level - lt + lmin)
        }
    }

    /// Number of time domains paired with `level`, `2^{L−ℓ}`.
    pub fn time_count(&self, level: usize) -> usize {
        1 << (self.depth - level)
    }

    /// Samples per time leaf, `N / 2^L`.
    pub fn time_leaf_len(&self) -> usize {
        self.n >> self.depth
    }

    /// Integer frequencies per frequency leaf, `K / 2^{L_ξ + L_min}`.
    pub fn freq_leaf_len(&self) -> usize {
        self.k / self.freq_count(self.depth)
    }

    /// `πe·K ≤ r·2^{min(L, log K)}`.
    pub fn theorem3_admissible(&self) -> bool {
        let reach = (self.depth.min(self.log_k()) as f64).exp2();
        PI * E * self.k as f64 <= self.rank as f64 * reach
    }

    /// `w(A)·w(B) ≤ r/(πe)` on every level.
    pub fn lowrank_admissible(&self) -> bool {
        let limit = self.rank as f64 / (PI * E);
        self.layers.iter().all(|l| l.width_product() <= limit)
    }

    /// Frequency domain `A^level_index` or time domain `B^level_index`.
    ///
    /// On the time side `level` is the partition depth, so
    /// `domain(1, Time, 1) = [1/2, 1)` whatever `L` is. The time domain paired
    /// with frequency level `ℓ` is `domain(L − ℓ, Time, j)`.
    pub fn domain(&self, level: usize, side: Side, index: usize) -> Result<Interval> {
        if level > self.depth {
            return invalid(format!("level {level} exceeds depth {}", self.depth));
        }
        match side {
            Side::Frequency => {
                let count = self.freq_count(level);
                if index >= count {
                    return invalid(format!(
                        "frequency index {index} out of range ({count} domains at level {level})"
                    ));
                }
                let width = self.k / count;
                let lo = (self.k0 + index * width) as f64;
                Interval::new(lo, lo + width as f64)
            }
            Side::Time => {
                let count = 1usize << level;
                if index >= count {
                    return invalid(format!(
                        "time index {index} out of range ({count} domains at depth {level})"
                    ));
                }
                let w = 1.0 / count as f64;
                Interval::new(index as f64 * w, (index + 1) as f64 * w)
            }
        }
    }

    /// Time sample `t_q = q/N` (zero-based `q`).
    pub fn sample_time(&self, q: usize) -> f64 {
        q as f64 / self.n as f64
    }

    /// Output frequency `ξ_p = K0 + p` (zero-based `p`).
    pub fn output_frequency(&self, p: usize) -> usize {
        self.k0 + p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn shared_depth_examples() {
        let g = ButterflyGeometry::new(1024, 64, 0, 5, 2, 8).unwrap();
        assert_eq!((g.time_depth(), g.shared_depth()), (3, 3));
        let g = ButterflyGeometry::new(1024, 256, 0, 8, 1, 8).unwrap();
        assert_eq!((g.time_depth(), g.shared_depth()), (7, 7));
        let g = ButterflyGeometry::new(16, 16, 0, 4, 0, 4).unwrap();
        assert_eq!((g.time_depth(), g.shared_depth()), (4, 4));
        let leaf = g.domain(4, Side::Time, 0).unwrap();
        assert_eq!(leaf.width(), 1.0 / 16.0);
    }

    #[test]
    fn domain_examples() {
        let g = ButterflyGeometry::new(1024, 64, 0, 5, 2, 8).unwrap();
        let b = g.domain(1, Side::Time, 1).unwrap();
        assert_eq!((b.lo(), b.hi()), (0.5, 1.0));
        let a = g.domain(0, Side::Frequency, 0).unwrap();
        assert_eq!((a.lo(), a.hi()), (0.0, 64.0));
        assert_eq!(g.freq_count(5), 32);
        assert_eq!(g.freq_leaf_len(), 2);
        assert_eq!(g.domain(5, Side::Frequency, 31).unwrap().width(), 2.0);
        assert!(g.domain(5, Side::Frequency, 32).is_err());
        assert!(g.domain(6, Side::Time, 0).is_err());

        let shifted = ButterflyGeometry::new(1024, 128, 256, 6, 1, 4).unwrap();
        let a = shifted.domain(0, Side::Frequency, 0).unwrap();
        assert_eq!((a.lo(), a.hi()), (256.0, 384.0));
    }

    #[test]
    fn invalid_shapes() {
        let bad = [
            ButterflyGeometry::new(1000, 64, 0, 4, 1, 8),
            ButterflyGeometry::new(1024, 60, 0, 4, 1, 8),
            ButterflyGeometry::new(64, 128, 0, 4, 1, 8),
            ButterflyGeometry::new(64, 16, 0, 7, 1, 8),
            ButterflyGeometry::new(64, 16, 0, 6, 5, 8),
            ButterflyGeometry::new(64, 16, 0, 2, 3, 8),
            ButterflyGeometry::new(64, 16, 0, 4, 1, 0),
        ];
        for b in bad {
            assert!(matches!(b, Err(Error::InvalidArgument(_))));
        }
    }

    #[test]
    fn table_one_products() {
        for (n, k, l, lx) in [(1024, 64, 5, 2), (256, 32, 8, 1), (256, 32, 8, 3), (64, 16, 6, 0)] {
            let g = ButterflyGeometry::new(n, k, 0, l, lx, 4).unwrap();
            let (lmin, lt) = (g.shared_depth(), g.time_depth());
            for lay in g.layers() {
                assert_eq!(lay.freq_count as f64 * lay.freq_width, k as f64);
                assert_eq!(lay.time_count as f64 * lay.time_width, 1.0);
                let ell = lay.level as i64;
                let expect = if lay.level <= lmin {
                    k as f64 * (-(l as f64)).exp2()
                } else if lay.level <= lt {
                    k as f64 * ((ell - lmin as i64 - l as i64) as f64).exp2()
                } else {
                    k as f64 * (-((lx + lmin) as f64)).exp2()
                };
                assert_eq!(lay.width_product(), expect, "level {}", lay.level);
            }
        }
    }

    #[test]
    fn domains_tile_the_root() {
        let g = ButterflyGeometry::new(256, 32, 16, 8, 2, 4).unwrap();
        for level in 0..=g.depth() {
            let count = g.freq_count(level);
            let mut edge = 16.0;
            for i in 0..count {
                let a = g.domain(level, Side::Frequency, i).unwrap();
                assert_eq!(a.lo(), edge);
                edge = a.hi();
            }
            assert_eq!(edge, 48.0);
            let mut edge = 0.0;
            for j in 0..(1 << level) {
                let b = g.domain(level, Side::Time, j).unwrap();
                assert_eq!(b.lo(), edge);
                edge = b.hi();
            }
            assert_eq!(edge, 1.0);
        }
    }

    #[test]
    fn admissibility() {
        // r = 8 can never satisfy πeK ≤ r·2^{min(L, log K)} ≤ rK.
        let g = ButterflyGeometry::new(1024, 64, 0, 6, 1, 8).unwrap();
        assert!(!g.theorem3_admissible());
        let g = ButterflyGeometry::new(1024, 64, 0, 6, 1, 9).unwrap();
        assert!(g.theorem3_admissible());
        assert!(g.lowrank_admissible());
    }
}
