//! Matrix-free application of the factor chain, `O(N log N)` per vector.

use crate::error::{invalid, Result};
use crate::factors::ButterflyFactors;
use crate::oracle::ComplexVector;
use num_complex::Complex64;
use rayon::prelude::*;

/// Two ping-pong buffers sized to the longest stage; reusable across calls.
#[derive(Debug, Clone, Default)]
pub struct Workspace {
    a: Vec<Complex64>,
    b: Vec<Complex64>,
}

impl Workspace {
    pub fn new(f: &ButterflyFactors) -> Self {
        let len = f.max_stage_len();
        Workspace { a: vec![Complex64::new(0.0, 0.0); len], b: vec![Complex64::new(0.0, 0.0); len] }
    }

    /// Apply the chain in order V, H…, M, G…, U, writing the result to `y`.
    pub fn apply_into(&mut self, f: &ButterflyFactors, x: &[Complex64], y: &mut [Complex64]) -> Result<()> {
        let g = f.geometry();
        if x.len() != g.n() {
            return invalid(format!("input length {} != N = {}", x.len(), g.n()));
        }
        if y.len() != g.k() {
            return invalid(format!("output length {} != K = {}", y.len(), g.k()));
        }
        let len = f.max_stage_len();
        if self.a.len() < len {
            self.a.resize(len, Complex64::new(0.0, 0.0));
            self.b.resize(len, Complex64::new(0.0, 0.0));
        }
        let factors = f.factors();
        let last = factors.len() - 1;
        self.a[..x.len()].copy_from_slice(x);
        for (idx, factor) in factors.iter().enumerate() {
            let src = &self.a[..factor.in_len];
            if idx == last {
                factor.apply_into(src, y);
            } else {
                factor.apply_into(src, &mut self.b[..factor.out_len]);
                std::mem::swap(&mut self.a, &mut self.b);
            }
        }
        Ok(())
    }
}

/// `y = U·G···M·H···V·x`.
pub fn apply(f: &ButterflyFactors, x: &[Complex64]) -> Result<ComplexVector> {
    let mut y = vec![Complex64::new(0.0, 0.0); f.geometry().k()];
    Workspace::new(f).apply_into(f, x, &mut y)?;
    Ok(y)
}

/// [`apply`] over a batch, in parallel, results ordered as the inputs.
pub fn apply_batch(f: &ButterflyFactors, xs: &[ComplexVector]) -> Result<Vec<ComplexVector>> {
    let n = f.geometry().n();
    if let Some(bad) = xs.iter().position(|x| x.len() != n) {
        return invalid(format!("batch entry {bad} has length {}, expected {n}", xs[bad].len()));
    }
    xs.par_iter()
        .map_init(
            || Workspace::new(f),
            |ws, x| {
                let mut y = vec![Complex64::new(0.0, 0.0); f.geometry().k()];
                ws.apply_into(f, x, &mut y).map(|_| y)
            },
        )
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factors::{butterfly_init, materialize, random_init, Variant};
    use crate::geometry::ButterflyGeometry;
    use crate::oracle::oracle_apply;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rv(n: usize, rng: &mut ChaCha8Rng) -> ComplexVector {
        (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
    }

    fn norm(v: &[Complex64]) -> f64 {
        v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn zero_and_linearity() {
        let g = ButterflyGeometry::new(64, 16, 0, 4, 1, 3).unwrap();
        let f = random_init(&g, 1, Variant::Butterfly);
        assert!(apply(&f, &vec![Complex64::new(0.0, 0.0); 64]).unwrap().iter().all(|z| z.norm() == 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (x1, x2) = (rv(64, &mut rng), rv(64, &mut rng));
        let (a, b) = (Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.5));
        let mix: ComplexVector = x1.iter().zip(&x2).map(|(u, v)| a * u + b * v).collect();
        let lhs = apply(&f, &mix).unwrap();
        let (y1, y2) = (apply(&f, &x1).unwrap(), apply(&f, &x2).unwrap());
        let rhs: ComplexVector = y1.iter().zip(&y2).map(|(u, v)| a * u + b * v).collect();
        let diff: ComplexVector = lhs.iter().zip(&rhs).map(|(u, v)| u - v).collect();
        assert!(norm(&diff) <= 1e-12 * norm(&rhs));
    }

    #[test]
    fn matches_materialized() {
        let g = ButterflyGeometry::new(256, 64, 16, 6, 2, 5).unwrap();
        let f = butterfly_init(&g).unwrap();
        let m = materialize(&f).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let x = rv(256, &mut rng);
            let (a, b) = (apply(&f, &x).unwrap(), m.mul_vec(&x).unwrap());
            let diff: ComplexVector = a.iter().zip(&b).map(|(u, v)| u - v).collect();
            assert!(norm(&diff) <= 1e-12 * norm(&b));
        }
    }

    #[test]
    fn delta_gives_near_ones() {
        let g = ButterflyGeometry::new(256, 32, 0, 6, 1, 8).unwrap();
        let f = butterfly_init(&g).unwrap();
        let mut x = vec![Complex64::new(0.0, 0.0); 256];
        x[0] = Complex64::new(1.0, 0.0);
        let y = apply(&f, &x).unwrap();
        let want = oracle_apply(&g, &x).unwrap();
        for (a, b) in y.iter().zip(&want) {
            assert!((a - b).norm() < 1e-3);
        }
    }

    #[test]
    fn batch_matches_loop() {
        let g = ButterflyGeometry::new(128, 32, 0, 5, 2, 4).unwrap();
        let f = butterfly_init(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let xs: Vec<ComplexVector> = (0..9).map(|_| rv(128, &mut rng)).collect();
        let ys = apply_batch(&f, &xs).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert_eq!(&apply(&f, x).unwrap(), y);
        }
        let mut ragged = xs.clone();
        ragged[3].pop();
        assert!(apply_batch(&f, &ragged).is_err());
        assert!(apply(&f, &xs[0][..10]).is_err());
    }
}
