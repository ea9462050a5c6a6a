//! Synthetic smooth-spectrum signals and their windowed transforms.
//!
//! Each sample draws `N` complex spectrum values with real and imaginary
//! parts uniform on `[−1, 1)`, multiplies value `k` (for `k = 0..N−1`, no
//! wrap-around) by `exp(−(k − c)²/(2w²))`, and keeps the real part of the
//! inverse DFT. Targets are the direct transform of that real signal over
//! the window. Sample `i` uses `ChaCha8Rng` seeded with `seed` on stream `i`,
//! so samples are independent of generation order and thread count.

use crate::error::{invalid, Result};
use crate::oracle::{window_apply, ComplexVector, KernelSign};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub n: usize,
    pub g_center: f64,
    pub g_width: f64,
    pub k0: usize,
    pub k: usize,
    pub sign: KernelSign,
    pub seed: u64,
    pub count: usize,
}

/// Named signal families: `(name, center, width, window start, window size)`
/// at `N = 1024`.
pub const PRESETS: [(&str, f64, f64, usize, usize); 4] = [
    ("dft-lfreq", 0.0, 500.0, 0, 128),
    ("dft-hfreq", 0.0, 500.0, 256, 128),
    ("dftsmooth-lfreq", 0.0, 10.0, 0, 128),
    ("dftsmooth-hfreq", 256.0, 10.0, 256, 128),
];

impl DatasetSpec {
    pub fn new(n: usize, g_center: f64, g_width: f64, k0: usize, k: usize) -> Result<Self> {
        let spec = DatasetSpec { n, g_center, g_width, k0, k, sign: KernelSign::Negative, seed: 0, count: 0 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn preset(name: &str) -> Result<Self> {
        match PRESETS.iter().find(|p| p.0 == name) {
            Some(&(_, c, w, k0, k)) => DatasetSpec::new(1024, c, w, k0, k),
            None => invalid(format!("unknown preset `{name}`")),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_count(mut self, count: usize) -> Self {
        self.count = count;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k == 0 || self.k0 + self.k > self.n {
            return invalid(format!("window [{}, {}) does not fit N = {}", self.k0, self.k0 + self.k, self.n));
        }
        if !(self.g_width > 0.0) || !self.g_center.is_finite() {
            return invalid("Gaussian width must be positive and center finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: ComplexVector,
}

impl Sample {
    pub fn x_complex(&self) -> ComplexVector {
        self.x.iter().map(|&v| Complex64::new(v, 0.0)).collect()
    }
}

/// Real signal of sample `index`.
pub fn signal(spec: &DatasetSpec, index: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index);
    let mut spectrum: Vec<Complex64> = (0..spec.n)
        .map(|k| {
            let (re, im) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let d = k as f64 - spec.g_center;
            Complex64::new(re, im) * (-d * d / (2.0 * spec.g_width * spec.g_width)).exp()
        })
        .collect();
    FftPlanner::new().plan_fft_inverse(spec.n).process(&mut spectrum);
    spectrum.iter().map(|z| z.re / spec.n as f64).collect()
}

pub fn sample(spec: &DatasetSpec, index: u64) -> Result<Sample> {
    let x = signal(spec, index);
    let xc: ComplexVector = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let y = window_apply(spec.n, spec.k0, spec.k, spec.sign, &xc)?;
    Ok(Sample { x, y })
}

/// `spec.count` samples, generated in parallel, ordered by index.
pub fn generate(spec: &DatasetSpec) -> Result<Vec<Sample>> {
    generate_range(spec, 0, spec.count)
}

/// Samples `start..start+count` of the stream.
pub fn generate_range(spec: &DatasetSpec, start: usize, count: usize) -> Result<Vec<Sample>> {
    spec.validate()?;
    (start..start + count).into_par_iter().map(|i| sample(spec, i as u64)).collect()
}

/// Copies of `base` with shifted centers; spec `i` gets seed `base.seed + i`.
pub fn transfer_specs(base: &DatasetSpec, centers: &[f64]) -> Vec<DatasetSpec> {
    centers
        .iter()
        .enumerate()
        .map(|(i, &c)| DatasetSpec { g_center: c, seed: base.seed.wrapping_add(i as u64), ..base.clone() })
        .collect()
}

/// One row per sample: the N real inputs, then Re/Im pairs of the K targets.
pub fn to_csv(samples: &[Sample]) -> String {
    let mut s = String::new();
    if let Some(first) = samples.first() {
        let cols: Vec<String> = (0..first.x.len())
            .map(|q| format!("x{q}"))
            .chain((0..first.y.len()).flat_map(|p| [format!("y{p}_re"), format!("y{p}_im")]))
            .collect();
        s.push_str(&cols.join(","));
        s.push('\n');
    }
    for smp in samples {
        let vals: Vec<String> = smp
            .x
            .iter()
            .map(|v| format!("{v:e}"))
            .chain(smp.y.iter().flat_map(|z| [format!("{:e}", z.re), format!("{:e}", z.im)]))
            .collect();
        let _ = writeln!(s, "{}", vals.join(","));
    }
    s
}
