//! Quadratic spectral energies and a square-sum readout over transform
//! features.
//!
//! Energies use the unitary DFT `x̂ = N^{-1/2}·F·x`. The readout works on
//! raw (unnormalized) chain outputs, so weights meant for unitary features
//! are divided by `N` when bridged with [`SquareSumLayer::for_raw_features`].

use crate::dataset::{generate_range, DatasetSpec};
use crate::error::{invalid, Result};
use crate::factors::ButterflyFactors;
use crate::training::{add_grads, backprop, forward_acts, zero_grads, Adam, TrainConfig, EVAL_OFFSET};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use std::time::Instant;

fn unitary_spectrum(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    let mut v: Vec<Complex64> = x.iter().map(|&a| Complex64::new(a, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut v);
    let s = 1.0 / (n as f64).sqrt();
    v.iter().map(|z| z * s).collect()
}

/// `Σ_{k=1}^{K−1} (2/k²)|x̂_k|²`.
pub fn energy_e1(x: &[f64], k: usize) -> Result<f64> {
    if k < 2 {
        return invalid("K must be at least 2");
    }
    energy_e2(x, 0, k)
}

/// `Σ_{k=K0+1}^{K0+K−1} (2/(k−K0)²)|x̂_k|²`.
pub fn energy_e2(x: &[f64], k0: usize, k: usize) -> Result<f64> {
    if x.is_empty() || 2 * (k0 + k) > x.len() {
        return invalid(format!("window [{k0}, {}) exceeds N/2 = {}", k0 + k, x.len() / 2));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return invalid("signal must be finite");
    }
    let xh = unitary_spectrum(x);
    Ok((k0 + 1..k0 + k).map(|j| 2.0 / ((j - k0) as f64).powi(2) * xh[j].norm_sqr()).sum())
}

/// `s(f) = Σ_k w_k |f_k|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareSumLayer {
    pub weights: Vec<f64>,
}

impl SquareSumLayer {
    pub fn zeros(k: usize) -> Self {
        SquareSumLayer { weights: vec![0.0; k] }
    }

    /// Weights reproducing the energy on unitary features of the window
    /// `[K0, K0+K)`: `w_0 = 0`, `w_j = 2/j²`.
    pub fn exact(k: usize) -> Self {
        let weights = (0..k).map(|j| if j == 0 { 0.0 } else { 2.0 / (j * j) as f64 }).collect();
        SquareSumLayer { weights }
    }

    /// Rescale for features that carry the unnormalized transform of length `n`.
    pub fn for_raw_features(&self, n: usize) -> Self {
        SquareSumLayer { weights: self.weights.iter().map(|w| w / n as f64).collect() }
    }
}

pub fn square_sum_apply(layer: &SquareSumLayer, features: &[Complex64]) -> Result<f64> {
    if features.len() != layer.weights.len() {
        return invalid(format!("{} features for {} weights", features.len(), layer.weights.len()));
    }
    Ok(layer.weights.iter().zip(features).map(|(w, f)| w * f.norm_sqr()).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorMode {
    Frozen,
    Trainable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SquareSumReport {
    pub pre_train_rel_error: f64,
    pub post_train_rel_error: f64,
    pub curve: Vec<(usize, f64, f64)>,
    pub wall_seconds: f64,
    pub diverged_at: Option<usize>,
}

struct EnergySample {
    x: Vec<Complex64>,
    target: f64,
}

fn energy_samples(spec: &DatasetSpec, start: usize, count: usize) -> Result<Vec<EnergySample>> {
    generate_range(spec, start, count)?
        .into_iter()
        .map(|s| {
            let target = energy_e2(&s.x, spec.k0, spec.k)?;
            Ok(EnergySample { x: s.x_complex(), target })
        })
        .collect()
}

fn mean_rel_error(f: &ButterflyFactors, layer: &SquareSumLayer, data: &[EnergySample]) -> Result<f64> {
    let errs: Result<Vec<f64>> = data
        .par_iter()
        .map(|s| {
            let y = crate::operator::apply(f, &s.x)?;
            let out = square_sum_apply(layer, &y)?;
            Ok(if s.target == 0.0 { out.abs() } else { (out - s.target).abs() / s.target.abs() })
        })
        .collect();
    let errs = errs?;
    Ok(errs.iter().sum::<f64>() / errs.len() as f64)
}

/// Fit the readout (and optionally the chain) to energy targets with loss
/// `Σ_i |s(B x_i) − E(x_i)|²`, where `E` is the windowed energy of the
/// data spec's window.
pub fn train_square_sum(
    f: &ButterflyFactors,
    layer: &SquareSumLayer,
    data: &DatasetSpec,
    cfg: &TrainConfig,
    mode: FactorMode,
) -> Result<(ButterflyFactors, SquareSumLayer, SquareSumReport)> {
    cfg.validate()?;
    let g = f.geometry();
    if data.n != g.n() || data.k != g.k() || data.k0 != g.k0() || layer.weights.len() != g.k() {
        return invalid("dataset window, layer width and factor geometry must agree");
    }
    let start = Instant::now();
    let mut factors = f.clone();
    let mut layer = layer.clone();
    let first = energy_samples(data, 0, cfg.batch_size)?;
    let pre = mean_rel_error(&factors, &layer, &first)?;
    let mut params = factors.parameters();
    let mut w_params: Vec<Complex64> = layer.weights.iter().map(|&w| Complex64::new(w, 0.0)).collect();
    let (mut adam_f, mut adam_w) = (Adam::new(params.len()), Adam::new(w_params.len()));
    let mut curve = Vec::new();
    let mut diverged_at = None;

    for iter in 0..cfg.max_iters {
        let batch =
            if iter == 0 { first.iter().map(|s| EnergySample { x: s.x.clone(), target: s.target }).collect() } else {
                energy_samples(data, iter * cfg.batch_size, cfg.batch_size)?
            };
        let parts: Vec<(f64, Vec<f64>, Option<crate::training::Gradients>)> = batch
            .par_chunks(4)
            .map(|chunk| {
                let mut gw = vec![0.0; layer.weights.len()];
                let mut gf = (mode == FactorMode::Trainable).then(|| zero_grads(&factors));
                let mut l = 0.0;
                for s in chunk {
                    let acts = forward_acts(&factors, s.x.clone());
                    let y = acts.last().unwrap();
                    let out: f64 = layer.weights.iter().zip(y).map(|(w, z)| w * z.norm_sqr()).sum();
                    let e = out - s.target;
                    l += e * e;
                    for (g, z) in gw.iter_mut().zip(y) {
                        *g += 2.0 * e * z.norm_sqr();
                    }
                    if let Some(gf) = gf.as_mut() {
                        let delta = layer.weights.iter().zip(y).map(|(w, z)| 4.0 * e * w * z).collect();
                        backprop(&factors, &acts, delta, gf);
                    }
                }
                (l, gw, gf)
            })
            .collect();
        let mut total = 0.0;
        let mut gw = vec![0.0; layer.weights.len()];
        let mut gf: Option<crate::training::Gradients> = None;
        for (l, w, f_part) in parts {
            total += l;
            for (a, b) in gw.iter_mut().zip(&w) {
                *a += b;
            }
            if let Some(p) = f_part {
                match gf.as_mut() {
                    Some(acc) => add_grads(acc, &p),
                    None => gf = Some(p),
                }
            }
        }
        let lr = cfg.learning_rate(iter);
        if !total.is_finite() {
            diverged_at = Some(iter);
            break;
        }
        curve.push((iter, total, lr));
        let gw: Vec<Complex64> = gw.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
        adam_w.step(&mut w_params, &gw, lr, cfg);
        layer.weights = w_params.iter().map(|z| z.re).collect();
        if let Some(gf) = gf {
            let flat: Vec<Complex64> = gf.into_iter().flatten().flatten().collect();
            adam_f.step(&mut params, &flat, lr, cfg);
            factors.set_parameters(&params)?;
        }
    }

    let post = if cfg.max_iters == 0 {
        pre
    } else {
        mean_rel_error(&factors, &layer, &energy_samples(data, EVAL_OFFSET, cfg.eval_samples.max(1))?)?
    };
    let report = SquareSumReport {
        pre_train_rel_error: pre,
        post_train_rel_error: post,
        curve,
        wall_seconds: start.elapsed().as_secs_f64(),
        diverged_at,
    };
    Ok((factors, layer, report))
}
