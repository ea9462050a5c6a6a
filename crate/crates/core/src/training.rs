//! Gradient refinement of the factor chain on generated data.
//!
//! The chain is trained as a complex linear map (no embedding, no biases).
//! For a real loss `ℓ` of a complex weight `w`, the gradient used is
//! `∂ℓ/∂Re w + i ∂ℓ/∂Im w`; steepest descent steps along its negative.

use crate::dataset::{generate_range, DatasetSpec, Sample};
use crate::error::{invalid, Error, Result};
use crate::factors::ButterflyFactors;
use crate::operator::Workspace;
use num_complex::Complex64;
use rayon::prelude::*;
use std::fmt::Write as _;
use std::time::Instant;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Samples per reduction chunk; fixed so sums do not depend on thread count.
const CHUNK: usize = 4;

/// Stream offset of held-out evaluation samples.
pub const EVAL_OFFSET: usize = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Optimizer {
    Adam,
    Sgd,
}

impl std::str::FromStr for Optimizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adam" => Ok(Optimizer::Adam),
            "sgd" => Ok(Optimizer::Sgd),
            other => invalid(format!("unknown optimizer `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub max_iters: usize,
    pub lr_init: f64,
    pub lr_decay_rate: f64,
    pub lr_decay_steps: usize,
    pub optimizer: Optimizer,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Held-out samples for the post-training error.
    pub eval_samples: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 32,
            max_iters: 2000,
            lr_init: 1e-4,
            lr_decay_rate: 0.985,
            lr_decay_steps: 100,
            optimizer: Optimizer::Adam,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
            eval_samples: 1000,
        }
    }
}

impl TrainConfig {
    /// Default learning rate for an initialization: 1e-4 for butterfly, 1e-3 for random.
    pub fn default_lr(init: crate::factors::InitKind) -> f64 {
        match init {
            crate::factors::InitKind::Butterfly => 1e-4,
            crate::factors::InitKind::Random => 1e-3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lr_init > 0.0) {
            return invalid("learning rate must be positive");
        }
        if !(self.lr_decay_rate > 0.0 && self.lr_decay_rate <= 1.0) {
            return invalid("decay rate must lie in (0, 1]");
        }
        if self.batch_size == 0 || self.lr_decay_steps == 0 {
            return invalid("batch size and decay steps must be positive");
        }
        Ok(())
    }

    pub fn learning_rate(&self, iter: usize) -> f64 {
        self.lr_init * self.lr_decay_rate.powf(iter as f64 / self.lr_decay_steps as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub pre_train_rel_error: f64,
    pub post_train_rel_error: f64,
    pub post_train_rel_std: f64,
    /// `(iteration, batch loss, learning rate)`.
    pub curve: Vec<(usize, f64, f64)>,
    pub wall_seconds: f64,
    /// Iteration at which the loss stopped being finite.
    pub diverged_at: Option<usize>,
}

impl TrainReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iteration,loss,lr\n");
        for (i, l, lr) in &self.curve {
            let _ = writeln!(s, "{i},{l:e},{lr:e}");
        }
        s
    }
}

fn check_batch(f: &ButterflyFactors, batch: &[Sample]) -> Result<()> {
    if batch.is_empty() {
        return invalid("empty batch");
    }
    let g = f.geometry();
    if let Some(s) = batch.iter().find(|s| s.x.len() != g.n() || s.y.len() != g.k()) {
        return invalid(format!("sample shape ({}, {}) != (N, K) = ({}, {})", s.x.len(), s.y.len(), g.n(), g.k()));
    }
    Ok(())
}

fn residual_sq(f: &ButterflyFactors, ws: &mut Workspace, s: &Sample, out: &mut [Complex64]) -> f64 {
    ws.apply_into(f, &s.x_complex(), out).expect("shapes checked");
    out.iter().zip(&s.y).map(|(a, b)| (a - b).norm_sqr()).sum()
}

/// `Σ_i ‖apply(x_i) − y_i‖²`.
pub fn loss(f: &ButterflyFactors, batch: &[Sample]) -> Result<f64> {
    check_batch(f, batch)?;
    let parts: Vec<f64> = batch
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut ws = Workspace::new(f);
            let mut y = vec![ZERO; f.geometry().k()];
            chunk.iter().map(|s| residual_sq(f, &mut ws, s, &mut y)).sum()
        })
        .collect();
    Ok(parts.into_iter().sum())
}

/// Per-factor, per-block gradients with the same layout as the block data.
pub type Gradients = Vec<Vec<Vec<Complex64>>>;

pub(crate) fn zero_grads(f: &ButterflyFactors) -> Gradients {
    f.factors().iter().map(|x| x.blocks.iter().map(|b| vec![ZERO; b.data.len()]).collect()).collect()
}

pub(crate) fn add_grads(acc: &mut Gradients, other: &Gradients) {
    for (a, b) in acc.iter_mut().flatten().zip(other.iter().flatten()) {
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
    }
}

/// Every intermediate vector of the chain, input first.
pub(crate) fn forward_acts(f: &ButterflyFactors, x: Vec<Complex64>) -> Vec<Vec<Complex64>> {
    let factors = f.factors();
    let mut acts: Vec<Vec<Complex64>> = Vec::with_capacity(factors.len() + 1);
    acts.push(x);
    for factor in factors {
        let mut y = vec![ZERO; factor.out_len];
        factor.apply_into(acts.last().unwrap(), &mut y);
        acts.push(y);
    }
    acts
}

/// Push an output gradient back through the chain, adding block gradients.
pub(crate) fn backprop(f: &ButterflyFactors, acts: &[Vec<Complex64>], mut delta: Vec<Complex64>, grads: &mut Gradients) {
    for (idx, factor) in f.factors().iter().enumerate().rev() {
        factor.accumulate_outer(&delta, &acts[idx], &mut grads[idx]);
        if idx > 0 {
            let mut prev = vec![ZERO; factor.in_len];
            factor.adjoint_into(&delta, &mut prev);
            delta = prev;
        }
    }
}

fn accumulate_sample(f: &ButterflyFactors, s: &Sample, grads: &mut Gradients) -> f64 {
    let acts = forward_acts(f, s.x_complex());
    let out = acts.last().unwrap();
    let delta: Vec<Complex64> = out.iter().zip(&s.y).map(|(a, b)| 2.0 * (a - b)).collect();
    let loss = out.iter().zip(&s.y).map(|(a, b)| (a - b).norm_sqr()).sum();
    backprop(f, &acts, delta, grads);
    loss
}

/// Loss and its gradient over a batch, reduced in sample order.
pub fn loss_and_gradient(f: &ButterflyFactors, batch: &[Sample]) -> Result<(f64, Gradients)> {
    check_batch(f, batch)?;
    let parts: Vec<(f64, Gradients)> = batch
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut g = zero_grads(f);
            let l = chunk.iter().map(|s| accumulate_sample(f, s, &mut g)).sum();
            (l, g)
        })
        .collect();
    let mut iter = parts.into_iter();
    let (mut total, mut acc) = iter.next().expect("nonempty batch");
    for (l, g) in iter {
        total += l;
        add_grads(&mut acc, &g);
    }
    Ok((total, acc))
}

pub fn gradient(f: &ButterflyFactors, batch: &[Sample]) -> Result<Gradients> {
    loss_and_gradient(f, batch).map(|(_, g)| g)
}

/// Mean and standard deviation of `‖apply(x) − y‖ / ‖y‖`.
pub fn evaluate(f: &ButterflyFactors, data: &[Sample]) -> Result<(f64, f64)> {
    check_batch(f, data).map_err(|e| match data.is_empty() {
        true => Error::InvalidArgument("empty dataset".into()),
        false => e,
    })?;
    let errs: Vec<f64> = data
        .par_iter()
        .map_init(
            || (Workspace::new(f), vec![ZERO; f.geometry().k()]),
            |(ws, y), s| {
                let num = residual_sq(f, ws, s, y).sqrt();
                let den = s.y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if den == 0.0 {
                    num
                } else {
                    num / den
                }
            },
        )
        .collect();
    let n = errs.len() as f64;
    let mean = errs.iter().sum::<f64>() / n;
    let var = errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
    Ok((mean, var.sqrt()))
}

/// Adam state with separate second moments for real and imaginary parts.
pub(crate) struct Adam {
    m: Vec<Complex64>,
    v_re: Vec<f64>,
    v_im: Vec<f64>,
    t: i32,
}

impl Adam {
    pub(crate) fn new(len: usize) -> Self {
        Adam { m: vec![ZERO; len], v_re: vec![0.0; len], v_im: vec![0.0; len], t: 0 }
    }

    pub(crate) fn step(&mut self, params: &mut [Complex64], grad: &[Complex64], lr: f64, cfg: &TrainConfig) {
        self.t += 1;
        let (b1, b2) = (cfg.beta1, cfg.beta2);
        let c1 = 1.0 - b1.powi(self.t);
        let c2 = 1.0 - b2.powi(self.t);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = b1 * self.m[i] + (1.0 - b1) * g;
            self.v_re[i] = b2 * self.v_re[i] + (1.0 - b2) * g.re * g.re;
            self.v_im[i] = b2 * self.v_im[i] + (1.0 - b2) * g.im * g.im;
            let m = self.m[i] / c1;
            params[i].re -= lr * m.re / ((self.v_re[i] / c2).sqrt() + cfg.epsilon);
            params[i].im -= lr * m.im / ((self.v_im[i] / c2).sqrt() + cfg.epsilon);
        }
    }
}

/// Train on fresh batches drawn from `data`'s stream: batch `t` holds
/// samples `t·B..(t+1)·B`. The post-training error uses `eval_samples`
/// held-out samples far along the same stream.
pub fn train(
    f: &ButterflyFactors,
    data: &DatasetSpec,
    cfg: &TrainConfig,
) -> Result<(ButterflyFactors, TrainReport)> {
    cfg.validate()?;
    let g = f.geometry();
    if data.n != g.n() || data.k != g.k() || data.k0 != g.k0() || data.sign != g.sign() {
        return invalid("dataset window does not match the factor geometry");
    }
    let start = Instant::now();
    let mut current = f.clone();
    let first = generate_range(data, 0, cfg.batch_size)?;
    let pre = evaluate(&current, &first)?.0;
    let mut params = current.parameters();
    let mut adam = Adam::new(params.len());
    let mut curve = Vec::with_capacity(cfg.max_iters);
    let mut diverged_at = None;

    for iter in 0..cfg.max_iters {
        let batch = if iter == 0 { first.clone() } else { generate_range(data, iter * cfg.batch_size, cfg.batch_size)? };
        let (l, grads) = loss_and_gradient(&current, &batch)?;
        let lr = cfg.learning_rate(iter);
        if !l.is_finite() {
            diverged_at = Some(iter);
            break;
        }
        curve.push((iter, l, lr));
        let flat: Vec<Complex64> = grads.into_iter().flatten().flatten().collect();
        let mut next = params.clone();
        match cfg.optimizer {
            Optimizer::Adam => adam.step(&mut next, &flat, lr, cfg),
            Optimizer::Sgd => {
                for (p, gr) in next.iter_mut().zip(&flat) {
                    *p -= lr * gr;
                }
            }
        }
        if next.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            diverged_at = Some(iter);
            break;
        }
        params = next;
        current.set_parameters(&params)?;
    }

    let (post, std) = if cfg.max_iters == 0 {
        (pre, 0.0)
    } else {
        let test = generate_range(data, EVAL_OFFSET, cfg.eval_samples.max(1))?;
        evaluate(&current, &test)?
    };
    let report = TrainReport {
        pre_train_rel_error: pre,
        post_train_rel_error: post,
        post_train_rel_std: std,
        curve,
        wall_seconds: start.elapsed().as_secs_f64(),
        diverged_at,
    };
    Ok((current, report))
}
