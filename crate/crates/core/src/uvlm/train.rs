//! Mini-batch training with an in-repo Adam(W) optimizer.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::decode::{greedy, DecodeConfig};
use super::model::{accumulate, sample_loss, Example, ModelParams};
use super::tensor::Matrix;
use super::ModelError;
use crate::math;
use crate::tokenizer::{PatchGrid, Vocab};

pub type TrainSample = Example;

/// Runs `n` independent jobs and returns their results in index order.
pub trait Executor {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs jobs one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}

/// Patch rows of a grid, one row per patch in raster order.
pub fn patches_matrix(grid: &PatchGrid) -> Matrix {
    let dim = grid.patch_dim();
    let mut data = Vec::with_capacity(grid.len() * dim);
    for p in &grid.patches {
        data.extend_from_slice(p);
    }
    Matrix::from_vec(grid.len(), dim, data)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub steps: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Decoupled weight decay, applied as `θ ← θ − lr·wd·θ`.
    pub weight_decay: f64,
    /// Evaluate training-set accuracy every this many steps (0 = never).
    pub eval_every: usize,
    pub seed: u64,
    /// Stop once an evaluation reaches this exact-sequence accuracy.
    pub target_accuracy: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            steps: 1000,
            batch_size: 8,
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.0,
            eval_every: 50,
            seed: 0,
            target_accuracy: None,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), ModelError> {
        if self.batch_size == 0 {
            return Err(ModelError::InvalidConfig("batch_size must be positive"));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) || !(self.eps > 0.0) || self.weight_decay < 0.0 {
            return Err(ModelError::InvalidConfig("lr, eps and weight_decay must be finite and non-negative"));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(ModelError::InvalidConfig("betas must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Adam moments with bias correction and decoupled weight decay.
#[derive(Debug, Clone)]
pub struct Adam {
    m: ModelParams,
    v: ModelParams,
    t: u64,
}

impl Adam {
    pub fn new(params: &ModelParams) -> Self {
        Self {
            m: params.zeros_like(),
            v: params.zeros_like(),
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut ModelParams, grads: &ModelParams, cfg: &TrainConfig) {
        self.t += 1;
        let t = self.t as f64;
        let c1 = 1.0 - math::powf(cfg.beta1, t);
        let c2 = 1.0 - math::powf(cfg.beta2, t);
        let gs = grads.tensors();
        let ms = self.m.tensors_mut();
        let vs = self.v.tensors_mut();
        for ((((_, p), g), (_, m)), (_, v)) in params.tensors_mut().into_iter().zip(gs).zip(ms).zip(vs) {
            for i in 0..p.len() {
                let gi = g.data[i];
                m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gi;
                v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gi * gi;
                let mh = m[i] / c1;
                let vh = v[i] / c2;
                p[i] -= cfg.lr * (mh / (math::sqrt(vh) + cfg.eps) + cfg.weight_decay * p[i]);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub step: usize,
    /// Mean loss over the whole training set.
    pub loss: f64,
    /// Fraction of training samples whose greedy decode is exactly right.
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mini-batch loss of every step, before the update.
    pub batch_losses: Vec<f64>,
    pub curve: Vec<CurvePoint>,
    /// First evaluated step whose accuracy reached `target_accuracy`.
    pub reached_target: Option<usize>,
}

/// Fraction of samples whose greedy transcription equals their tokens.
pub fn exact_accuracy<E: Executor>(p: &ModelParams, data: &[Example], vocab: &Vocab, exec: &E) -> Result<f64, ModelError> {
    if data.is_empty() {
        return Ok(1.0);
    }
    let cfg = DecodeConfig {
        beam_width: 1,
        max_new_tokens: data.iter().map(|e| e.tokens.len() + 1).max().unwrap_or(1) + 1,
        ..DecodeConfig::default()
    };
    let hits = exec.map(data.len(), |i| {
        greedy(p, &data[i].patches, vocab, &cfg).map(|d| d.finished && d.tokens == data[i].tokens)
    });
    let mut correct = 0usize;
    for h in hits {
        correct += usize::from(h?);
    }
    Ok(correct as f64 / data.len() as f64)
}

fn mean_loss<E: Executor>(p: &ModelParams, data: &[Example], exec: &E) -> Result<f64, ModelError> {
    let losses = exec.map(data.len(), |i| sample_loss(p, &data[i]));
    let mut total = 0.0;
    for l in losses {
        total += l?;
    }
    Ok(total / data.len().max(1) as f64)
}

/// Per-sample gradients reduced in batch order, so the result does not
/// depend on how the executor schedules the jobs.
fn batch_gradient<E: Executor>(
    p: &ModelParams,
    data: &[Example],
    batch: &[usize],
    exec: &E,
) -> Result<(f64, ModelParams), ModelError> {
    let w = 1.0 / batch.len() as f64;
    let parts = exec.map(batch.len(), |k| -> Result<(f64, ModelParams), ModelError> {
        let mut g = p.zeros_like();
        let loss = accumulate(p, &data[batch[k]], w, &mut g)?;
        Ok((loss * w, g))
    });
    let mut it = parts.into_iter();
    let (mut loss, mut g) = it.next().expect("batch is not empty")?;
    for part in it {
        let (l, pg) = part?;
        loss += l;
        g.add_scaled(&pg, 1.0);
    }
    Ok((loss, g))
}

/// Trains `params` in place. Batches are drawn by reshuffling the data
/// each epoch with a generator seeded from `cfg.seed`.
pub fn train<E: Executor>(
    params: &mut ModelParams,
    data: &[Example],
    vocab: &Vocab,
    cfg: &TrainConfig,
    exec: &E,
    mut on_eval: impl FnMut(&CurvePoint),
) -> Result<TrainReport, ModelError> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(ModelError::EmptyBatch);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut cursor = data.len();
    let mut adam = Adam::new(params);
    let mut report = TrainReport {
        batch_losses: Vec::with_capacity(cfg.steps),
        curve: Vec::new(),
        reached_target: None,
    };
    let bs = cfg.batch_size.min(data.len());
    for step in 1..=cfg.steps {
        let mut batch = Vec::with_capacity(bs);
        while batch.len() < bs {
            if cursor == order.len() {
                order.shuffle(&mut rng);
                cursor = 0;
            }
            batch.push(order[cursor]);
            cursor += 1;
        }
        let (loss, grads) = batch_gradient(params, data, &batch, exec)?;
        if !loss.is_finite() {
            return Err(ModelError::NonFiniteLoss);
        }
        adam.step(params, &grads, cfg);
        report.batch_losses.push(loss);
        if cfg.eval_every > 0 && (step % cfg.eval_every == 0 || step == cfg.steps) {
            let point = CurvePoint {
                step,
                loss: mean_loss(params, data, exec)?,
                accuracy: exact_accuracy(params, data, vocab, exec)?,
            };
            on_eval(&point);
            report.curve.push(point);
            if let Some(target) = cfg.target_accuracy {
                if point.accuracy >= target {
                    report.reached_target = Some(step);
                    break;
                }
            }
        }
    }
    Ok(report)
}
