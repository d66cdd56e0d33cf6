//! Parameters, forward pass, next-token loss and exact gradients.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use alloc::format;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::attention::{multi_head, multi_head_backward};
use super::mask::{AttentionMask, MaskKind};
use super::tensor::{axpy, linear, linear_backward, linear_backward_params, Matrix};
use super::ModelError;
use crate::math;
use crate::tokenizer::Vocab;

const LN_EPS: f64 = 1e-5;
/// √(2/π), for the tanh form of GELU.
const GELU_C: f64 = 0.797_884_560_802_865_4;
const GELU_K: f64 = 0.044_715;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hyper {
    pub layers: usize,
    pub heads: usize,
    pub d_model: usize,
    pub d_ff: usize,
    pub max_len: usize,
    pub vocab_size: usize,
    pub patch_dim: usize,
    pub mask: MaskKind,
    /// Ids of `[PAD]`, `[SEP]` and `[EOS]` in the vocabulary.
    pub pad: usize,
    pub sep: usize,
    pub eos: usize,
}

impl Hyper {
    /// 4 layers, 4 heads, width 128, FFN 512, 320 positions, 8×8 RGB patches.
    pub fn toy(vocab: &Vocab) -> Self {
        Self {
            layers: 4,
            heads: 4,
            d_model: 128,
            d_ff: 512,
            max_len: 320,
            vocab_size: vocab.len(),
            patch_dim: 192,
            mask: MaskKind::Unified,
            pad: vocab.pad(),
            sep: vocab.sep(),
            eos: vocab.eos(),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.layers == 0 || self.heads == 0 || self.d_model == 0 || self.d_ff == 0 {
            return Err(ModelError::InvalidConfig("layers, heads, d_model and d_ff must be positive"));
        }
        if self.d_model % self.heads != 0 {
            return Err(ModelError::InvalidConfig("d_model must be divisible by heads"));
        }
        if self.max_len < 2 || self.vocab_size == 0 || self.patch_dim == 0 {
            return Err(ModelError::InvalidConfig("max_len, vocab_size and patch_dim too small"));
        }
        if [self.pad, self.sep, self.eos].iter().any(|&t| t >= self.vocab_size) {
            return Err(ModelError::InvalidConfig("special token ids must lie inside the vocabulary"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub ln1_g: Vec<f64>,
    pub ln1_b: Vec<f64>,
    pub wq: Matrix,
    pub bq: Vec<f64>,
    pub wk: Matrix,
    pub bk: Vec<f64>,
    pub wv: Matrix,
    pub bv: Vec<f64>,
    pub wo: Matrix,
    pub bo: Vec<f64>,
    pub ln2_g: Vec<f64>,
    pub ln2_b: Vec<f64>,
    pub w1: Matrix,
    pub b1: Vec<f64>,
    pub w2: Matrix,
    pub b2: Vec<f64>,
}

/// Named, shaped, read-only view of one parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorView<'a> {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: &'a [f64],
}

/// All weights of the model. The same type doubles as the gradient
/// container, see [`ModelParams::zeros_like`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub hyper: Hyper,
    pub patch_w: Matrix,
    pub patch_b: Vec<f64>,
    pub tok_emb: Matrix,
    pub pos_emb: Matrix,
    pub layers: Vec<LayerParams>,
    pub lnf_g: Vec<f64>,
    pub lnf_b: Vec<f64>,
    pub out_w: Matrix,
    pub out_b: Vec<f64>,
}

struct Normal {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl Normal {
    fn sample(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.rng.gen::<f64>();
        let u2 = self.rng.gen::<f64>();
        let r = math::sqrt(-2.0 * math::ln(u1));
        let t = 2.0 * core::f64::consts::PI * u2;
        self.spare = Some(r * libm::sin(t));
        r * libm::cos(t)
    }

    fn matrix(&mut self, rows: usize, cols: usize, std: f64) -> Matrix {
        Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| self.sample() * std).collect())
    }
}

impl ModelParams {
    /// Seeded random initialization.
    pub fn init(hyper: Hyper, seed: u64) -> Result<Self, ModelError> {
        hyper.validate()?;
        let mut n = Normal {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        };
        let d = hyper.d_model;
        let inv = |k: usize| 1.0 / math::sqrt(k as f64);
        let resid = inv(2 * hyper.layers);
        let patch_w = n.matrix(hyper.patch_dim, d, inv(hyper.patch_dim));
        let tok_emb = n.matrix(hyper.vocab_size, d, 0.5);
        let pos_emb = n.matrix(hyper.max_len, d, 0.5);
        let layers = (0..hyper.layers)
            .map(|_| LayerParams {
                ln1_g: vec![1.0; d],
                ln1_b: vec![0.0; d],
                wq: n.matrix(d, d, inv(d)),
                bq: vec![0.0; d],
                wk: n.matrix(d, d, inv(d)),
                bk: vec![0.0; d],
                wv: n.matrix(d, d, inv(d)),
                bv: vec![0.0; d],
                wo: n.matrix(d, d, inv(d) * resid),
                bo: vec![0.0; d],
                ln2_g: vec![1.0; d],
                ln2_b: vec![0.0; d],
                w1: n.matrix(d, hyper.d_ff, inv(d)),
                b1: vec![0.0; hyper.d_ff],
                w2: n.matrix(hyper.d_ff, d, inv(hyper.d_ff) * resid),
                b2: vec![0.0; d],
            })
            .collect();
        let out_w = n.matrix(d, hyper.vocab_size, inv(d));
        Ok(Self {
            hyper,
            patch_w,
            patch_b: vec![0.0; d],
            tok_emb,
            pos_emb,
            layers,
            lnf_g: vec![1.0; d],
            lnf_b: vec![0.0; d],
            out_w,
            out_b: vec![0.0; hyper.vocab_size],
        })
    }

    /// Same shapes, every entry zero.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for (_, t) in z.tensors_mut() {
            t.iter_mut().for_each(|v| *v = 0.0);
        }
        z
    }

    /// Every tensor in a fixed order with a stable dotted name.
    pub fn tensors(&self) -> Vec<TensorView<'_>> {
        let d = self.hyper.d_model;
        let ff = self.hyper.d_ff;
        let mat = |m: &Matrix| vec![m.rows, m.cols];
        let mut out = Vec::new();
        let mut push = |name: String, shape: Vec<usize>, data: &'_ [f64]| out.push((name, shape, data as *const [f64]));
        push("patch.w".into(), mat(&self.patch_w), &self.patch_w.data);
        push("patch.b".into(), vec![d], &self.patch_b);
        push("tok_emb".into(), mat(&self.tok_emb), &self.tok_emb.data);
        push("pos_emb".into(), mat(&self.pos_emb), &self.pos_emb.data);
        for (i, l) in self.layers.iter().enumerate() {
            let parts: [(&str, Vec<usize>, &[f64]); 16] = [
                ("ln1.g", vec![d], &l.ln1_g),
                ("ln1.b", vec![d], &l.ln1_b),
                ("wq", mat(&l.wq), &l.wq.data),
                ("bq", vec![d], &l.bq),
                ("wk", mat(&l.wk), &l.wk.data),
                ("bk", vec![d], &l.bk),
                ("wv", mat(&l.wv), &l.wv.data),
                ("bv", vec![d], &l.bv),
                ("wo", mat(&l.wo), &l.wo.data),
                ("bo", vec![d], &l.bo),
                ("ln2.g", vec![d], &l.ln2_g),
                ("ln2.b", vec![d], &l.ln2_b),
                ("ffn.w1", mat(&l.w1), &l.w1.data),
                ("ffn.b1", vec![ff], &l.b1),
                ("ffn.w2", mat(&l.w2), &l.w2.data),
                ("ffn.b2", vec![d], &l.b2),
            ];
            for (name, shape, data) in parts {
                push(format!("layers.{i}.{name}"), shape, data);
            }
        }
        push("lnf.g".into(), vec![d], &self.lnf_g);
        push("lnf.b".into(), vec![d], &self.lnf_b);
        push("out.w".into(), mat(&self.out_w), &self.out_w.data);
        push("out.b".into(), vec![self.hyper.vocab_size], &self.out_b);
        out.into_iter()
            .map(|(name, shape, ptr)| TensorView {
                name,
                shape,
                // SAFETY: every pointer was taken from a field of `self`, which
                // stays borrowed for the lifetime of the returned views.
                data: unsafe { &*ptr },
            })
            .collect()
    }

    /// Mutable counterpart of [`tensors`](Self::tensors), same order.
    pub fn tensors_mut(&mut self) -> Vec<(String, &mut [f64])> {
        let mut out: Vec<(String, &mut [f64])> = Vec::new();
        out.push(("patch.w".into(), &mut self.patch_w.data));
        out.push(("patch.b".into(), &mut self.patch_b));
        out.push(("tok_emb".into(), &mut self.tok_emb.data));
        out.push(("pos_emb".into(), &mut self.pos_emb.data));
        for (i, l) in self.layers.iter_mut().enumerate() {
            let parts: [(&str, &mut [f64]); 16] = [
                ("ln1.g", &mut l.ln1_g),
                ("ln1.b", &mut l.ln1_b),
                ("wq", &mut l.wq.data),
                ("bq", &mut l.bq),
                ("wk", &mut l.wk.data),
                ("bk", &mut l.bk),
                ("wv", &mut l.wv.data),
                ("bv", &mut l.bv),
                ("wo", &mut l.wo.data),
                ("bo", &mut l.bo),
                ("ln2.g", &mut l.ln2_g),
                ("ln2.b", &mut l.ln2_b),
                ("ffn.w1", &mut l.w1.data),
                ("ffn.b1", &mut l.b1),
                ("ffn.w2", &mut l.w2.data),
                ("ffn.b2", &mut l.b2),
            ];
            for (name, data) in parts {
                out.push((format!("layers.{i}.{name}"), data));
            }
        }
        out.push(("lnf.g".into(), &mut self.lnf_g));
        out.push(("lnf.b".into(), &mut self.lnf_b));
        out.push(("out.w".into(), &mut self.out_w.data));
        out.push(("out.b".into(), &mut self.out_b));
        out
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.data.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.data.iter().all(|v| v.is_finite()))
    }

    /// `self += alpha · other`, tensor by tensor.
    pub fn add_scaled(&mut self, other: &ModelParams, alpha: f64) {
        let src = other.tensors();
        for ((_, dst), s) in self.tensors_mut().into_iter().zip(src) {
            axpy(alpha, s.data, dst);
        }
    }

    pub fn sq_norm(&self) -> f64 {
        self.tensors().iter().flat_map(|t| t.data.iter()).map(|v| v * v).sum()
    }
}

/// One training or evaluation sequence: patch rows plus the language ids
/// of the transcription (no `[SEP]`, no `[EOS]`).
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub patches: Matrix,
    pub tokens: Vec<usize>,
}

impl Example {
    /// Prefix length: patches plus `[SEP]`.
    pub fn v_n(&self) -> usize {
        self.patches.rows + 1
    }

    pub fn seq_len(&self) -> usize {
        self.patches.rows + 1 + self.tokens.len()
    }

    /// Next-token targets for every position; prefix entries other than
    /// `[SEP]` hold `pad` and are ignored by the loss.
    pub fn targets(&self, pad: usize, eos: usize) -> Vec<usize> {
        let mut t = vec![pad; self.patches.rows];
        t.extend_from_slice(&self.tokens);
        t.push(eos);
        t
    }
}

struct LnCache {
    xhat: Matrix,
    rstd: Vec<f64>,
}

struct LayerCache {
    ln1: LnCache,
    h1: Matrix,
    q: Matrix,
    k: Matrix,
    v: Matrix,
    probs: Vec<Matrix>,
    att: Matrix,
    ln2: LnCache,
    h2: Matrix,
    f_pre: Matrix,
    f_act: Matrix,
}

struct Cache {
    layers: Vec<LayerCache>,
    lnf: LnCache,
    hf: Matrix,
}

pub(crate) fn layer_norm_row(x: &[f64], g: &[f64], b: &[f64], xhat: &mut [f64], y: &mut [f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let rstd = 1.0 / math::sqrt(var + LN_EPS);
    for i in 0..x.len() {
        xhat[i] = (x[i] - mean) * rstd;
        y[i] = xhat[i] * g[i] + b[i];
    }
    rstd
}

fn layer_norm(x: &Matrix, g: &[f64], b: &[f64]) -> (Matrix, LnCache) {
    let mut y = Matrix::zeros(x.rows, x.cols);
    let mut xhat = Matrix::zeros(x.rows, x.cols);
    let mut rstd = Vec::with_capacity(x.rows);
    for i in 0..x.rows {
        let start = i * x.cols;
        let end = start + x.cols;
        rstd.push(layer_norm_row(x.row(i), g, b, &mut xhat.data[start..end], &mut y.data[start..end]));
    }
    (y, LnCache { xhat, rstd })
}

fn layer_norm_backward(c: &LnCache, g: &[f64], dy: &Matrix, dg: &mut [f64], db: &mut [f64]) -> Matrix {
    let n = dy.cols as f64;
    let mut dx = Matrix::zeros(dy.rows, dy.cols);
    let mut dxhat = vec![0.0; dy.cols];
    for i in 0..dy.rows {
        let xh = c.xhat.row(i);
        let d = dy.row(i);
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for j in 0..dy.cols {
            dg[j] += d[j] * xh[j];
            db[j] += d[j];
            dxhat[j] = d[j] * g[j];
            s1 += dxhat[j];
            s2 += dxhat[j] * xh[j];
        }
        let (m1, m2) = (s1 / n, s2 / n);
        let r = c.rstd[i];
        for (j, o) in dx.row_mut(i).iter_mut().enumerate() {
            *o = r * (dxhat[j] - m1 - xh[j] * m2);
        }
    }
    dx
}

#[inline]
pub(crate) fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + math::tanh(GELU_C * (x + GELU_K * x * x * x)))
}

#[inline]
fn gelu_grad(x: f64) -> f64 {
    let t = math::tanh(GELU_C * (x + GELU_K * x * x * x));
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * GELU_K * x * x)
}

fn add_in_place(a: &mut Matrix, b: &Matrix) {
    axpy(1.0, &b.data, &mut a.data);
}

pub(crate) fn check_input(
    p: &ModelParams,
    patches: &Matrix,
    tokens: &[usize],
) -> Result<usize, ModelError> {
    let h = &p.hyper;
    if patches.cols != h.patch_dim {
        return Err(ModelError::ShapeMismatch("patch width does not match patch_dim"));
    }
    if let Some(&t) = tokens.iter().find(|&&t| t >= h.vocab_size) {
        return Err(ModelError::UnknownToken(t));
    }
    let len = patches.rows + 1 + tokens.len();
    if len > h.max_len {
        return Err(ModelError::SequenceTooLong { len, max: h.max_len });
    }
    Ok(len)
}

/// Input embeddings of `[patches ; SEP ; tokens]`.
pub(crate) fn embed(p: &ModelParams, patches: &Matrix, sep: usize, tokens: &[usize]) -> Matrix {
    let m = patches.rows;
    let d = p.hyper.d_model;
    let mut x = Matrix::zeros(m + 1 + tokens.len(), d);
    let proj = linear(patches, &p.patch_w, &p.patch_b);
    x.data[..m * d].copy_from_slice(&proj.data);
    for (k, &t) in core::iter::once(&sep).chain(tokens).enumerate() {
        x.row_mut(m + k).copy_from_slice(p.tok_emb.row(t));
    }
    for i in 0..x.rows {
        axpy(1.0, p.pos_emb.row(i), x.row_mut(i));
    }
    x
}

/// Embedding of one language token at `pos`.
pub(crate) fn embed_token(p: &ModelParams, token: usize, pos: usize) -> Matrix {
    let mut x = Matrix::from_vec(1, p.hyper.d_model, p.tok_emb.row(token).to_vec());
    axpy(1.0, p.pos_emb.row(pos), x.row_mut(0));
    x
}

fn run(p: &ModelParams, x0: Matrix, mask: &AttentionMask, keep: bool) -> (Matrix, Option<Cache>) {
    let mut x = x0;
    let mut caches = Vec::new();
    for l in &p.layers {
        let (h1, ln1) = layer_norm(&x, &l.ln1_g, &l.ln1_b);
        let q = linear(&h1, &l.wq, &l.bq);
        let k = linear(&h1, &l.wk, &l.bk);
        let v = linear(&h1, &l.wv, &l.bv);
        let (att, probs) = multi_head(&q, &k, &v, p.hyper.heads, mask);
        add_in_place(&mut x, &linear(&att, &l.wo, &l.bo));
        let (h2, ln2) = layer_norm(&x, &l.ln2_g, &l.ln2_b);
        let f_pre = linear(&h2, &l.w1, &l.b1);
        let mut f_act = f_pre.clone();
        f_act.data.iter_mut().for_each(|v| *v = gelu(*v));
        add_in_place(&mut x, &linear(&f_act, &l.w2, &l.b2));
        if keep {
            caches.push(LayerCache {
                ln1,
                h1,
                q,
                k,
                v,
                probs,
                att,
                ln2,
                h2,
                f_pre,
                f_act,
            });
        }
    }
    let (hf, lnf) = layer_norm(&x, &p.lnf_g, &p.lnf_b);
    let logits = linear(&hf, &p.out_w, &p.out_b);
    let cache = keep.then_some(Cache { layers: caches, lnf, hf });
    (logits, cache)
}

/// Logits (`seq_len × vocab`) for `[patches ; SEP ; tokens]` under `mask`.
pub fn forward(p: &ModelParams, patches: &Matrix, tokens: &[usize], mask: &AttentionMask) -> Result<Matrix, ModelError> {
    let len = check_input(p, patches, tokens)?;
    if mask.size() != len {
        return Err(ModelError::ShapeMismatch("mask size does not match the sequence"));
    }
    let x = embed(p, patches, p.hyper.sep, tokens);
    Ok(run(p, x, mask, false).0)
}

fn log_softmax_at(row: &[f64], t: usize) -> (f64, f64) {
    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = row.iter().map(|v| math::exp(v - max)).sum();
    let lse = max + math::ln(sum);
    (row[t] - lse, lse)
}

/// Mean negative log-likelihood of `targets` over positions `v_n − 1 ..`
/// (the `[SEP]` position predicts the first character). `targets` has one
/// entry per row of `logits`; earlier entries are ignored.
pub fn lm_loss(logits: &Matrix, targets: &[usize], v_n: usize) -> Result<f64, ModelError> {
    if targets.len() != logits.rows {
        return Err(ModelError::ShapeMismatch("one target per position"));
    }
    if v_n == 0 || v_n > logits.rows {
        return Err(ModelError::InvalidPrefix { v_n, total: logits.rows });
    }
    let mut total = 0.0;
    for p in v_n - 1..logits.rows {
        let t = targets[p];
        if t >= logits.cols {
            return Err(ModelError::UnknownToken(t));
        }
        total -= log_softmax_at(logits.row(p), t).0;
    }
    Ok(total / (logits.rows + 1 - v_n) as f64)
}

fn mask_for(p: &ModelParams, ex: &Example) -> Result<AttentionMask, ModelError> {
    p.hyper.mask.build(ex.v_n(), ex.seq_len())
}

/// Loss of a single example under the model's own mask.
pub fn sample_loss(p: &ModelParams, ex: &Example) -> Result<f64, ModelError> {
    let mask = mask_for(p, ex)?;
    let logits = forward(p, &ex.patches, &ex.tokens, &mask)?;
    lm_loss(&logits, &ex.targets(p.hyper.pad, p.hyper.eos), ex.v_n())
}

/// Adds `weight · ∇loss(ex)` into `g` and returns the example's loss.
pub(crate) fn accumulate(p: &ModelParams, ex: &Example, weight: f64, g: &mut ModelParams) -> Result<f64, ModelError> {
    let len = check_input(p, &ex.patches, &ex.tokens)?;
    let mask = mask_for(p, ex)?;
    let x = embed(p, &ex.patches, p.hyper.sep, &ex.tokens);
    let (logits, cache) = run(p, x, &mask, true);
    let cache = cache.expect("cache requested");
    let targets = ex.targets(p.hyper.pad, p.hyper.eos);
    let v_n = ex.v_n();
    let loss = lm_loss(&logits, &targets, v_n)?;
    if !loss.is_finite() {
        return Err(ModelError::NonFiniteLoss);
    }
    let d = p.hyper.d_model;
    let first = v_n - 1;
    let count = (len - first) as f64;

    let mut dlogits = Matrix::zeros(len - first, p.hyper.vocab_size);
    for r in 0..dlogits.rows {
        let row = logits.row(first + r);
        let (_, lse) = log_softmax_at(row, targets[first + r]);
        let out = dlogits.row_mut(r);
        for (o, &l) in out.iter_mut().zip(row) {
            *o = math::exp(l - lse) * weight / count;
        }
        out[targets[first + r]] -= weight / count;
    }
    let hf_tail = cache.hf.rows_from(first);
    let dhf_tail = linear_backward(&hf_tail, &p.out_w, &dlogits, &mut g.out_w, &mut g.out_b);
    let mut dhf = Matrix::zeros(len, d);
    dhf.data[first * d..].copy_from_slice(&dhf_tail.data);
    let mut dx = layer_norm_backward(&cache.lnf, &p.lnf_g, &dhf, &mut g.lnf_g, &mut g.lnf_b);

    for ((l, c), gl) in p.layers.iter().zip(&cache.layers).zip(g.layers.iter_mut()).rev() {
        let mut df = linear_backward(&c.f_act, &l.w2, &dx, &mut gl.w2, &mut gl.b2);
        for (v, &pre) in df.data.iter_mut().zip(&c.f_pre.data) {
            *v *= gelu_grad(pre);
        }
        let dh2 = linear_backward(&c.h2, &l.w1, &df, &mut gl.w1, &mut gl.b1);
        add_in_place(&mut dx, &layer_norm_backward(&c.ln2, &l.ln2_g, &dh2, &mut gl.ln2_g, &mut gl.ln2_b));
        let datt = linear_backward(&c.att, &l.wo, &dx, &mut gl.wo, &mut gl.bo);
        let (dq, dk, dv) = multi_head_backward(&c.q, &c.k, &c.v, &c.probs, &datt);
        let mut dh1 = linear_backward(&c.h1, &l.wq, &dq, &mut gl.wq, &mut gl.bq);
        add_in_place(&mut dh1, &linear_backward(&c.h1, &l.wk, &dk, &mut gl.wk, &mut gl.bk));
        add_in_place(&mut dh1, &linear_backward(&c.h1, &l.wv, &dv, &mut gl.wv, &mut gl.bv));
        add_in_place(&mut dx, &layer_norm_backward(&c.ln1, &l.ln1_g, &dh1, &mut gl.ln1_g, &mut gl.ln1_b));
    }

    let m = ex.patches.rows;
    linear_backward_params(&ex.patches, &dx.top_rows(m), &mut g.patch_w, &mut g.patch_b);
    for (k, &t) in core::iter::once(&p.hyper.sep).chain(&ex.tokens).enumerate() {
        axpy(1.0, dx.row(m + k), g.tok_emb.row_mut(t));
    }
    for i in 0..len {
        axpy(1.0, dx.row(i), g.pos_emb.row_mut(i));
    }
    Ok(loss)
}

/// Mean loss over `batch` and its exact gradient.
pub fn backward(p: &ModelParams, batch: &[Example]) -> Result<(f64, ModelParams), ModelError> {
    if batch.is_empty() {
        return Err(ModelError::EmptyBatch);
    }
    if !p.is_finite() {
        return Err(ModelError::NonFiniteLoss);
    }
    let w = 1.0 / batch.len() as f64;
    let mut g = p.zeros_like();
    let mut loss = 0.0;
    for ex in batch {
        loss += accumulate(p, ex, w, &mut g)? * w;
    }
    Ok((loss, g))
}
