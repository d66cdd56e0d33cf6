//! Autoregressive decoding on top of a key/value cache.

use alloc::string::String;
use alloc::vec::Vec;

use super::attention::{head_slice, mix_values, row_weights};
use super::model::{check_input, embed, embed_token, gelu, layer_norm_row, ModelParams};
use super::tensor::{axpy, linear, Matrix};
use super::ModelError;
use crate::math;
use crate::tokenizer::Vocab;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeConfig {
    pub beam_width: usize,
    /// Upper bound on generated tokens, `[EOS]` included.
    pub max_new_tokens: usize,
    /// Finished beams are ranked by `log_prob / len^length_penalty`.
    pub length_penalty: f64,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self {
            beam_width: 4,
            max_new_tokens: 64,
            length_penalty: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub text: String,
    /// Generated ids without the final `[EOS]`.
    pub tokens: Vec<usize>,
    /// Sum of token log-probabilities, `[EOS]` included when emitted.
    pub log_prob: f64,
    /// Length-normalized ranking score.
    pub score: f64,
    /// Whether decoding stopped on `[EOS]` rather than the length limit.
    pub finished: bool,
}

/// Per-layer keys and values of every position fed so far.
#[derive(Debug, Clone)]
pub struct KvCache {
    keys: Vec<Matrix>,
    values: Vec<Matrix>,
    len: usize,
    prefix: usize,
    /// Logits at the most recent position.
    pub logits: Vec<f64>,
}

impl KvCache {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Prefix length (patches plus `[SEP]`).
    pub fn prefix_len(&self) -> usize {
        self.prefix
    }

    /// Runs the prefix `[patches ; SEP]` and returns a cache positioned to
    /// predict the first character.
    pub fn prefill(p: &ModelParams, patches: &Matrix) -> Result<Self, ModelError> {
        let len = check_input(p, patches, &[])?;
        let mask = p.hyper.mask.build(len, len)?;
        let mut x = embed(p, patches, p.hyper.sep, &[]);
        let mut keys = Vec::with_capacity(p.layers.len());
        let mut values = Vec::with_capacity(p.layers.len());
        let d = p.hyper.d_model;
        let heads = p.hyper.heads;
        let dh = d / heads;
        let scale = 1.0 / math::sqrt(dh as f64);
        let mut h = Matrix::zeros(len, d);
        let mut xhat = alloc::vec![0.0; d];
        let mut w = alloc::vec![0.0; len];
        let mut buf = alloc::vec![0.0; dh];
        for l in &p.layers {
            for i in 0..len {
                layer_norm_row(x.row(i), &l.ln1_g, &l.ln1_b, &mut xhat, h.row_mut(i));
            }
            let q = linear(&h, &l.wq, &l.bq);
            let k = linear(&h, &l.wk, &l.bk);
            let v = linear(&h, &l.wv, &l.bv);
            let mut att = Matrix::zeros(len, d);
            for hd in 0..heads {
                let (qh, kh, vh) = (head_slice(&q, hd, dh), head_slice(&k, hd, dh), head_slice(&v, hd, dh));
                for i in 0..len {
                    row_weights(qh.row(i), &kh, scale, |j| mask.allowed(i, j), &mut w);
                    mix_values(&w, &vh, &mut buf);
                    att.row_mut(i)[hd * dh..(hd + 1) * dh].copy_from_slice(&buf);
                }
            }
            finish_layer(p, l, &mut x, &att);
            keys.push(k);
            values.push(v);
        }
        let logits = final_logits(p, x.row(len - 1));
        Ok(Self {
            keys,
            values,
            len,
            prefix: len,
            logits,
        })
    }

    /// Feeds one language token and updates `logits`.
    pub fn step(&mut self, p: &ModelParams, token: usize) -> Result<(), ModelError> {
        if token >= p.hyper.vocab_size {
            return Err(ModelError::UnknownToken(token));
        }
        if self.len >= p.hyper.max_len {
            return Err(ModelError::SequenceTooLong {
                len: self.len + 1,
                max: p.hyper.max_len,
            });
        }
        let d = p.hyper.d_model;
        let heads = p.hyper.heads;
        let dh = d / heads;
        let scale = 1.0 / math::sqrt(dh as f64);
        let mut x = embed_token(p, token, self.len);
        let mut h = Matrix::zeros(1, d);
        let mut xhat = alloc::vec![0.0; d];
        let n = self.len + 1;
        let mut w = alloc::vec![0.0; n];
        let mut buf = alloc::vec![0.0; dh];
        for (li, l) in p.layers.iter().enumerate() {
            layer_norm_row(x.row(0), &l.ln1_g, &l.ln1_b, &mut xhat, h.row_mut(0));
            let q = linear(&h, &l.wq, &l.bq);
            let k = linear(&h, &l.wk, &l.bk);
            let v = linear(&h, &l.wv, &l.bv);
            let keys = &mut self.keys[li];
            keys.data.extend_from_slice(&k.data);
            keys.rows += 1;
            let values = &mut self.values[li];
            values.data.extend_from_slice(&v.data);
            values.rows += 1;
            let mut att = Matrix::zeros(1, d);
            for hd in 0..heads {
                let (qh, kh, vh) = (head_slice(&q, hd, dh), head_slice(keys, hd, dh), head_slice(values, hd, dh));
                row_weights(qh.row(0), &kh, scale, |_| true, &mut w);
                mix_values(&w, &vh, &mut buf);
                att.row_mut(0)[hd * dh..(hd + 1) * dh].copy_from_slice(&buf);
            }
            finish_layer(p, l, &mut x, &att);
        }
        self.len = n;
        self.logits = final_logits(p, x.row(0));
        Ok(())
    }
}

/// Output projection, residual and feed-forward half of a layer, in place.
fn finish_layer(p: &ModelParams, l: &super::model::LayerParams, x: &mut Matrix, att: &Matrix) {
    let d = p.hyper.d_model;
    let o = linear(att, &l.wo, &l.bo);
    axpy(1.0, &o.data, &mut x.data);
    let mut h2 = Matrix::zeros(x.rows, d);
    let mut xhat = alloc::vec![0.0; d];
    for i in 0..x.rows {
        layer_norm_row(x.row(i), &l.ln2_g, &l.ln2_b, &mut xhat, h2.row_mut(i));
    }
    let mut f = linear(&h2, &l.w1, &l.b1);
    f.data.iter_mut().for_each(|v| *v = gelu(*v));
    let f2 = linear(&f, &l.w2, &l.b2);
    axpy(1.0, &f2.data, &mut x.data);
}

fn final_logits(p: &ModelParams, x: &[f64]) -> Vec<f64> {
    let d = p.hyper.d_model;
    let mut h = Matrix::zeros(1, d);
    let mut xhat = alloc::vec![0.0; d];
    layer_norm_row(x, &p.lnf_g, &p.lnf_b, &mut xhat, h.row_mut(0));
    linear(&h, &p.out_w, &p.out_b).data
}

/// Log-probabilities of the logits row.
fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + math::ln(logits.iter().map(|v| math::exp(v - max)).sum::<f64>());
    logits.iter().map(|v| v - lse).collect()
}

fn candidate(p: &ModelParams, t: usize) -> bool {
    t != p.hyper.pad && t != p.hyper.sep
}

fn limit(p: &ModelParams, prefix: usize, cfg: &DecodeConfig) -> usize {
    cfg.max_new_tokens.min(p.hyper.max_len + 1 - prefix)
}

fn score(log_prob: f64, len: usize, alpha: f64) -> f64 {
    if alpha == 0.0 {
        log_prob
    } else {
        log_prob / math::powf(len.max(1) as f64, alpha)
    }
}

struct Hyp {
    tokens: Vec<usize>,
    log_prob: f64,
    finished: bool,
}

fn greedy_ids(p: &ModelParams, patches: &Matrix, cfg: &DecodeConfig) -> Result<Hyp, ModelError> {
    let mut cache = KvCache::prefill(p, patches)?;
    let max_new = limit(p, cache.prefix, cfg);
    let mut tokens = Vec::new();
    let mut log_prob = 0.0;
    for n in 1..=max_new {
        let lp = log_softmax(&cache.logits);
        let mut best = None::<usize>;
        for t in (0..lp.len()).filter(|&t| candidate(p, t)) {
            if best.map_or(true, |b| lp[t] > lp[b]) {
                best = Some(t);
            }
        }
        let t = best.ok_or(ModelError::InvalidConfig("vocabulary has no decodable tokens"))?;
        log_prob += lp[t];
        if t == p.hyper.eos {
            return Ok(Hyp {
                tokens,
                log_prob,
                finished: true,
            });
        }
        tokens.push(t);
        if n < max_new {
            cache.step(p, t)?;
        }
    }
    Ok(Hyp {
        tokens,
        log_prob,
        finished: false,
    })
}

fn finish(vocab: &Vocab, h: Hyp, alpha: f64) -> Result<Decoded, ModelError> {
    let len = h.tokens.len() + usize::from(h.finished);
    let text = vocab.decode(&h.tokens).map_err(|_| ModelError::ShapeMismatch("decoded id outside vocab"))?;
    Ok(Decoded {
        text,
        score: score(h.log_prob, len, alpha),
        tokens: h.tokens,
        log_prob: h.log_prob,
        finished: h.finished,
    })
}

/// Argmax decoding until `[EOS]` or the length limit.
pub fn greedy(p: &ModelParams, patches: &Matrix, vocab: &Vocab, cfg: &DecodeConfig) -> Result<Decoded, ModelError> {
    let h = greedy_ids(p, patches, cfg)?;
    finish(vocab, h, cfg.length_penalty)
}

/// Beam search. The greedy hypothesis always competes for the final pick,
/// so with the default penalty of 0 the result never scores below greedy.
pub fn beam_search(p: &ModelParams, patches: &Matrix, vocab: &Vocab, cfg: &DecodeConfig) -> Result<Decoded, ModelError> {
    if cfg.beam_width == 0 {
        return Err(ModelError::InvalidConfig("beam_width must be at least 1"));
    }
    if cfg.beam_width == 1 {
        return greedy(p, patches, vocab, cfg);
    }
    let root = KvCache::prefill(p, patches)?;
    let max_new = limit(p, root.prefix, cfg);
    let alpha = cfg.length_penalty;
    let mut alive: Vec<(Hyp, KvCache)> = alloc::vec![(
        Hyp {
            tokens: Vec::new(),
            log_prob: 0.0,
            finished: false
        },
        root
    )];
    let mut done: Vec<Hyp> = Vec::new();
    for n in 1..=max_new {
        if alive.is_empty() {
            break;
        }
        let mut cands: Vec<(f64, usize, usize)> = Vec::new();
        for (hi, (h, c)) in alive.iter().enumerate() {
            for (t, lp) in log_softmax(&c.logits).into_iter().enumerate() {
                if candidate(p, t) {
                    cands.push((h.log_prob + lp, hi, t));
                }
            }
        }
        cands.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        cands.truncate(cfg.beam_width);
        let mut next = Vec::with_capacity(cands.len());
        for (lp, hi, t) in cands {
            let mut tokens = alive[hi].0.tokens.clone();
            if t == p.hyper.eos {
                done.push(Hyp {
                    tokens,
                    log_prob: lp,
                    finished: true,
                });
                continue;
            }
            tokens.push(t);
            if n == max_new {
                done.push(Hyp {
                    tokens,
                    log_prob: lp,
                    finished: false,
                });
                continue;
            }
            let mut cache = alive[hi].1.clone();
            cache.step(p, t)?;
            next.push((
                Hyp {
                    tokens,
                    log_prob: lp,
                    finished: false,
                },
                cache,
            ));
        }
        alive = next;
    }
    done.push(greedy_ids(p, patches, cfg)?);
    let key = |h: &Hyp| score(h.log_prob, h.tokens.len() + usize::from(h.finished), alpha);
    let mut best = 0;
    for i in 1..done.len() {
        if key(&done[i]) > key(&done[best]) {
            best = i;
        }
    }
    finish(vocab, done.swap_remove(best), alpha)
}

/// Greedy for `beam_width == 1`, beam search otherwise.
pub fn decode(p: &ModelParams, patches: &Matrix, vocab: &Vocab, cfg: &DecodeConfig) -> Result<Decoded, ModelError> {
    beam_search(p, patches, vocab, cfg)
}

/// Log-probability the model assigns to `tokens` followed by `[EOS]`,
/// from one full forward pass.
pub fn sequence_log_prob(p: &ModelParams, patches: &Matrix, tokens: &[usize]) -> Result<f64, ModelError> {
    let len = check_input(p, patches, tokens)?;
    let v_n = patches.rows + 1;
    let mask = p.hyper.mask.build(v_n, len)?;
    let logits = super::model::forward(p, patches, tokens, &mask)?;
    let mut total = 0.0;
    for (k, &t) in tokens.iter().chain(core::iter::once(&p.hyper.eos)).enumerate() {
        total += log_softmax(logits.row(v_n - 1 + k))[t];
    }
    Ok(total)
}
