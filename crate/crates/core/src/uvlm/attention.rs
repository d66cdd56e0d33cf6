//! Scaled dot-product attention with a binary mask.
//!
//! Disallowed keys are skipped outright rather than given a large negative
//! logit, so their weight is exactly zero and nothing they hold can reach
//! the output.

use alloc::vec;
use alloc::vec::Vec;

use super::mask::AttentionMask;
use super::tensor::{axpy, dot, Matrix};
use super::ModelError;
use crate::math;

/// Softmax weights of one query row over the keys where `allowed(j)`.
/// Entries for disallowed keys are left at 0.
pub(crate) fn row_weights(q: &[f64], k: &Matrix, scale: f64, allowed: impl Fn(usize) -> bool, out: &mut [f64]) {
    let mut max = f64::NEG_INFINITY;
    for j in 0..k.rows {
        if allowed(j) {
            let s = dot(q, k.row(j)) * scale;
            out[j] = s;
            if s > max {
                max = s;
            }
        } else {
            out[j] = 0.0;
        }
    }
    let mut sum = 0.0;
    for j in 0..k.rows {
        if allowed(j) {
            let e = math::exp(out[j] - max);
            out[j] = e;
            sum += e;
        }
    }
    for j in 0..k.rows {
        if allowed(j) {
            out[j] /= sum;
        }
    }
}

/// Weighted sum of value rows.
pub(crate) fn mix_values(w: &[f64], v: &Matrix, out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for (j, &p) in w.iter().enumerate() {
        if p != 0.0 {
            axpy(p, v.row(j), out);
        }
    }
}

fn check(q: &Matrix, k: &Matrix, v: &Matrix, mask: &AttentionMask, d: usize) -> Result<(), ModelError> {
    if d == 0 {
        return Err(ModelError::ShapeMismatch("scale dimension must be positive"));
    }
    if q.cols != k.cols {
        return Err(ModelError::ShapeMismatch("query and key widths differ"));
    }
    if k.rows != v.rows {
        return Err(ModelError::ShapeMismatch("key and value counts differ"));
    }
    if mask.size() != q.rows || mask.size() != k.rows {
        return Err(ModelError::ShapeMismatch("mask size does not match the sequence"));
    }
    Ok(())
}

/// Row-stochastic attention weights `softmax(QKᵀ/√d)` restricted to the
/// mask.
pub fn attention_weights(q: &Matrix, k: &Matrix, mask: &AttentionMask, d: usize) -> Result<Matrix, ModelError> {
    check(q, k, k, mask, d)?;
    let scale = 1.0 / math::sqrt(d as f64);
    let mut w = Matrix::zeros(q.rows, k.rows);
    for i in 0..q.rows {
        row_weights(q.row(i), k, scale, |j| mask.allowed(i, j), w.row_mut(i));
    }
    Ok(w)
}

/// `softmax(QKᵀ/√d + B)·V` where `B` is 0 on allowed entries and −∞
/// elsewhere.
pub fn masked_attention(q: &Matrix, k: &Matrix, v: &Matrix, mask: &AttentionMask, d: usize) -> Result<Matrix, ModelError> {
    check(q, k, v, mask, d)?;
    let w = attention_weights(q, k, mask, d)?;
    let mut out = Matrix::zeros(q.rows, v.cols);
    let mut buf = vec![0.0; v.cols];
    for i in 0..q.rows {
        mix_values(w.row(i), v, &mut buf);
        out.row_mut(i).copy_from_slice(&buf);
    }
    Ok(out)
}

/// Multi-head forward over column slices of `q`, `k`, `v`. Returns the
/// concatenated head outputs and the per-head weight matrices.
pub(crate) fn multi_head(q: &Matrix, k: &Matrix, v: &Matrix, heads: usize, mask: &AttentionMask) -> (Matrix, Vec<Matrix>) {
    let n = q.rows;
    let dh = q.cols / heads;
    let scale = 1.0 / math::sqrt(dh as f64);
    let mut out = Matrix::zeros(n, q.cols);
    let mut probs = Vec::with_capacity(heads);
    let mut buf = vec![0.0; dh];
    for h in 0..heads {
        let (qh, kh, vh) = (head_slice(q, h, dh), head_slice(k, h, dh), head_slice(v, h, dh));
        let mut w = Matrix::zeros(n, n);
        for i in 0..n {
            row_weights(qh.row(i), &kh, scale, |j| mask.allowed(i, j), w.row_mut(i));
            mix_values(w.row(i), &vh, &mut buf);
            out.row_mut(i)[h * dh..(h + 1) * dh].copy_from_slice(&buf);
        }
        probs.push(w);
    }
    (out, probs)
}

pub(crate) fn head_slice(m: &Matrix, h: usize, dh: usize) -> Matrix {
    let mut out = Matrix::zeros(m.rows, dh);
    for i in 0..m.rows {
        out.row_mut(i).copy_from_slice(&m.row(i)[h * dh..(h + 1) * dh]);
    }
    out
}

/// Backward of [`multi_head`]. Returns `(dq, dk, dv)`.
pub(crate) fn multi_head_backward(
    q: &Matrix,
    k: &Matrix,
    v: &Matrix,
    probs: &[Matrix],
    dout: &Matrix,
) -> (Matrix, Matrix, Matrix) {
    let n = q.rows;
    let heads = probs.len();
    let dh = q.cols / heads;
    let scale = 1.0 / math::sqrt(dh as f64);
    let mut dq = Matrix::zeros(n, q.cols);
    let mut dk = Matrix::zeros(n, q.cols);
    let mut dv = Matrix::zeros(n, q.cols);
    let mut dp = vec![0.0; n];
    for (h, p) in probs.iter().enumerate() {
        let (qh, kh, vh, doh) = (head_slice(q, h, dh), head_slice(k, h, dh), head_slice(v, h, dh), head_slice(dout, h, dh));
        let mut dqh = Matrix::zeros(n, dh);
        let mut dkh = Matrix::zeros(n, dh);
        let mut dvh = Matrix::zeros(n, dh);
        for i in 0..n {
            let pr = p.row(i);
            let gi = doh.row(i);
            let mut inner = 0.0;
            for j in 0..n {
                if pr[j] != 0.0 {
                    dp[j] = dot(gi, vh.row(j));
                    inner += pr[j] * dp[j];
                    axpy(pr[j], gi, dvh.row_mut(j));
                }
            }
            for j in 0..n {
                if pr[j] != 0.0 {
                    let ds = pr[j] * (dp[j] - inner) * scale;
                    axpy(ds, kh.row(j), dqh.row_mut(i));
                    axpy(ds, qh.row(i), dkh.row_mut(j));
                }
            }
        }
        for i in 0..n {
            dq.row_mut(i)[h * dh..(h + 1) * dh].copy_from_slice(dqh.row(i));
            dk.row_mut(i)[h * dh..(h + 1) * dh].copy_from_slice(dkh.row(i));
            dv.row_mut(i)[h * dh..(h + 1) * dh].copy_from_slice(dvh.row(i));
        }
    }
    (dq, dk, dv)
}
