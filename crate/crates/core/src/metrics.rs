//! Block-level spotting evaluation: Normalized Score (NS) and Generalized
//! F-measure (GF).
//!
//! NS pairs every ground-truth box with its best-overlapping prediction and
//! vice versa, merges pairs that share a box into groups, and pools
//! `1 − ΣED / Σmax(len)` over all groups of the dataset. NS values depend on
//! the label and prediction granularity of one dataset and are not
//! comparable across datasets.
//!
//! GF counts a ground-truth word as spotted when a prediction overlaps it by
//! more than `T` (relative to either polygon's area) and one of that
//! prediction's whitespace tokens equals the word.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::blockgen::{join_in_reading_order, TextInstance};
use crate::geometry::{geometric_match, Polygon};
use crate::order::reading_order;

/// Default GF overlap threshold.
pub const DEFAULT_THRESHOLD: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum MetricsError {
    #[error("threshold {0} is outside (0, 1)")]
    InvalidThreshold(f64),
}

/// A predicted region with its transcription.
#[derive(Debug, Clone, PartialEq)]
pub struct SpottingResult {
    pub polygon: Polygon,
    pub text: String,
}

impl SpottingResult {
    pub fn new(polygon: Polygon, text: impl Into<String>) -> Self {
        Self {
            polygon,
            text: text.into(),
        }
    }
}

/// Ground truth and predictions of one image.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ImageSample {
    pub gt: Vec<TextInstance>,
    pub pred: Vec<SpottingResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MatchPair {
    pub gt: Option<usize>,
    pub pred: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchGroup {
    /// Ground-truth indices in reading order.
    pub gt_indices: Vec<usize>,
    /// Prediction indices in reading order.
    pub pred_indices: Vec<usize>,
    pub gt_text: String,
    pub pred_text: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub threshold: f64,
    /// NFC, uppercase, strip non-alphanumerics at token ends.
    pub normalize: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            normalize: true,
        }
    }
}

/// Per-image diagnostics.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ImageReport {
    pub groups: usize,
    pub edit_distance: usize,
    pub max_len: usize,
    pub gt_words: usize,
    pub pred_tokens: usize,
    pub correct: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub ns: f64,
    pub gf_precision: f64,
    pub gf_recall: f64,
    pub gf: f64,
    pub threshold: f64,
    pub per_image: Vec<ImageReport>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GfScore {
    pub precision: f64,
    pub recall: f64,
    pub gf: f64,
}

/// Levenshtein distance over Unicode scalar values.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = alloc::vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// NFC, uppercase, then trim characters outside `[A-Z0-9]` from both ends.
pub fn normalize_token(s: &str) -> String {
    let upper: String = s.nfc().flat_map(char::to_uppercase).collect();
    let keep = |c: char| c.is_ascii_uppercase() || c.is_ascii_digit();
    String::from(upper.trim_matches(|c: char| !keep(c)))
}

/// Whitespace tokens of `s`, normalized and without empties.
pub fn tokens(s: &str, normalize: bool) -> Vec<String> {
    s.split_whitespace()
        .map(|t| if normalize { normalize_token(t) } else { String::from(t) })
        .filter(|t| !t.is_empty())
        .collect()
}

/// Token-wise normalization joined by single spaces.
pub fn normalize_text(s: &str, normalize: bool) -> String {
    tokens(s, normalize).join(" ")
}

fn best_partner(
    poly: &Polygon,
    others: &[&Polygon],
    threshold_free_score: impl Fn(&Polygon, &Polygon) -> f64,
) -> Option<usize> {
    let c = poly.centroid();
    let mut best: Option<(usize, f64, f64)> = None;
    for (j, o) in others.iter().enumerate() {
        let score = threshold_free_score(poly, o);
        if !(score > 0.0) {
            continue;
        }
        let dist = c.dist(&o.centroid());
        let better = match best {
            None => true,
            Some((_, bs, bd)) => match score.partial_cmp(&bs).unwrap_or(Ordering::Equal) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => dist < bd,
            },
        };
        if better {
            best = Some((j, score, dist));
        }
    }
    best.map(|(j, _, _)| j)
}

fn overlap_score(a: &Polygon, b: &Polygon) -> f64 {
    geometric_match(a, b, 0.5).score
}

/// Nearest-pair matching: each box is paired with the box on the other side
/// with the highest overlap score (ties: closer centroid, then lower index).
pub fn pair_match(gt: &[TextInstance], pred: &[SpottingResult]) -> Vec<MatchPair> {
    let gp: Vec<&Polygon> = gt.iter().map(|g| &g.polygon).collect();
    let pp: Vec<&Polygon> = pred.iter().map(|p| &p.polygon).collect();
    let mut pairs: Vec<MatchPair> = Vec::new();
    let push = |pair: MatchPair, pairs: &mut Vec<MatchPair>| {
        if !pairs.contains(&pair) {
            pairs.push(pair);
        }
    };
    for (i, g) in gp.iter().enumerate() {
        if let Some(j) = best_partner(g, &pp, overlap_score) {
            push(MatchPair { gt: Some(i), pred: Some(j) }, &mut pairs);
        }
    }
    for (j, p) in pp.iter().enumerate() {
        if let Some(i) = best_partner(p, &gp, |a, b| overlap_score(b, a)) {
            push(MatchPair { gt: Some(i), pred: Some(j) }, &mut pairs);
        }
    }
    for i in 0..gt.len() {
        if !pairs.iter().any(|p| p.gt == Some(i)) {
            pairs.push(MatchPair { gt: Some(i), pred: None });
        }
    }
    for j in 0..pred.len() {
        if !pairs.iter().any(|p| p.pred == Some(j)) {
            pairs.push(MatchPair { gt: None, pred: Some(j) });
        }
    }
    pairs
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Merges pairs that share a ground-truth or prediction index (union-find).
///
/// Group texts are the member transcriptions joined by single spaces in
/// reading order; normalization is left to the scoring functions.
pub fn merge_matches(pairs: &[MatchPair], gt: &[TextInstance], pred: &[SpottingResult]) -> Vec<MatchGroup> {
    let ng = gt.len();
    let mut parent: Vec<usize> = (0..ng + pred.len()).collect();
    let mut present = alloc::vec![false; ng + pred.len()];
    for p in pairs {
        let a = p.gt;
        let b = p.pred.map(|j| ng + j);
        for n in [a, b].into_iter().flatten() {
            present[n] = true;
        }
        if let (Some(a), Some(b)) = (a, b) {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut roots: Vec<usize> = Vec::new();
    let mut members: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for n in 0..ng + pred.len() {
        if !present[n] {
            continue;
        }
        let r = find(&mut parent, n);
        let k = match roots.iter().position(|&x| x == r) {
            Some(k) => k,
            None => {
                roots.push(r);
                members.push((Vec::new(), Vec::new()));
                roots.len() - 1
            }
        };
        if n < ng {
            members[k].0.push(n);
        } else {
            members[k].1.push(n - ng);
        }
    }
    members
        .into_iter()
        .map(|(g, p)| {
            let (gt_indices, gt_text) = join_in_reading_order(&g, |i| &gt[i].polygon, |i| gt[i].text.as_str());
            let (pred_indices, pred_text) =
                join_in_reading_order(&p, |i| &pred[i].polygon, |i| pred[i].text.as_str());
            MatchGroup {
                gt_indices,
                pred_indices,
                gt_text,
                pred_text,
            }
        })
        .collect()
}

/// `(ΣED, Σmax(len), groups)` for one image. Ignored ground truth is removed
/// from group texts; groups holding only ignored ground truth are dropped.
fn ns_terms(sample: &ImageSample, normalize: bool) -> (usize, usize, usize) {
    let pairs = pair_match(&sample.gt, &sample.pred);
    let groups = merge_matches(&pairs, &sample.gt, &sample.pred);
    let (mut ed, mut len, mut count) = (0, 0, 0);
    for g in groups {
        let kept: Vec<usize> = g.gt_indices.iter().copied().filter(|&i| !sample.gt[i].ignore).collect();
        if kept.is_empty() && !g.gt_indices.is_empty() {
            continue;
        }
        let gt_text = kept
            .iter()
            .map(|&i| normalize_text(&sample.gt[i].text, normalize))
            .filter(|t| !t.is_empty())
            .collect::<Vec<_>>()
            .join(" ");
        let pred_text = g
            .pred_indices
            .iter()
            .map(|&j| normalize_text(&sample.pred[j].text, normalize))
            .filter(|t| !t.is_empty())
            .collect::<Vec<_>>()
            .join(" ");
        ed += edit_distance(&gt_text, &pred_text);
        len += gt_text.chars().count().max(pred_text.chars().count());
        count += 1;
    }
    (ed, len, count)
}

/// Pooled Normalized Score; 1.0 when there is nothing to compare.
pub fn normalized_score(dataset: &[ImageSample], normalize: bool) -> f64 {
    let (ed, len) = dataset
        .iter()
        .map(|s| ns_terms(s, normalize))
        .fold((0, 0), |(e, l), (de, dl, _)| (e + de, l + dl));
    if len == 0 {
        1.0
    } else {
        1.0 - ed as f64 / len as f64
    }
}

/// `(correct, gt_words, pred_tokens)` for one image.
fn gf_terms(sample: &ImageSample, threshold: f64, normalize: bool) -> (usize, usize, usize) {
    let (gt, pred) = (&sample.gt, &sample.pred);
    // scores[i][j] when matched, else None
    let matches: Vec<Vec<Option<f64>>> = gt
        .iter()
        .map(|g| {
            pred.iter()
                .map(|p| {
                    let m = geometric_match(&g.polygon, &p.polygon, threshold);
                    m.matched.then_some(m.score)
                })
                .collect()
        })
        .collect();
    let pred_tokens: Vec<Vec<String>> = pred.iter().map(|p| tokens(&p.text, normalize)).collect();
    let mut consumed: Vec<Vec<bool>> = pred_tokens.iter().map(|t| alloc::vec![false; t.len()]).collect();

    let active: Vec<usize> = (0..gt.len()).filter(|&i| !gt[i].ignore).collect();
    let polys: Vec<&Polygon> = active.iter().map(|&i| &gt[i].polygon).collect();
    let mut correct = 0;
    for k in reading_order(&polys) {
        let i = active[k];
        let word = normalize_text(&gt[i].text, normalize);
        let mut candidates: Vec<(usize, f64)> =
            (0..pred.len()).filter_map(|j| matches[i][j].map(|s| (j, s))).collect();
        candidates.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0)));
        'search: for (j, _) in candidates {
            for (t, tok) in pred_tokens[j].iter().enumerate() {
                if !consumed[j][t] && *tok == word {
                    consumed[j][t] = true;
                    correct += 1;
                    break 'search;
                }
            }
        }
    }

    let counted_tokens: usize = (0..pred.len())
        .filter(|&j| {
            let hits_ignored = (0..gt.len()).any(|i| gt[i].ignore && matches[i][j].is_some());
            let hits_active = active.iter().any(|&i| matches[i][j].is_some());
            !(hits_ignored && !hits_active)
        })
        .map(|j| pred_tokens[j].len())
        .sum();
    (correct, active.len(), counted_tokens)
}

fn ratio(num: usize, den: usize, vacuous: bool) -> f64 {
    if den == 0 {
        if vacuous {
            1.0
        } else {
            0.0
        }
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

/// Micro-averaged Generalized F-measure.
pub fn generalized_f(dataset: &[ImageSample], threshold: f64, normalize: bool) -> Result<GfScore, MetricsError> {
    check_threshold(threshold)?;
    let (c, g, p) = dataset
        .iter()
        .map(|s| gf_terms(s, threshold, normalize))
        .fold((0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let empty = g == 0 && p == 0;
    let precision = ratio(c, p, empty);
    let recall = ratio(c, g, empty);
    Ok(GfScore {
        precision,
        recall,
        gf: harmonic(precision, recall),
    })
}

fn check_threshold(t: f64) -> Result<(), MetricsError> {
    if t > 0.0 && t < 1.0 {
        Ok(())
    } else {
        Err(MetricsError::InvalidThreshold(t))
    }
}

/// Both protocols with per-image diagnostics.
pub fn evaluate(dataset: &[ImageSample], cfg: &EvalConfig) -> Result<EvalReport, MetricsError> {
    check_threshold(cfg.threshold)?;
    let per_image: Vec<ImageReport> = dataset
        .iter()
        .map(|s| {
            let (ed, len, groups) = ns_terms(s, cfg.normalize);
            let (correct, gt_words, pred_tokens) = gf_terms(s, cfg.threshold, cfg.normalize);
            ImageReport {
                groups,
                edit_distance: ed,
                max_len: len,
                gt_words,
                pred_tokens,
                correct,
            }
        })
        .collect();
    Ok(pool(&per_image, cfg.threshold))
}

/// Combines per-image terms into dataset-level scores.
pub fn pool(per_image: &[ImageReport], threshold: f64) -> EvalReport {
    let sum = |f: fn(&ImageReport) -> usize| per_image.iter().map(f).sum::<usize>();
    let (ed, len) = (sum(|r| r.edit_distance), sum(|r| r.max_len));
    let (c, g, p) = (sum(|r| r.correct), sum(|r| r.gt_words), sum(|r| r.pred_tokens));
    let ns = if len == 0 { 1.0 } else { 1.0 - ed as f64 / len as f64 };
    let empty = g == 0 && p == 0;
    let precision = ratio(c, p, empty);
    let recall = ratio(c, g, empty);
    EvalReport {
        ns,
        gf_precision: precision,
        gf_recall: recall,
        gf: harmonic(precision, recall),
        threshold,
        per_image: per_image.to_vec(),
    }
}
