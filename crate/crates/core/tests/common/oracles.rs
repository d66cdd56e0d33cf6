//! Slow, direct reference implementations used to check the library.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `(b - a) × (c - a)`.
fn orient(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn on_segment(a: (f64, f64), b: (f64, f64), r: (f64, f64)) -> bool {
    r.0 >= a.0.min(b.0) && r.0 <= a.0.max(b.0) && r.1 >= a.1.min(b.1) && r.1 <= a.1.max(b.1)
}

/// Extreme points of the hull by checking every directed pair against every
/// other point. Sorted lexicographically.
pub fn brute_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let mut out = Vec::new();
    for &p in &pts {
        for &q in &pts {
            if p == q {
                continue;
            }
            let edge = pts.iter().all(|&r| {
                let o = orient(p, q, r);
                o > 0.0 || (o == 0.0 && on_segment(p, q, r))
            });
            if edge {
                out.push(p);
                out.push(q);
            }
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup();
    out
}

/// Inside-or-on test for a counter-clockwise convex polygon.
pub fn in_convex(poly: &[(f64, f64)], p: (f64, f64)) -> bool {
    (0..poly.len()).all(|i| orient(poly[i], poly[(i + 1) % poly.len()], p) >= 0.0)
}

/// Area of `a ∩ b` (both convex, CCW) from `samples` uniform points in the
/// overlap of their bounding boxes.
pub fn monte_carlo_overlap(a: &[(f64, f64)], b: &[(f64, f64)], samples: usize, seed: u64) -> f64 {
    let bb = |p: &[(f64, f64)]| {
        p.iter().fold((f64::MAX, f64::MAX, f64::MIN, f64::MIN), |m, v| {
            (m.0.min(v.0), m.1.min(v.1), m.2.max(v.0), m.3.max(v.1))
        })
    };
    let (a0, a1, a2, a3) = bb(a);
    let (b0, b1, b2, b3) = bb(b);
    let (x0, y0, x1, y1) = (a0.max(b0), a1.max(b1), a2.min(b2), a3.min(b3));
    if x1 <= x0 || y1 <= y0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..samples {
        let p = (rng.gen_range(x0..x1), rng.gen_range(y0..y1));
        if in_convex(a, p) && in_convex(b, p) {
            hits += 1;
        }
    }
    hits as f64 / samples as f64 * (x1 - x0) * (y1 - y0)
}

/// Levenshtein distance straight from the recursive definition, memoized.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut memo = vec![vec![None; b.len() + 1]; a.len() + 1];
    fn lev(a: &[char], b: &[char], i: usize, j: usize, memo: &mut Vec<Vec<Option<usize>>>) -> usize {
        if let Some(v) = memo[i][j] {
            return v;
        }
        let v = if i == 0 {
            j
        } else if j == 0 {
            i
        } else if a[i - 1] == b[j - 1] {
            lev(a, b, i - 1, j - 1, memo)
        } else {
            1 + lev(a, b, i - 1, j, memo)
                .min(lev(a, b, i, j - 1, memo))
                .min(lev(a, b, i - 1, j - 1, memo))
        };
        memo[i][j] = Some(v);
        v
    }
    lev(&a, &b, a.len(), b.len(), &mut memo)
}

/// DBSCAN partition by density reachability: core points are joined by the
/// transitive closure of the `dist ≤ eps` relation among cores; a border
/// point joins the adjacent component whose smallest core index is lowest;
/// everything else is a singleton. Labels are numbered by first occurrence.
pub fn dbscan_reference(points: &[Vec<f64>], eps: f64, min_pts: usize) -> Vec<usize> {
    let n = points.len();
    let near = |i: usize, j: usize| {
        points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= eps * eps
    };
    let core: Vec<bool> = (0..n).map(|i| (0..n).filter(|&j| near(i, j)).count() >= min_pts).collect();
    let mut reach = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            reach[i][j] = core[i] && core[j] && near(i, j);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    // Representative of a core point: smallest core index it reaches.
    let rep: Vec<Option<usize>> = (0..n)
        .map(|i| if core[i] { (0..n).find(|&j| reach[i][j]) } else { None })
        .collect();
    let raw: Vec<usize> = (0..n)
        .map(|i| {
            if let Some(r) = rep[i] {
                return r;
            }
            (0..n)
                .filter(|&c| core[c] && near(i, c))
                .map(|c| rep[c].unwrap())
                .min()
                .unwrap_or(n + i)
        })
        .collect();
    let mut seen: Vec<usize> = Vec::new();
    raw.iter()
        .map(|r| match seen.iter().position(|s| s == r) {
            Some(k) => k,
            None => {
                seen.push(*r);
                seen.len() - 1
            }
        })
        .collect()
}

/// Half-pixel bilinear sample of channel `c` of a row-major, channel-last
/// buffer at destination pixel `(x, y)`.
pub fn bilinear_pixel(
    src: &[f64],
    sw: usize,
    sh: usize,
    ch: usize,
    dw: usize,
    dh: usize,
    x: usize,
    y: usize,
    c: usize,
) -> f64 {
    let coord = |d: usize, s: usize, dd: usize| {
        let v = (d as f64 + 0.5) * (s as f64 / dd as f64) - 0.5;
        v.max(0.0).min((s - 1) as f64)
    };
    let fx = coord(x, sw, dw);
    let fy = coord(y, sh, dh);
    let (x0, y0) = (fx.floor() as usize, fy.floor() as usize);
    let (x1, y1) = ((x0 + 1).min(sw - 1), (y0 + 1).min(sh - 1));
    let (tx, ty) = (fx - x0 as f64, fy - y0 as f64);
    let at = |xx: usize, yy: usize| src[(yy * sw + xx) * ch + c];
    let mut v = 0.0;
    for (xx, wx) in [(x0, 1.0 - tx), (x1, tx)] {
        for (yy, wy) in [(y0, 1.0 - ty), (y1, ty)] {
            v += wx * wy * at(xx, yy);
        }
    }
    v
}

/// Softmax attention computed one scalar at a time, `-∞` for masked logits.
pub fn scalar_attention(q: &[Vec<f64>], k: &[Vec<f64>], v: &[Vec<f64>], mask: &[Vec<u8>], d: usize) -> Vec<Vec<f64>> {
    let n = q.len();
    let mut out = vec![vec![0.0; v[0].len()]; n];
    for i in 0..n {
        let logits: Vec<f64> = (0..k.len())
            .map(|j| {
                if mask[i][j] == 1 {
                    q[i].iter().zip(&k[j]).map(|(a, b)| a * b).sum::<f64>() / (d as f64).sqrt()
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
        let s: f64 = e.iter().sum();
        for j in 0..k.len() {
            for c in 0..v[0].len() {
                out[i][c] += e[j] / s * v[j][c];
            }
        }
    }
    out
}

/// Mask entry straight from the per-entry rules: causal `j ≤ i`; prefix-LM
/// with prefix length `v_n`.
pub fn causal_entry(i: usize, j: usize) -> u8 {
    u8::from(j <= i)
}

pub fn unified_entry(v_n: usize, i: usize, j: usize) -> u8 {
    let vision_query = i < v_n;
    let vision_key = j < v_n;
    u8::from(if vision_query { vision_key } else { vision_key || j <= i })
}

/// Precision, recall and F of one-to-one IoU ≥ 0.5 matching with exact
/// text, on axis-aligned boxes `(x0, y0, x1, y1)`.
pub fn iou_f(gt: &[((f64, f64, f64, f64), String)], pred: &[((f64, f64, f64, f64), String)]) -> (f64, f64, f64) {
    let iou = |a: (f64, f64, f64, f64), b: (f64, f64, f64, f64)| {
        let w = (a.2.min(b.2) - a.0.max(b.0)).max(0.0);
        let h = (a.3.min(b.3) - a.1.max(b.1)).max(0.0);
        let i = w * h;
        i / ((a.2 - a.0) * (a.3 - a.1) + (b.2 - b.0) * (b.3 - b.1) - i)
    };
    let mut used = vec![false; pred.len()];
    let mut tp = 0usize;
    for (gb, gt_text) in gt {
        if let Some(j) = (0..pred.len()).find(|&j| !used[j] && iou(*gb, pred[j].0) >= 0.5 && pred[j].1 == *gt_text) {
            used[j] = true;
            tp += 1;
        }
    }
    let p = if pred.is_empty() { 0.0 } else { tp as f64 / pred.len() as f64 };
    let r = if gt.is_empty() { 0.0 } else { tp as f64 / gt.len() as f64 };
    let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
    (p, r, f)
}
