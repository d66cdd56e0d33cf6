//! Block-level label generation from instance-level annotations.
//!
//! Each instance is described by a position feature (its outline resampled to
//! `K` points and normalized by the image size) and a visual feature (a
//! globally pooled descriptor of its crop). The concatenated features are
//! clustered with DBSCAN and every cluster becomes one text block whose
//! outline is the convex hull of its members.

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::crop::{self, CropError};
use crate::geometry::{self, GeometryError, Point, Polygon};
use crate::math;
use crate::order::reading_order;
use crate::tokenizer::{self, RasterImage};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BlockGenError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("feature length {got} does not match expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{instances} instances but {labels} labels")]
    LengthMismatch { instances: usize, labels: usize },
    #[error("crop has zero area")]
    EmptyCrop,
    #[error("instance {0} has empty text and is not flagged ignore")]
    EmptyText(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl From<CropError> for BlockGenError {
    fn from(_: CropError) -> Self {
        BlockGenError::EmptyCrop
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextInstance {
    pub polygon: Polygon,
    pub text: String,
    pub ignore: bool,
}

impl TextInstance {
    pub fn new(polygon: Polygon, text: impl Into<String>, ignore: bool) -> Self {
        Self {
            polygon,
            text: text.into(),
            ignore,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImageDims {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
}

impl ImageDims {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            channels: 3,
        }
    }
}

/// Outline resampled to `K` points, flattened as `x/w, y/h` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionFeature(pub Vec<f64>);

/// Pooled visual descriptor of length `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct VisualFeature(pub Vec<f64>);

/// Concatenated clustering feature `[position ; visual]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(pub Vec<f64>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClusterLabel(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct TextBlock {
    pub polygon: Polygon,
    /// Instance indices in reading order.
    pub members: Vec<usize>,
    pub text: String,
    pub ignore: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockGenConfig {
    pub eps: f64,
    pub min_pts: usize,
    /// Resampled outline points per instance.
    pub k: usize,
    /// Visual feature length; must match the extractor.
    pub d: usize,
    /// Weight of the position block relative to the visual block.
    pub lambda: f64,
}

impl Default for BlockGenConfig {
    fn default() -> Self {
        Self {
            eps: 0.3,
            min_pts: 1,
            k: 8,
            d: GridHistogramExtractor::OUTPUT_DIM,
            lambda: 1.0,
        }
    }
}

impl BlockGenConfig {
    pub fn validate(&self) -> Result<(), BlockGenError> {
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(BlockGenError::InvalidConfig("eps must be positive"));
        }
        if self.min_pts < 1 {
            return Err(BlockGenError::InvalidConfig("min_pts must be at least 1"));
        }
        if self.k < 4 {
            return Err(BlockGenError::InvalidConfig("k must be at least 4"));
        }
        if self.d == 0 {
            return Err(BlockGenError::InvalidConfig("d must be positive"));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(BlockGenError::InvalidConfig("lambda must be non-negative"));
        }
        Ok(())
    }
}

/// Resamples the outline at `K` points equally spaced along the vertex
/// parameterization (each edge spans an equal parameter interval, so `K`
/// equal to the vertex count returns the vertices themselves).
///
/// Vertices are clamped into the image first and the walk starts at the
/// vertex closest to the image origin, so the feature does not depend on
/// which vertex the annotator listed first.
pub fn position_features(inst: &TextInstance, dims: ImageDims, k: usize) -> Result<PositionFeature, BlockGenError> {
    if k < 4 {
        return Err(BlockGenError::InvalidConfig("k must be at least 4"));
    }
    if dims.width == 0 || dims.height == 0 {
        return Err(BlockGenError::InvalidConfig("image dimensions must be positive"));
    }
    let (w, h) = (dims.width as f64, dims.height as f64);
    let verts: Vec<Point> = inst
        .polygon
        .vertices()
        .iter()
        .map(|p| Point::new(p.x.clamp(0.0, w), p.y.clamp(0.0, h)))
        .collect();
    let n = verts.len();
    let start = (0..n)
        .min_by(|&a, &b| {
            let ka = (verts[a].x + verts[a].y, verts[a].x);
            let kb = (verts[b].x + verts[b].y, verts[b].x);
            ka.partial_cmp(&kb).unwrap_or(core::cmp::Ordering::Equal)
        })
        .unwrap_or(0);

    let mut out = Vec::with_capacity(2 * k);
    for j in 0..k {
        let t = (j * n) as f64 / k as f64;
        let e = math::floor(t) as usize;
        let frac = t - e as f64;
        let a = verts[(start + e) % n];
        let b = verts[(start + e + 1) % n];
        out.push((a.x + frac * (b.x - a.x)) / w);
        out.push((a.y + frac * (b.y - a.y)) / h);
    }
    Ok(PositionFeature(out))
}

/// Spatial feature map: `cells` locations × `channels` values, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub cells: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

impl FeatureMap {
    /// Global average pooling over cells.
    pub fn global_average_pool(&self) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.channels];
        for cell in self.data.chunks_exact(self.channels) {
            for (o, v) in out.iter_mut().zip(cell) {
                *o += v;
            }
        }
        out.iter_mut().for_each(|o| *o /= self.cells as f64);
        out
    }
}

/// Backbone producing a spatial feature map from a preprocessed crop.
pub trait FeatureExtractor {
    /// `(height, width)` the crop is resized to before extraction.
    fn input_size(&self) -> (usize, usize);
    fn output_dim(&self) -> usize;
    /// `img` is already resized to [`input_size`](Self::input_size), three
    /// channels, intensities in `[0, 1]`.
    fn feature_map(&self, img: &RasterImage) -> FeatureMap;
}

/// Hand-crafted color and gradient descriptor.
///
/// The 32×32 input is split into a 4×4 grid of cells. Every cell holds four
/// 4×4-pixel sub-cells and emits, per sub-cell, a 3-bin histogram per color
/// channel (9), a 4-bin magnitude-weighted gradient orientation histogram (4)
/// and the mean of each channel (3): 4 × 16 = 64 channels per cell.
#[derive(Debug, Clone, Copy, Default)]
pub struct GridHistogramExtractor;

impl GridHistogramExtractor {
    pub const OUTPUT_DIM: usize = 64;
    const SIZE: usize = 32;
    const GRID: usize = 4;
    const SUB: usize = 2;
    const COLOR_BINS: usize = 3;
    const ORIENT_BINS: usize = 4;
    const PER_SUB: usize = 16;
}

impl FeatureExtractor for GridHistogramExtractor {
    fn input_size(&self) -> (usize, usize) {
        (Self::SIZE, Self::SIZE)
    }

    fn output_dim(&self) -> usize {
        Self::OUTPUT_DIM
    }

    fn feature_map(&self, img: &RasterImage) -> FeatureMap {
        let s = Self::SIZE;
        let lum: Vec<f64> = (0..s * s)
            .map(|i| img.pixel(i % s, i / s).iter().sum::<f64>() / img.channels() as f64)
            .collect();
        let at = |x: isize, y: isize| {
            let cx = x.clamp(0, s as isize - 1) as usize;
            let cy = y.clamp(0, s as isize - 1) as usize;
            lum[cy * s + cx]
        };

        let cell = s / Self::GRID;
        let sub = cell / Self::SUB;
        let mut data = Vec::with_capacity(Self::GRID * Self::GRID * Self::OUTPUT_DIM);
        for gy in 0..Self::GRID {
            for gx in 0..Self::GRID {
                for sy in 0..Self::SUB {
                    for sx in 0..Self::SUB {
                        let mut desc = [0.0; Self::PER_SUB];
                        let x0 = gx * cell + sx * sub;
                        let y0 = gy * cell + sy * sub;
                        for y in y0..y0 + sub {
                            for x in x0..x0 + sub {
                                let px = img.pixel(x, y);
                                for ch in 0..3 {
                                    let v = px[ch].clamp(0.0, 1.0);
                                    let bin = ((v * Self::COLOR_BINS as f64) as usize).min(Self::COLOR_BINS - 1);
                                    desc[ch * Self::COLOR_BINS + bin] += 1.0;
                                    desc[13 + ch] += v;
                                }
                                let (xi, yi) = (x as isize, y as isize);
                                let gxv = (at(xi + 1, yi) - at(xi - 1, yi)) * 0.5;
                                let gyv = (at(xi, yi + 1) - at(xi, yi - 1)) * 0.5;
                                let mag = math::sqrt(gxv * gxv + gyv * gyv);
                                if mag > 0.0 {
                                    let mut theta = math::atan2(gyv, gxv);
                                    if theta < 0.0 {
                                        theta += core::f64::consts::PI;
                                    }
                                    let bin = ((theta / (core::f64::consts::PI / Self::ORIENT_BINS as f64)) as usize)
                                        % Self::ORIENT_BINS;
                                    desc[9 + bin] += mag;
                                }
                            }
                        }
                        let npx = (sub * sub) as f64;
                        data.extend(desc.iter().map(|v| v / npx));
                    }
                }
            }
        }
        FeatureMap {
            cells: Self::GRID * Self::GRID,
            channels: Self::OUTPUT_DIM,
            data,
        }
    }
}

/// Resize, force RGB, clamp to `[0, 1]`, extract and pool.
pub fn visual_features(crop: &RasterImage, extractor: &dyn FeatureExtractor) -> Result<VisualFeature, BlockGenError> {
    let (h, w) = extractor.input_size();
    let mut pre = tokenizer::resize(&crop.to_rgb(), h, w).map_err(|_| BlockGenError::EmptyCrop)?;
    let clamped: Vec<f64> = pre.data().iter().map(|v| v.clamp(0.0, 1.0)).collect();
    pre = RasterImage::new(w, h, 3, clamped).map_err(|_| BlockGenError::EmptyCrop)?;
    let pooled = extractor.feature_map(&pre).global_average_pool();
    if pooled.len() != extractor.output_dim() {
        return Err(BlockGenError::DimensionMismatch {
            expected: extractor.output_dim(),
            got: pooled.len(),
        });
    }
    Ok(VisualFeature(pooled))
}

fn l2_normalized(v: &[f64]) -> Vec<f64> {
    let norm = math::sqrt(v.iter().map(|x| x * x).sum());
    if norm > 0.0 {
        v.iter().map(|x| x / norm).collect()
    } else {
        v.to_vec()
    }
}

/// `[λ · pos / √K ; vis / ‖vis‖]`.
///
/// Dividing the position block by `√K` makes its distances the RMS
/// displacement of the resampled outline points in image-relative units.
pub fn combine_features(pos: &PositionFeature, vis: &VisualFeature, lambda: f64) -> FeatureVector {
    let k = (pos.0.len() / 2).max(1) as f64;
    let scale = lambda / math::sqrt(k);
    let mut out: Vec<f64> = pos.0.iter().map(|v| v * scale).collect();
    out.extend(l2_normalized(&vis.0));
    FeatureVector(out)
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// DBSCAN over Euclidean distance (`dist ≤ eps` is a neighbor, a point is its
/// own neighbor). Noise points receive singleton labels. Labels are numbered
/// by the first index that carries them.
pub fn dbscan(features: &[FeatureVector], eps: f64, min_pts: usize) -> Result<Vec<ClusterLabel>, BlockGenError> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(BlockGenError::InvalidConfig("eps must be positive"));
    }
    if min_pts < 1 {
        return Err(BlockGenError::InvalidConfig("min_pts must be at least 1"));
    }
    let n = features.len();
    if let Some(first) = features.first() {
        let dim = first.0.len();
        if let Some(bad) = features.iter().find(|f| f.0.len() != dim) {
            return Err(BlockGenError::DimensionMismatch {
                expected: dim,
                got: bad.0.len(),
            });
        }
    }
    let eps2 = eps * eps;
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| dist2(&features[i].0, &features[j].0) <= eps2).collect())
        .collect();

    const UNSET: usize = usize::MAX;
    let mut label = alloc::vec![UNSET; n];
    let mut next = 0usize;
    let mut queue = Vec::new();
    for i in 0..n {
        if label[i] != UNSET || neighbors[i].len() < min_pts {
            continue;
        }
        label[i] = next;
        queue.clear();
        queue.extend_from_slice(&neighbors[i]);
        while let Some(j) = queue.pop() {
            if label[j] != UNSET {
                continue;
            }
            label[j] = next;
            if neighbors[j].len() >= min_pts {
                queue.extend(neighbors[j].iter().copied().filter(|&q| label[q] == UNSET));
            }
        }
        next += 1;
    }
    for l in label.iter_mut().filter(|l| **l == UNSET) {
        *l = next;
        next += 1;
    }
    Ok(canonical_labels(&label))
}

/// Renumbers labels by first occurrence.
fn canonical_labels(raw: &[usize]) -> Vec<ClusterLabel> {
    let mut map: Vec<(usize, usize)> = Vec::new();
    raw.iter()
        .map(|&r| {
            let id = match map.iter().find(|(k, _)| *k == r) {
                Some(&(_, v)) => v,
                None => {
                    map.push((r, map.len()));
                    map.len() - 1
                }
            };
            ClusterLabel(id)
        })
        .collect()
}

/// Joins texts of `members` in reading order; returns the reordered members.
pub fn join_in_reading_order<'a>(
    members: &[usize],
    polygon_of: impl Fn(usize) -> &'a Polygon,
    text_of: impl Fn(usize) -> &'a str,
) -> (Vec<usize>, String) {
    let polys: Vec<&Polygon> = members.iter().map(|&m| polygon_of(m)).collect();
    let ordered: Vec<usize> = reading_order(&polys).into_iter().map(|k| members[k]).collect();
    let mut text = String::new();
    for &m in &ordered {
        let t = text_of(m);
        if t.is_empty() {
            continue;
        }
        if !text.is_empty() {
            text.push(' ');
        }
        text.push_str(t);
    }
    (ordered, text)
}

/// One block per distinct label, in order of first appearance.
pub fn merge_blocks(instances: &[TextInstance], labels: &[ClusterLabel]) -> Result<Vec<TextBlock>, BlockGenError> {
    if instances.len() != labels.len() {
        return Err(BlockGenError::LengthMismatch {
            instances: instances.len(),
            labels: labels.len(),
        });
    }
    let mut groups: Vec<(ClusterLabel, Vec<usize>)> = Vec::new();
    for (i, l) in labels.iter().enumerate() {
        match groups.iter_mut().find(|(g, _)| g == l) {
            Some((_, m)) => m.push(i),
            None => groups.push((*l, alloc::vec![i])),
        }
    }
    groups
        .into_iter()
        .map(|(_, members)| {
            let pts: Vec<Point> = members
                .iter()
                .flat_map(|&m| instances[m].polygon.vertices().iter().copied())
                .collect();
            let polygon = geometry::convex_hull(&pts)?;
            let (members, text) =
                join_in_reading_order(&members, |m| &instances[m].polygon, |m| instances[m].text.as_str());
            Ok(TextBlock {
                polygon,
                members,
                text,
                ignore: false,
            })
        })
        .collect()
}

/// Clustering feature of every instance in `indices`.
pub fn instance_features(
    image: &RasterImage,
    dims: ImageDims,
    instances: &[TextInstance],
    indices: &[usize],
    cfg: &BlockGenConfig,
    extractor: &dyn FeatureExtractor,
) -> Result<Vec<FeatureVector>, BlockGenError> {
    if extractor.output_dim() != cfg.d {
        return Err(BlockGenError::DimensionMismatch {
            expected: cfg.d,
            got: extractor.output_dim(),
        });
    }
    indices
        .iter()
        .map(|&i| {
            let inst = &instances[i];
            let pos = position_features(inst, dims, cfg.k)?;
            let crop = crop::bbox_crop(image, &inst.polygon)?;
            let vis = visual_features(&crop, extractor)?;
            Ok(combine_features(&pos, &vis, cfg.lambda))
        })
        .collect()
}

/// Full label generation for one image.
///
/// Ignored instances skip clustering and come out as ignore blocks, after the
/// clustered blocks, in instance order.
pub fn generate_blocks(
    image: &RasterImage,
    dims: ImageDims,
    instances: &[TextInstance],
    cfg: &BlockGenConfig,
    extractor: &dyn FeatureExtractor,
) -> Result<Vec<TextBlock>, BlockGenError> {
    cfg.validate()?;
    if let Some(i) = instances.iter().position(|t| t.text.is_empty() && !t.ignore) {
        return Err(BlockGenError::EmptyText(i));
    }
    let active: Vec<usize> = (0..instances.len()).filter(|&i| !instances[i].ignore).collect();
    let mut blocks = Vec::new();
    if !active.is_empty() {
        let features = instance_features(image, dims, instances, &active, cfg, extractor)?;
        let labels = dbscan(&features, cfg.eps, cfg.min_pts)?;
        let subset: Vec<TextInstance> = active.iter().map(|&i| instances[i].clone()).collect();
        for mut block in merge_blocks(&subset, &labels)? {
            block.members.iter_mut().for_each(|m| *m = active[*m]);
            blocks.push(block);
        }
    }
    for (i, inst) in instances.iter().enumerate().filter(|(_, t)| t.ignore) {
        blocks.push(TextBlock {
            polygon: inst.polygon.clone(),
            members: alloc::vec![i],
            text: inst.text.clone(),
            ignore: true,
        });
    }
    Ok(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn inst(x0: f64, y0: f64, x1: f64, y1: f64, text: &str) -> TextInstance {
        TextInstance::new(Polygon::rect(x0, y0, x1, y1).unwrap(), text, false)
    }

    #[test]
    fn full_image_rectangle_hits_corners() {
        let f = position_features(&inst(0.0, 0.0, 640.0, 360.0, "X"), ImageDims::new(640, 360), 4).unwrap();
        assert_eq!(f.0.len(), 8);
        assert!(f.0.iter().all(|&v| v == 0.0 || v == 1.0), "{:?}", f.0);
    }

    #[test]
    fn thin_centered_quad_is_near_half() {
        let f = position_features(&inst(319.0, 179.5, 321.0, 180.5, "X"), ImageDims::new(640, 360), 8).unwrap();
        assert_eq!(f.0.len(), 16);
        for pair in f.0.chunks(2) {
            assert!((pair[0] - 0.5).abs() <= 1.0 / 640.0 + 1e-12);
            assert!((pair[1] - 0.5).abs() <= 0.5 / 360.0 + 1e-12);
        }
    }

    #[test]
    fn vertices_outside_image_are_clamped() {
        let f = position_features(&inst(-50.0, -10.0, 700.0, 20.0, "X"), ImageDims::new(640, 360), 8).unwrap();
        assert!(f.0.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn constant_crop_has_no_gradient() {
        let crop = RasterImage::filled(40, 12, 3, 0.5).unwrap();
        let v = visual_features(&crop, &GridHistogramExtractor).unwrap();
        assert_eq!(v.0.len(), 64);
        for sub in v.0.chunks(16) {
            // mid-gray falls in the middle color bin of every channel
            assert_eq!(&sub[0..9], &[0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0]);
            assert!(sub[9..13].iter().all(|g| g.abs() < 1e-12));
            assert!(sub[13..16].iter().all(|m| (m - 0.5).abs() < 1e-12));
        }
        let again = visual_features(&crop, &GridHistogramExtractor).unwrap();
        assert_eq!(v, again);
    }

    #[test]
    fn edge_crop_has_gradient_energy() {
        let data = (0..32 * 32).flat_map(|i| {
            let v = if i % 32 < 16 { 0.0 } else { 1.0 };
            [v, v, v]
        });
        let crop = RasterImage::new(32, 32, 3, data.collect()).unwrap();
        let v = visual_features(&crop, &GridHistogramExtractor).unwrap();
        let grad: f64 = v.0.chunks(16).map(|s| s[9..13].iter().sum::<f64>()).sum();
        assert!(grad > 0.0);
    }

    #[test]
    fn dbscan_two_groups() {
        let pts = |v: &[(f64, f64)]| v.iter().map(|&(x, y)| FeatureVector(vec![x, y])).collect::<Vec<_>>();
        let f = pts(&[(0.0, 0.0), (0.01, 0.0), (0.0, 0.01), (10.0, 0.0), (10.01, 0.0), (10.0, 0.01)]);
        let l = dbscan(&f, 0.1, 2).unwrap();
        assert_eq!(l.iter().collect::<alloc::collections::BTreeSet<_>>().len(), 2);
        assert_eq!(l[0], l[2]);
        assert_ne!(l[0], l[3]);
    }

    #[test]
    fn dbscan_singleton_noise_and_dense() {
        let one = [FeatureVector(vec![1.0, 2.0])];
        assert_eq!(dbscan(&one, 0.1, 2).unwrap(), vec![ClusterLabel(0)]);
        let dense: Vec<_> = (0..5).map(|i| FeatureVector(vec![i as f64 * 0.01])).collect();
        assert!(dbscan(&dense, 0.1, 5).unwrap().iter().all(|l| *l == ClusterLabel(0)));
        let mixed = [FeatureVector(vec![0.0]), FeatureVector(vec![0.0, 1.0])];
        assert!(matches!(dbscan(&mixed, 0.1, 1), Err(BlockGenError::DimensionMismatch { .. })));
        assert!(dbscan(&one, 0.0, 1).is_err());
    }

    #[test]
    fn merge_singleton_and_partition() {
        let a = inst(0.0, 0.0, 10.0, 5.0, "HELLO");
        let b = inst(12.0, 0.0, 20.0, 5.0, "WORLD");
        let blocks = merge_blocks(&[a.clone()], &[ClusterLabel(0)]).unwrap();
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0].text, "HELLO");
        assert!((blocks[0].polygon.area() - a.polygon.area()).abs() < 1e-12);

        let blocks = merge_blocks(&[b.clone(), a.clone()], &[ClusterLabel(3), ClusterLabel(3)]).unwrap();
        assert_eq!(blocks[0].text, "HELLO WORLD");
        assert_eq!(blocks[0].members, vec![1, 0]);
        assert_eq!(blocks[0].polygon.area(), 100.0);

        let blocks = merge_blocks(&[a, b], &[ClusterLabel(0), ClusterLabel(1)]).unwrap();
        assert_eq!(blocks.len(), 2);
        assert_eq!(blocks[0].members, vec![0]);
        assert_eq!(blocks[1].members, vec![1]);
        assert!(merge_blocks(&[], &[ClusterLabel(0)]).is_err());
    }

    #[test]
    fn ignored_instances_pass_through() {
        let img = RasterImage::filled(100, 50, 3, 0.2).unwrap();
        let mut a = inst(0.0, 0.0, 30.0, 10.0, "###");
        a.ignore = true;
        let mut b = inst(40.0, 0.0, 70.0, 10.0, "");
        b.ignore = true;
        let blocks = generate_blocks(
            &img,
            ImageDims::new(100, 50),
            &[a, b],
            &BlockGenConfig::default(),
            &GridHistogramExtractor,
        )
        .unwrap();
        assert_eq!(blocks.len(), 2);
        assert!(blocks.iter().all(|b| b.ignore));
    }

    #[test]
    fn single_instance_gives_one_block() {
        let img = RasterImage::filled(100, 50, 3, 0.2).unwrap();
        let blocks = generate_blocks(
            &img,
            ImageDims::new(100, 50),
            &[inst(10.0, 10.0, 40.0, 20.0, "A")],
            &BlockGenConfig::default(),
            &GridHistogramExtractor,
        )
        .unwrap();
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0].text, "A");
    }

    #[test]
    fn empty_text_requires_ignore() {
        let img = RasterImage::filled(100, 50, 3, 0.2).unwrap();
        let r = generate_blocks(
            &img,
            ImageDims::new(100, 50),
            &[inst(10.0, 10.0, 40.0, 20.0, "")],
            &BlockGenConfig::default(),
            &GridHistogramExtractor,
        );
        assert_eq!(r, Err(BlockGenError::EmptyText(0)));
    }

    #[test]
    fn config_validation() {
        let mut c = BlockGenConfig::default();
        assert!(c.validate().is_ok());
        c.eps = 0.0;
        assert!(c.validate().is_err());
        c = BlockGenConfig { k: 3, ..Default::default() };
        assert!(c.validate().is_err());
    }
}
