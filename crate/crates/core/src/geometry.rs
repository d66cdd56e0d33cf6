//! Planar polygon primitives in double precision.
//!
//! Polygons are validated once at construction (finite, simple, non-zero
//! area) and stored counter-clockwise, so every operation downstream can
//! assume a well-formed input. Intersection of concave polygons goes
//! through an ear-clipping triangulation and convex clipping of each
//! triangle pair.

use alloc::vec::Vec;
use core::cmp::Ordering;

use thiserror::Error;

use crate::math;

/// Vertices closer than this are fused into one.
pub const FUSE_EPS: f64 = 1e-9;
/// Polygons with a smaller absolute area are rejected.
pub const MIN_AREA: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("polygon needs at least 3 distinct vertices, got {0}")]
    TooFewVertices(usize),
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("polygon area is below {MIN_AREA}")]
    Degenerate,
    #[error("polygon edges intersect each other")]
    SelfIntersecting,
    #[error("no input points")]
    EmptyInput,
    #[error("all input points are collinear")]
    CollinearInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        math::sqrt(self.dist2(other))
    }

    fn dist2(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

/// Twice the signed area of triangle `(o, a, b)`; positive when the turn is
/// counter-clockwise.
#[inline]
pub fn cross(o: &Point, a: &Point, b: &Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = &pts[i];
        let b = &pts[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    acc * 0.5
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl BBox {
    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn center(&self) -> Point {
        Point::new((self.min_x + self.max_x) * 0.5, (self.min_y + self.max_y) * 0.5)
    }
}

/// A simple polygon with counter-clockwise vertex order.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    /// Validates and normalizes a vertex ring.
    ///
    /// Consecutive vertices within [`FUSE_EPS`] are fused, the ring must keep
    /// at least three vertices, enclose at least [`MIN_AREA`] and have no
    /// crossing or touching non-adjacent edges. Clockwise input is reversed.
    pub fn new(vertices: Vec<Point>) -> Result<Self, GeometryError> {
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let mut fused: Vec<Point> = Vec::with_capacity(vertices.len());
        for p in vertices {
            if fused.last().map_or(true, |q| q.dist(&p) >= FUSE_EPS) {
                fused.push(p);
            }
        }
        while fused.len() > 1 && fused[0].dist(&fused[fused.len() - 1]) < FUSE_EPS {
            fused.pop();
        }
        if fused.len() < 3 {
            return Err(GeometryError::TooFewVertices(fused.len()));
        }
        let area = signed_area(&fused);
        if area.abs() < MIN_AREA {
            return Err(GeometryError::Degenerate);
        }
        if self_intersects(&fused) {
            return Err(GeometryError::SelfIntersecting);
        }
        if area < 0.0 {
            fused.reverse();
        }
        Ok(Self { vertices: fused })
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self, GeometryError> {
        Self::new(alloc::vec![
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])
    }

    pub fn from_coords(coords: &[(f64, f64)]) -> Result<Self, GeometryError> {
        Self::new(coords.iter().map(|&c| Point::from(c)).collect())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices).abs()
    }

    pub fn bbox(&self) -> BBox {
        let mut b = BBox {
            min_x: f64::INFINITY,
            min_y: f64::INFINITY,
            max_x: f64::NEG_INFINITY,
            max_y: f64::NEG_INFINITY,
        };
        for p in &self.vertices {
            b.min_x = b.min_x.min(p.x);
            b.min_y = b.min_y.min(p.y);
            b.max_x = b.max_x.max(p.x);
            b.max_y = b.max_y.max(p.y);
        }
        b
    }

    /// Area centroid.
    pub fn centroid(&self) -> Point {
        let n = self.vertices.len();
        let (mut cx, mut cy, mut a2) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let p = &self.vertices[i];
            let q = &self.vertices[(i + 1) % n];
            let w = p.x * q.y - q.x * p.y;
            a2 += w;
            cx += (p.x + q.x) * w;
            cy += (p.y + q.y) * w;
        }
        Point::new(cx / (3.0 * a2), cy / (3.0 * a2))
    }

    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            cross(
                &self.vertices[i],
                &self.vertices[(i + 1) % n],
                &self.vertices[(i + 2) % n],
            ) >= 0.0
        })
    }

    /// Point-in-polygon by crossing number; points on the boundary count as
    /// inside.
    pub fn contains(&self, p: &Point) -> bool {
        let n = self.vertices.len();
        let mut inside = false;
        for i in 0..n {
            let a = &self.vertices[i];
            let b = &self.vertices[(i + 1) % n];
            if on_segment(a, b, p) {
                return true;
            }
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Distance from `p` to the polygon boundary, zero if `p` is inside.
    pub fn distance_outside(&self, p: &Point) -> f64 {
        if self.contains(p) {
            return 0.0;
        }
        let n = self.vertices.len();
        (0..n)
            .map(|i| segment_distance(&self.vertices[i], &self.vertices[(i + 1) % n], p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Ear-clipping triangulation. Convex polygons fan from vertex 0.
    pub fn triangulate(&self) -> Vec<[Point; 3]> {
        let pts = drop_collinear(&self.vertices);
        let mut idx: Vec<usize> = (0..pts.len()).collect();
        let mut out = Vec::with_capacity(pts.len().saturating_sub(2));
        while idx.len() > 3 {
            let m = idx.len();
            let mut ear = None;
            for k in 0..m {
                let (ip, ic, inx) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
                if cross(&pts[ip], &pts[ic], &pts[inx]) <= 0.0 {
                    continue;
                }
                let blocked = idx.iter().any(|&o| {
                    o != ip
                        && o != ic
                        && o != inx
                        && in_triangle(&pts[ip], &pts[ic], &pts[inx], &pts[o])
                });
                if !blocked {
                    ear = Some(k);
                    break;
                }
            }
            // Rounding can hide every ear on nearly degenerate rings; fall back
            // to the most convex corner.
            let k = ear.unwrap_or_else(|| {
                (0..m)
                    .max_by(|&a, &b| {
                        let ca = cross(&pts[idx[(a + m - 1) % m]], &pts[idx[a]], &pts[idx[(a + 1) % m]]);
                        let cb = cross(&pts[idx[(b + m - 1) % m]], &pts[idx[b]], &pts[idx[(b + 1) % m]]);
                        ca.partial_cmp(&cb).unwrap_or(Ordering::Equal)
                    })
                    .unwrap_or(0)
            });
            out.push([pts[idx[(k + m - 1) % m]], pts[idx[k]], pts[idx[(k + 1) % m]]]);
            idx.remove(k);
        }
        if idx.len() == 3 {
            out.push([pts[idx[0]], pts[idx[1]], pts[idx[2]]]);
        }
        out
    }

    /// Convex pieces covering the polygon without overlap.
    fn convex_pieces(&self) -> Vec<Vec<Point>> {
        if self.is_convex() {
            alloc::vec![self.vertices.clone()]
        } else {
            self.triangulate().into_iter().map(|t| t.to_vec()).collect()
        }
    }
}

fn drop_collinear(pts: &[Point]) -> Vec<Point> {
    let n = pts.len();
    let kept: Vec<Point> = (0..n)
        .filter(|&i| cross(&pts[(i + n - 1) % n], &pts[i], &pts[(i + 1) % n]) != 0.0)
        .map(|i| pts[i])
        .collect();
    if kept.len() >= 3 {
        kept
    } else {
        pts.to_vec()
    }
}

fn in_triangle(a: &Point, b: &Point, c: &Point, p: &Point) -> bool {
    cross(a, b, p) >= 0.0 && cross(b, c, p) >= 0.0 && cross(c, a, p) >= 0.0
}

fn on_segment(a: &Point, b: &Point, p: &Point) -> bool {
    cross(a, b, p) == 0.0
        && p.x >= a.x.min(b.x)
        && p.x <= a.x.max(b.x)
        && p.y >= a.y.min(b.y)
        && p.y <= a.y.max(b.y)
}

fn segment_distance(a: &Point, b: &Point, p: &Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    p.dist(&Point::new(a.x + t * dx, a.y + t * dy))
}

fn segments_intersect(a: &Point, b: &Point, c: &Point, d: &Point) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    on_segment(c, d, a) || on_segment(c, d, b) || on_segment(a, b, c) || on_segment(a, b, d)
}

fn self_intersects(pts: &[Point]) -> bool {
    let n = pts.len();
    for i in 0..n {
        let (a, b) = (&pts[i], &pts[(i + 1) % n]);
        // Adjacent edges folding back onto each other.
        let c = &pts[(i + 2) % n];
        if cross(a, b, c) == 0.0 && (b.x - a.x) * (c.x - b.x) + (b.y - a.y) * (c.y - b.y) < 0.0 {
            return true;
        }
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_intersect(a, b, &pts[j], &pts[(j + 1) % n]) {
                return true;
            }
        }
    }
    false
}

/// Smallest convex polygon containing every input point, counter-clockwise
/// without collinear vertices.
pub fn convex_hull(points: &[Point]) -> Result<Polygon, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::EmptyInput);
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| {
        a.x.partial_cmp(&b.x)
            .unwrap_or(Ordering::Equal)
            .then(a.y.partial_cmp(&b.y).unwrap_or(Ordering::Equal))
    });
    pts.dedup();
    if pts.len() < 3 {
        return Err(GeometryError::CollinearInput);
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for p in pts.iter() {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    let lower = hull.len() + 1;
    for p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    hull.pop();
    if hull.len() < 3 {
        return Err(GeometryError::CollinearInput);
    }
    Polygon::new(hull).map_err(|e| match e {
        GeometryError::Degenerate | GeometryError::TooFewVertices(_) => GeometryError::CollinearInput,
        other => other,
    })
}

/// Clips a polygon against a convex counter-clockwise clip ring.
fn clip_convex(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let mut output = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if output.is_empty() {
            break;
        }
        let (c1, c2) = (clip[i], clip[(i + 1) % n]);
        let input = core::mem::take(&mut output);
        let m = input.len();
        for k in 0..m {
            let cur = input[k];
            let prev = input[(k + m - 1) % m];
            let cur_in = cross(&c1, &c2, &cur) >= 0.0;
            let prev_in = cross(&c1, &c2, &prev) >= 0.0;
            if cur_in {
                if !prev_in {
                    output.push(line_intersection(&prev, &cur, &c1, &c2));
                }
                output.push(cur);
            } else if prev_in {
                output.push(line_intersection(&prev, &cur, &c1, &c2));
            }
        }
    }
    output
}

fn line_intersection(p: &Point, q: &Point, a: &Point, b: &Point) -> Point {
    let dp = cross(a, b, p);
    let dq = cross(a, b, q);
    let t = dp / (dp - dq);
    Point::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y))
}

fn convex_intersection_area(a: &[Point], b: &[Point]) -> f64 {
    let clipped = clip_convex(a, b);
    if clipped.len() < 3 {
        0.0
    } else {
        signed_area(&clipped).abs()
    }
}

/// Area of `a ∩ b`.
pub fn intersection_area(a: &Polygon, b: &Polygon) -> f64 {
    let (ba, bb) = (a.bbox(), b.bbox());
    if ba.max_x <= bb.min_x || bb.max_x <= ba.min_x || ba.max_y <= bb.min_y || bb.max_y <= ba.min_y {
        return 0.0;
    }
    let pa = a.convex_pieces();
    let pb = b.convex_pieces();
    let mut total = 0.0;
    for x in &pa {
        for y in &pb {
            total += convex_intersection_area(x, y);
        }
    }
    total.min(a.area()).min(b.area())
}

/// Overlap test used by the GF protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricMatch {
    pub matched: bool,
    /// `max(inter / area(g), inter / area(p))`.
    pub score: f64,
}

pub fn geometric_match(g: &Polygon, p: &Polygon, threshold: f64) -> GeometricMatch {
    let inter = intersection_area(g, p);
    let score = (inter / g.area()).max(inter / p.area());
    GeometricMatch {
        matched: score > threshold,
        score,
    }
}
