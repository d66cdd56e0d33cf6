//! Natural reading order for horizontal scripts.
//!
//! Items are grouped into lines when their vertical extents overlap by at
//! least half of the smaller height. Lines run top to bottom and items
//! within a line left to right by centroid.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::geometry::Polygon;

/// Minimum vertical overlap, as a fraction of the smaller height, for two
/// items to share a line.
pub const LINE_OVERLAP: f64 = 0.5;

struct Line {
    top: f64,
    bottom: f64,
    members: Vec<usize>,
}

fn cmp_f64(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

/// Returns the indices of `polys` in reading order.
pub fn reading_order(polys: &[&Polygon]) -> Vec<usize> {
    let boxes: Vec<_> = polys.iter().map(|p| p.bbox()).collect();
    let cx: Vec<f64> = polys.iter().map(|p| p.centroid().x).collect();

    let mut by_y: Vec<usize> = (0..polys.len()).collect();
    by_y.sort_by(|&a, &b| {
        cmp_f64(boxes[a].center().y, boxes[b].center().y)
            .then(cmp_f64(cx[a], cx[b]))
            .then(a.cmp(&b))
    });

    let mut lines: Vec<Line> = Vec::new();
    for i in by_y {
        let b = &boxes[i];
        let slot = lines.iter().position(|line| {
            let overlap = b.max_y.min(line.bottom) - b.min_y.max(line.top);
            let min_h = b.height().min(line.bottom - line.top);
            overlap > 0.0 && overlap >= LINE_OVERLAP * min_h
        });
        match slot {
            Some(k) => {
                let line = &mut lines[k];
                line.top = line.top.min(b.min_y);
                line.bottom = line.bottom.max(b.max_y);
                line.members.push(i);
            }
            None => lines.push(Line {
                top: b.min_y,
                bottom: b.max_y,
                members: alloc::vec![i],
            }),
        }
    }

    let mut out = Vec::with_capacity(polys.len());
    for mut line in lines {
        line.members.sort_by(|&a, &b| cmp_f64(cx[a], cx[b]).then(a.cmp(&b)));
        out.extend(line.members);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64, y: f64, w: f64, h: f64) -> Polygon {
        Polygon::rect(x, y, x + w, y + h).unwrap()
    }

    #[test]
    fn two_lines_left_to_right() {
        let polys = [
            r(50.0, 40.0, 30.0, 10.0), // line 2, right
            r(60.0, 0.0, 30.0, 12.0),  // line 1, right
            r(0.0, 2.0, 40.0, 10.0),   // line 1, left
            r(0.0, 41.0, 30.0, 10.0),  // line 2, left
        ];
        let refs: Vec<&Polygon> = polys.iter().collect();
        assert_eq!(reading_order(&refs), alloc::vec![2, 1, 3, 0]);
    }

    #[test]
    fn small_vertical_offset_stays_on_line() {
        let polys = [r(100.0, 4.0, 20.0, 10.0), r(0.0, 0.0, 20.0, 10.0)];
        let refs: Vec<&Polygon> = polys.iter().collect();
        assert_eq!(reading_order(&refs), alloc::vec![1, 0]);
    }

    #[test]
    fn empty_input() {
        assert!(reading_order(&[]).is_empty());
    }
}
