//! Block cutting: axis-aligned crops of polygon regions.

use alloc::vec::Vec;

use thiserror::Error;

use crate::geometry::{Point, Polygon};
use crate::math;
use crate::tokenizer::{self, RasterImage, TokenizerError, INPUT_HEIGHT, INPUT_WIDTH};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CropError {
    #[error("polygon does not overlap the image")]
    EmptyIntersection,
    #[error(transparent)]
    Image(#[from] TokenizerError),
}

/// Pixel rectangle `[x0, x1) × [y0, y1)` covering the polygon's bounding box,
/// clamped to the image.
pub fn pixel_bounds(img: &RasterImage, polygon: &Polygon) -> Result<(usize, usize, usize, usize), CropError> {
    let b = polygon.bbox();
    let clamp = |v: f64, hi: usize| v.clamp(0.0, hi as f64) as usize;
    let x0 = clamp(math::floor(b.min_x), img.width());
    let y0 = clamp(math::floor(b.min_y), img.height());
    let x1 = clamp(-math::floor(-b.max_x), img.width());
    let y1 = clamp(-math::floor(-b.max_y), img.height());
    if x1 <= x0 || y1 <= y0 {
        return Err(CropError::EmptyIntersection);
    }
    Ok((x0, y0, x1, y1))
}

/// Bounding-box crop without masking or resizing.
pub fn bbox_crop(img: &RasterImage, polygon: &Polygon) -> Result<RasterImage, CropError> {
    let (x0, y0, x1, y1) = pixel_bounds(img, polygon)?;
    Ok(img.sub_image(x0, y0, x1 - x0, y1 - y0))
}

/// Bounding-box crop where pixels whose centers fall outside the polygon are
/// replaced by the mean color of the crop's border pixels.
pub fn crop_region(img: &RasterImage, polygon: &Polygon) -> Result<RasterImage, CropError> {
    let (x0, y0, x1, y1) = pixel_bounds(img, polygon)?;
    let mut out = img.sub_image(x0, y0, x1 - x0, y1 - y0);
    let (w, h, c) = (out.width(), out.height(), out.channels());

    let mut fill = alloc::vec![0.0; c];
    let mut count = 0usize;
    for y in 0..h {
        for x in 0..w {
            if x == 0 || y == 0 || x + 1 == w || y + 1 == h {
                for (ch, f) in fill.iter_mut().enumerate() {
                    *f += out.get(x, y, ch);
                }
                count += 1;
            }
        }
    }
    fill.iter_mut().for_each(|f| *f /= count as f64);

    let outside: Vec<(usize, usize)> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|&(x, y)| {
            let centre = Point::new((x0 + x) as f64 + 0.5, (y0 + y) as f64 + 0.5);
            !polygon.contains(&centre)
        })
        .collect();
    for (x, y) in outside {
        for (ch, &f) in fill.iter().enumerate() {
            out.set(x, y, ch, f);
        }
    }
    Ok(out)
}

/// Block cutting fed to the recognizer: masked crop resized to 64×256.
pub fn crop_block(img: &RasterImage, polygon: &Polygon) -> Result<RasterImage, CropError> {
    let region = crop_region(img, polygon)?;
    Ok(tokenizer::resize(&region, INPUT_HEIGHT, INPUT_WIDTH)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gradient(w: usize, h: usize) -> RasterImage {
        let data = (0..h)
            .flat_map(|y| (0..w).flat_map(move |x| [x as f64 / w as f64, y as f64 / h as f64, 0.5]))
            .collect();
        RasterImage::new(w, h, 3, data).unwrap()
    }

    #[test]
    fn rectangle_crop_is_sub_image() {
        let img = gradient(40, 30);
        let poly = Polygon::rect(5.0, 3.0, 25.0, 13.0).unwrap();
        let crop = crop_region(&img, &poly).unwrap();
        assert_eq!(crop, img.sub_image(5, 3, 20, 10));
    }

    #[test]
    fn crop_is_clamped_and_resized() {
        let img = gradient(40, 30);
        let poly = Polygon::rect(-10.0, 20.0, 50.0, 45.0).unwrap();
        let region = crop_region(&img, &poly).unwrap();
        assert_eq!((region.width(), region.height()), (40, 10));
        let block = crop_block(&img, &poly).unwrap();
        assert_eq!((block.height(), block.width()), (64, 256));
    }

    #[test]
    fn disjoint_polygon_is_rejected() {
        let img = gradient(10, 10);
        let poly = Polygon::rect(20.0, 20.0, 30.0, 30.0).unwrap();
        assert_eq!(crop_block(&img, &poly), Err(CropError::EmptyIntersection));
    }

    #[test]
    fn outside_pixels_take_border_mean() {
        let img = RasterImage::filled(10, 10, 1, 1.0).unwrap();
        let tri = Polygon::from_coords(&[(0.0, 0.0), (10.0, 0.0), (0.0, 10.0)]).unwrap();
        let crop = crop_region(&img, &tri).unwrap();
        assert!(crop.data().iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }
}
