//! PNG / binary PPM input and PNG output.

use std::path::Path;

use blockspot_core::RasterImage;
use image::{DynamicImage, ImageBuffer, Rgb};

use crate::error::{Error, Result};

/// Loads an image as intensities in `[0, 1]`; grayscale stays one channel,
/// everything else becomes RGB.
pub fn load_image(path: &Path) -> Result<RasterImage> {
    let err = |message: String| Error::Image {
        path: path.to_path_buf(),
        message,
    };
    if !path.exists() {
        return Err(err("image not found".into()));
    }
    let img = image::open(path).map_err(|e| err(e.to_string()))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let (channels, bytes) = match img {
        DynamicImage::ImageLuma8(g) => (1, g.into_raw()),
        other => (3, other.to_rgb8().into_raw()),
    };
    let data = bytes.into_iter().map(|b| b as f64 / 255.0).collect();
    RasterImage::new(w, h, channels, data).map_err(|e| err(e.to_string()))
}

fn to_byte(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Writes an RGB PNG (grayscale inputs are replicated).
pub fn save_png(img: &RasterImage, path: &Path) -> Result<()> {
    let rgb = img.to_rgb();
    let bytes: Vec<u8> = rgb.data().iter().map(|&v| to_byte(v)).collect();
    let buf: ImageBuffer<Rgb<u8>, Vec<u8>> = ImageBuffer::from_raw(rgb.width() as u32, rgb.height() as u32, bytes)
        .ok_or_else(|| Error::Internal("image buffer size mismatch".into()))?;
    buf.save_with_format(path, image::ImageFormat::Png).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
