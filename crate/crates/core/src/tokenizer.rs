//! Image and text tokenization for the recognizer.
//!
//! Block cuttings are resized to a fixed `H × W`, split into
//! non-overlapping `Hp × Wp` patches (the visual tokens) and followed by a
//! `[SEP]` token. Transcriptions map to one token id per character.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::math;

/// Recognizer input height in pixels.
pub const INPUT_HEIGHT: usize = 64;
/// Recognizer input width in pixels.
pub const INPUT_WIDTH: usize = 256;
pub const PATCH_HEIGHT: usize = 8;
pub const PATCH_WIDTH: usize = 8;

pub const PAD: &str = "[PAD]";
pub const SEP: &str = "[SEP]";
pub const EOS: &str = "[EOS]";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TokenizerError {
    #[error("image data length {got} does not match {width}x{height}x{channels}")]
    BadImageData {
        width: usize,
        height: usize,
        channels: usize,
        got: usize,
    },
    #[error("unsupported channel count {0} (expected 1 or 3)")]
    BadChannels(usize),
    #[error("image dimensions must be positive")]
    EmptyImage,
    #[error("image {height}x{width} is not divisible into {patch_h}x{patch_w} patches")]
    IndivisibleDims {
        height: usize,
        width: usize,
        patch_h: usize,
        patch_w: usize,
    },
    #[error("symbol {0:?} is not in the vocabulary")]
    UnknownSymbol(char),
    #[error("token id {0} is out of range")]
    UnknownId(usize),
    #[error("invalid vocabulary: {0}")]
    InvalidVocab(String),
}

/// Row-major, channel-last image with intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self, TokenizerError> {
        if channels != 1 && channels != 3 {
            return Err(TokenizerError::BadChannels(channels));
        }
        if width == 0 || height == 0 {
            return Err(TokenizerError::EmptyImage);
        }
        if data.len() != width * height * channels {
            return Err(TokenizerError::BadImageData {
                width,
                height,
                channels,
                got: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Result<Self, TokenizerError> {
        Self::new(width, height, channels, alloc::vec![value; width * height * channels])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f64) {
        self.data[(y * self.width + x) * self.channels + c] = v;
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[f64] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    /// Three-channel copy; grayscale is replicated.
    pub fn to_rgb(&self) -> RasterImage {
        if self.channels == 3 {
            return self.clone();
        }
        let data = self.data.iter().flat_map(|&v| [v, v, v]).collect();
        RasterImage {
            width: self.width,
            height: self.height,
            channels: 3,
            data,
        }
    }

    /// Sub-image `[x0, x0 + w) × [y0, y0 + h)`; caller guarantees bounds.
    pub fn sub_image(&self, x0: usize, y0: usize, w: usize, h: usize) -> RasterImage {
        let mut data = Vec::with_capacity(w * h * self.channels);
        for y in y0..y0 + h {
            let start = (y * self.width + x0) * self.channels;
            data.extend_from_slice(&self.data[start..start + w * self.channels]);
        }
        RasterImage {
            width: w,
            height: h,
            channels: self.channels,
            data,
        }
    }
}

/// Bilinear resize with half-pixel centers and edge clamping.
pub fn resize(img: &RasterImage, height: usize, width: usize) -> Result<RasterImage, TokenizerError> {
    if height == 0 || width == 0 {
        return Err(TokenizerError::EmptyImage);
    }
    if height == img.height && width == img.width {
        return Ok(img.clone());
    }
    let c = img.channels;
    let sx = img.width as f64 / width as f64;
    let sy = img.height as f64 / height as f64;
    let axis = |dst: usize, scale: f64, len: usize| -> (usize, usize, f64) {
        let src = ((dst as f64 + 0.5) * scale - 0.5).clamp(0.0, (len - 1) as f64);
        let i0 = math::floor(src) as usize;
        let i1 = (i0 + 1).min(len - 1);
        (i0, i1, src - i0 as f64)
    };
    let xs: Vec<_> = (0..width).map(|x| axis(x, sx, img.width)).collect();
    let mut data = Vec::with_capacity(width * height * c);
    for y in 0..height {
        let (y0, y1, fy) = axis(y, sy, img.height);
        for &(x0, x1, fx) in &xs {
            for ch in 0..c {
                let top = img.get(x0, y0, ch) * (1.0 - fx) + img.get(x1, y0, ch) * fx;
                let bot = img.get(x0, y1, ch) * (1.0 - fx) + img.get(x1, y1, ch) * fx;
                data.push(top * (1.0 - fy) + bot * fy);
            }
        }
    }
    RasterImage::new(width, height, c, data)
}

/// Non-overlapping patches in raster order, each flattened channel-last.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchGrid {
    pub patch_h: usize,
    pub patch_w: usize,
    pub channels: usize,
    pub rows: usize,
    pub cols: usize,
    pub patches: Vec<Vec<f64>>,
}

impl PatchGrid {
    /// Number of visual tokens, `H·W / (Hp·Wp)`.
    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    pub fn patch_dim(&self) -> usize {
        self.patch_h * self.patch_w * self.channels
    }

    /// Reassembles the source image.
    pub fn to_image(&self) -> RasterImage {
        let (w, h, c) = (self.cols * self.patch_w, self.rows * self.patch_h, self.channels);
        let mut data = alloc::vec![0.0; w * h * c];
        for (k, patch) in self.patches.iter().enumerate() {
            let (pr, pc) = (k / self.cols, k % self.cols);
            for dy in 0..self.patch_h {
                let y = pr * self.patch_h + dy;
                let dst = (y * w + pc * self.patch_w) * c;
                let src = dy * self.patch_w * c;
                data[dst..dst + self.patch_w * c].copy_from_slice(&patch[src..src + self.patch_w * c]);
            }
        }
        RasterImage {
            width: w,
            height: h,
            channels: c,
            data,
        }
    }
}

pub fn patch_image(img: &RasterImage, patch_h: usize, patch_w: usize) -> Result<PatchGrid, TokenizerError> {
    if patch_h == 0 || patch_w == 0 || img.height % patch_h != 0 || img.width % patch_w != 0 {
        return Err(TokenizerError::IndivisibleDims {
            height: img.height,
            width: img.width,
            patch_h,
            patch_w,
        });
    }
    let rows = img.height / patch_h;
    let cols = img.width / patch_w;
    let c = img.channels;
    let mut patches = Vec::with_capacity(rows * cols);
    for pr in 0..rows {
        for pc in 0..cols {
            let mut p = Vec::with_capacity(patch_h * patch_w * c);
            for dy in 0..patch_h {
                let start = ((pr * patch_h + dy) * img.width + pc * patch_w) * c;
                p.extend_from_slice(&img.data[start..start + patch_w * c]);
            }
            patches.push(p);
        }
    }
    Ok(PatchGrid {
        patch_h,
        patch_w,
        channels: c,
        rows,
        cols,
        patches,
    })
}

/// Resizes a cutting to the recognizer input size, forces three channels and
/// patches it with the default patch size.
pub fn visual_tokens(img: &RasterImage) -> Result<PatchGrid, TokenizerError> {
    let resized = resize(&img.to_rgb(), INPUT_HEIGHT, INPUT_WIDTH)?;
    patch_image(&resized, PATCH_HEIGHT, PATCH_WIDTH)
}

/// Character vocabulary with `[PAD]`, `[SEP]` and `[EOS]` specials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    symbols: Vec<String>,
    lookup: BTreeMap<char, usize>,
    pad: usize,
    sep: usize,
    eos: usize,
}

impl Default for Vocab {
    /// Specials, space, `A`–`Z`, `0`–`9`.
    fn default() -> Self {
        let mut symbols: Vec<String> = [PAD, SEP, EOS, " "].iter().map(|s| s.to_string()).collect();
        symbols.extend(('A'..='Z').chain('0'..='9').map(|c| c.to_string()));
        Self::from_symbols(symbols).expect("default vocabulary is valid")
    }
}

impl Vocab {
    pub fn from_symbols(symbols: Vec<String>) -> Result<Self, TokenizerError> {
        let mut lookup = BTreeMap::new();
        let (mut pad, mut sep, mut eos) = (None, None, None);
        for (id, s) in symbols.iter().enumerate() {
            let special = match s.as_str() {
                PAD => Some(&mut pad),
                SEP => Some(&mut sep),
                EOS => Some(&mut eos),
                _ => None,
            };
            if let Some(slot) = special {
                if slot.replace(id).is_some() {
                    return Err(TokenizerError::InvalidVocab(alloc::format!("duplicate {s}")));
                }
                continue;
            }
            let mut chars = s.chars();
            let c = match (chars.next(), chars.next()) {
                (Some(c), None) => c,
                _ => {
                    return Err(TokenizerError::InvalidVocab(alloc::format!(
                        "symbol {s:?} is neither a special nor a single character"
                    )))
                }
            };
            if lookup.insert(c, id).is_some() {
                return Err(TokenizerError::InvalidVocab(alloc::format!("duplicate symbol {c:?}")));
            }
        }
        let missing = |name: &str| TokenizerError::InvalidVocab(alloc::format!("missing {name}"));
        Ok(Self {
            pad: pad.ok_or_else(|| missing(PAD))?,
            sep: sep.ok_or_else(|| missing(SEP))?,
            eos: eos.ok_or_else(|| missing(EOS))?,
            symbols,
            lookup,
        })
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn pad(&self) -> usize {
        self.pad
    }

    pub fn sep(&self) -> usize {
        self.sep
    }

    pub fn eos(&self) -> usize {
        self.eos
    }

    pub fn id_of(&self, c: char) -> Option<usize> {
        self.lookup.get(&c).copied()
    }

    /// Characters that can appear in transcriptions, in id order.
    pub fn chars(&self) -> Vec<char> {
        let mut v: Vec<(usize, char)> = self.lookup.iter().map(|(&c, &id)| (id, c)).collect();
        v.sort_unstable();
        v.into_iter().map(|(_, c)| c).collect()
    }

    pub fn encode(&self, s: &str) -> Result<Vec<usize>, TokenizerError> {
        s.chars()
            .map(|c| self.id_of(c).ok_or(TokenizerError::UnknownSymbol(c)))
            .collect()
    }

    /// Inverse of [`Vocab::encode`]. `[PAD]` and `[SEP]` are skipped and
    /// decoding stops at the first `[EOS]`.
    pub fn decode(&self, ids: &[usize]) -> Result<String, TokenizerError> {
        let mut out = String::new();
        for &id in ids {
            if id >= self.symbols.len() {
                return Err(TokenizerError::UnknownId(id));
            }
            if id == self.eos {
                break;
            }
            if id == self.pad || id == self.sep {
                continue;
            }
            out.push_str(&self.symbols[id]);
        }
        Ok(out)
    }
}

pub fn encode_text(s: &str, vocab: &Vocab) -> Result<Vec<usize>, TokenizerError> {
    vocab.encode(s)
}

pub fn decode_text(ids: &[usize], vocab: &Vocab) -> Result<String, TokenizerError> {
    vocab.decode(ids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn ramp(w: usize, h: usize, c: usize) -> RasterImage {
        let n = w * h * c;
        RasterImage::new(w, h, c, (0..n).map(|i| i as f64 / n as f64).collect()).unwrap()
    }

    #[test]
    fn default_input_gives_256_tokens() {
        let img = RasterImage::filled(INPUT_WIDTH, INPUT_HEIGHT, 3, 0.5).unwrap();
        let grid = patch_image(&img, 8, 8).unwrap();
        assert_eq!(grid.len(), 256);
        assert_eq!(grid.patch_dim(), 192);
    }

    #[test]
    fn single_patch_is_flattened_image() {
        let img = ramp(8, 8, 3);
        let grid = patch_image(&img, 8, 8).unwrap();
        assert_eq!(grid.len(), 1);
        assert_eq!(grid.patches[0], img.data());
    }

    #[test]
    fn indivisible_patch_size() {
        let img = RasterImage::filled(256, 64, 3, 0.0).unwrap();
        assert!(matches!(patch_image(&img, 7, 8), Err(TokenizerError::IndivisibleDims { .. })));
    }

    #[test]
    fn patches_reassemble() {
        let img = ramp(24, 16, 3);
        assert_eq!(patch_image(&img, 8, 4).unwrap().to_image(), img);
    }

    #[test]
    fn resize_identity_and_constant() {
        let img = ramp(10, 6, 1);
        assert_eq!(resize(&img, 6, 10).unwrap(), img);
        let flat = RasterImage::filled(5, 3, 3, 0.25).unwrap();
        let up = resize(&flat, 6, 10).unwrap();
        assert!(up.data().iter().all(|&v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn image_validation() {
        assert!(matches!(RasterImage::new(2, 2, 2, vec![0.0; 8]), Err(TokenizerError::BadChannels(2))));
        assert!(matches!(
            RasterImage::new(2, 2, 1, vec![0.0; 3]),
            Err(TokenizerError::BadImageData { .. })
        ));
    }

    #[test]
    fn vocab_round_trip_and_specials() {
        let v = Vocab::default();
        assert_eq!(v.len(), 40);
        assert_eq!(encode_text("", &v).unwrap(), Vec::<usize>::new());
        let ids = encode_text("AB", &v).unwrap();
        assert_eq!(ids, vec![v.id_of('A').unwrap(), v.id_of('B').unwrap()]);
        assert_eq!(decode_text(&ids, &v).unwrap(), "AB");
        let mut with_eos = encode_text("HI 2", &v).unwrap();
        with_eos.push(v.eos());
        with_eos.extend(encode_text("XX", &v).unwrap());
        assert_eq!(decode_text(&with_eos, &v).unwrap(), "HI 2");
        assert_eq!(decode_text(&[v.pad(), v.pad()], &v).unwrap(), "");
        assert_eq!(encode_text("a", &v), Err(TokenizerError::UnknownSymbol('a')));
        assert_eq!(decode_text(&[99], &v), Err(TokenizerError::UnknownId(99)));
    }

    #[test]
    fn vocab_rejects_duplicates_and_missing_specials() {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert!(Vocab::from_symbols(s(&[PAD, SEP, EOS, "A", "A"])).is_err());
        assert!(Vocab::from_symbols(s(&[PAD, SEP, "A"])).is_err());
        assert!(Vocab::from_symbols(s(&[PAD, SEP, EOS, SEP])).is_err());
        assert!(Vocab::from_symbols(s(&[PAD, SEP, EOS, "AB"])).is_err());
        let v = Vocab::from_symbols(s(&["Z", EOS, PAD, SEP])).unwrap();
        assert_eq!((v.pad(), v.sep(), v.eos()), (2, 3, 1));
    }
}
