//! Deterministic synthetic text images for the toy recognizer.
//!
//! Every character is drawn as a fixed 8×8 bitmap derived from its code
//! point. Characters are laid out in raster order over the patch grid, one
//! glyph per patch, with a blank patch between words, so the `i`-th
//! character of the transcription always sits in the `i`-th patch.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::tokenizer::{RasterImage, INPUT_HEIGHT, INPUT_WIDTH};

pub const GLYPH: usize = 8;
/// Alphabet used for synthetic words.
pub const ALPHABET: &[u8; 36] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";

/// Number of leading characters reserved for the seed code.
const CODE_LEN: usize = 3;
const CODE_SPACE: u64 = 36 * 36 * 36;
/// Coprime with `CODE_SPACE`, so `seed ↦ seed·MIX mod CODE_SPACE` is a bijection.
const CODE_MIX: u64 = 7919;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error("canvas {height}x{width} cannot hold {needed} glyphs")]
    CanvasTooSmall { height: usize, width: usize, needed: usize },
    #[error("invalid synthesis parameters")]
    InvalidConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthConfig {
    pub height: usize,
    pub width: usize,
    pub max_words: usize,
    pub max_word_len: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            height: INPUT_HEIGHT,
            width: INPUT_WIDTH,
            max_words: 5,
            max_word_len: 8,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<(), SynthError> {
        if self.max_words == 0
            || self.max_word_len == 0
            || self.max_words * self.max_word_len < CODE_LEN
            || self.height % GLYPH != 0
            || self.width % GLYPH != 0
        {
            return Err(SynthError::InvalidConfig);
        }
        let needed = self.max_words * (self.max_word_len + 1) - 1;
        if needed > (self.height / GLYPH) * (self.width / GLYPH) {
            return Err(SynthError::CanvasTooSmall {
                height: self.height,
                width: self.width,
                needed,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSample {
    pub image: RasterImage,
    pub text: String,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 8×8 bitmap of `c`, row-major, bit `8·row + col`. Never blank.
pub fn glyph_bits(c: char) -> u64 {
    let mut bits = splitmix64(c as u64);
    while bits.count_ones() < 16 {
        bits = splitmix64(bits);
    }
    bits
}

/// Text drawn from `seed`: 1..=max_words words of 1..=max_word_len
/// characters, at least three characters in total. The first three
/// characters encode `seed` so that seeds below 36³ never repeat a text.
pub fn synth_text(seed: u64, cfg: &SynthConfig) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = rng.gen_range(1..=cfg.max_words);
    let mut lens: Vec<usize> = (0..words).map(|_| rng.gen_range(1..=cfg.max_word_len)).collect();
    let mut total: usize = lens.iter().sum();
    let mut w = 0;
    while total < CODE_LEN {
        if lens[w] < cfg.max_word_len {
            lens[w] += 1;
            total += 1;
        }
        w = (w + 1) % lens.len();
    }
    let mut letters: Vec<u8> = (0..total).map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())]).collect();
    let mut code = (seed % CODE_SPACE) * CODE_MIX % CODE_SPACE;
    for slot in letters.iter_mut().take(CODE_LEN) {
        *slot = ALPHABET[(code % 36) as usize];
        code /= 36;
    }
    let mut text = String::with_capacity(total + words);
    let mut it = letters.into_iter();
    for (k, len) in lens.into_iter().enumerate() {
        if k > 0 {
            text.push(' ');
        }
        text.extend(it.by_ref().take(len).map(char::from));
    }
    text
}

/// Renders `text` in raster order over the glyph grid (white on black,
/// three channels).
pub fn render_text(text: &str, height: usize, width: usize) -> Result<RasterImage, SynthError> {
    let cols = width / GLYPH;
    let rows = height / GLYPH;
    let n = text.chars().count();
    if n > rows * cols || height % GLYPH != 0 || width % GLYPH != 0 {
        return Err(SynthError::CanvasTooSmall { height, width, needed: n });
    }
    let mut img = RasterImage::filled(width, height, 3, 0.0).map_err(|_| SynthError::InvalidConfig)?;
    for (i, c) in text.chars().enumerate() {
        if c == ' ' {
            continue;
        }
        let bits = glyph_bits(c);
        let (x0, y0) = ((i % cols) * GLYPH, (i / cols) * GLYPH);
        for r in 0..GLYPH {
            for col in 0..GLYPH {
                if bits >> (r * GLYPH + col) & 1 == 1 {
                    for ch in 0..3 {
                        img.set(x0 + col, y0 + r, ch, 1.0);
                    }
                }
            }
        }
    }
    Ok(img)
}

pub fn synth_sample_with(seed: u64, cfg: &SynthConfig) -> Result<SynthSample, SynthError> {
    cfg.validate()?;
    let text = synth_text(seed, cfg);
    let image = render_text(&text, cfg.height, cfg.width)?;
    Ok(SynthSample { image, text })
}

/// 64×256 sample with up to five words of up to eight characters.
pub fn synth_sample(seed: u64) -> SynthSample {
    synth_sample_with(seed, &SynthConfig::default()).expect("default synthesis config is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        assert_eq!(synth_sample(42), synth_sample(42));
        assert_ne!(synth_sample(42).text, synth_sample(43).text);
    }

    #[test]
    fn word_and_char_counts() {
        let cfg = SynthConfig::default();
        for seed in 0..500 {
            let t = synth_text(seed, &cfg);
            let words: Vec<&str> = t.split(' ').collect();
            assert!((1..=5).contains(&words.len()), "{t:?}");
            assert!(words.iter().all(|w| (1..=8).contains(&w.len())), "{t:?}");
            assert!(t.chars().filter(|c| *c != ' ').count() >= 3);
        }
    }

    #[test]
    fn repeated_glyphs_are_identical() {
        let img = render_text("A A", 8, 64).unwrap();
        let a = img.sub_image(0, 0, 8, 8);
        let b = img.sub_image(16, 0, 8, 8);
        assert_eq!(a, b);
        assert!(img.sub_image(8, 0, 8, 8).data().iter().all(|&v| v == 0.0));
        assert!(a.data().iter().any(|&v| v == 1.0));
    }

    #[test]
    fn glyphs_are_distinct() {
        let bits: Vec<u64> = ALPHABET.iter().map(|&c| glyph_bits(c as char)).collect();
        for i in 0..bits.len() {
            for j in i + 1..bits.len() {
                assert_ne!(bits[i], bits[j]);
            }
        }
    }

    #[test]
    fn canvas_checks() {
        let tiny = SynthConfig {
            height: 8,
            width: 16,
            ..SynthConfig::default()
        };
        assert!(matches!(synth_sample_with(0, &tiny), Err(SynthError::CanvasTooSmall { .. })));
    }
}
