use std::collections::HashSet;

use blockspot_core::synth::*;
use blockspot_core::tokenizer::{patch_image, Vocab};

#[test]
fn ten_thousand_seeds_give_distinct_texts() {
    let cfg = SynthConfig::default();
    let texts: HashSet<String> = (0..10_000).map(|s| synth_text(s, &cfg)).collect();
    assert_eq!(texts.len(), 10_000);
}

#[test]
fn samples_fit_the_vocabulary_and_the_grid() {
    let v = Vocab::default();
    for seed in 0..200 {
        let s = synth_sample(seed);
        assert_eq!((s.image.width(), s.image.height(), s.image.channels()), (256, 64, 3));
        assert!(v.encode(&s.text).is_ok());
        let grid = patch_image(&s.image, GLYPH, GLYPH).unwrap();
        for (i, c) in s.text.chars().enumerate() {
            let lit = grid.patches[i].iter().any(|&x| x > 0.0);
            assert_eq!(lit, c != ' ', "seed {seed} char {i}");
        }
        assert!(grid.patches[s.text.chars().count()..].iter().all(|p| p.iter().all(|&x| x == 0.0)));
    }
}

#[test]
fn small_canvas() {
    let cfg = SynthConfig {
        height: 32,
        width: 128,
        max_words: 3,
        max_word_len: 6,
    };
    let s = synth_sample_with(5, &cfg).unwrap();
    assert_eq!((s.image.width(), s.image.height()), (128, 32));
    assert!(s.text.chars().count() <= 20);
}
