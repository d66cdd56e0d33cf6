//! Toy recognizer runs on synthetic glyph data.

use blockspot_core::synth::{synth_sample_with, SynthConfig};
use blockspot_core::tokenizer::patch_image;
use blockspot_core::uvlm::{
    patches_matrix, train, CurvePoint, Executor, Hyper, MaskKind, ModelParams, TrainConfig, TrainReport, TrainSample,
};
use blockspot_core::Vocab;
use serde::{Deserialize, Serialize};

use crate::checkpoint::Checkpoint;
use crate::error::{Error, Result};

pub const PATCH: usize = 8;

/// Everything that determines a toy run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToyConfig {
    pub samples: usize,
    pub steps: usize,
    #[serde(with = "mask_name")]
    pub mask: MaskKind,
    pub seed: u64,
    pub height: usize,
    pub width: usize,
    pub max_words: usize,
    pub max_word_len: usize,
    pub layers: usize,
    pub heads: usize,
    pub d_model: usize,
    pub d_ff: usize,
    pub max_len: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub eval_every: usize,
    /// Early stop once training accuracy reaches this value.
    pub target_accuracy: Option<f64>,
}

impl Default for ToyConfig {
    fn default() -> Self {
        Self {
            samples: 64,
            steps: 2000,
            mask: MaskKind::Unified,
            seed: 0,
            height: 32,
            width: 128,
            max_words: 3,
            max_word_len: 6,
            layers: 2,
            heads: 2,
            d_model: 32,
            d_ff: 64,
            max_len: 320,
            batch_size: 16,
            lr: 3e-3,
            eval_every: 10,
            target_accuracy: Some(0.99),
        }
    }
}

mod mask_name {
    use blockspot_core::uvlm::MaskKind;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &MaskKind, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(m.name())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<MaskKind, D::Error> {
        let s = String::deserialize(d)?;
        MaskKind::from_name(&s).ok_or_else(|| D::Error::custom(format!("unknown mask {s:?}")))
    }
}

impl ToyConfig {
    pub fn synth(&self) -> SynthConfig {
        SynthConfig {
            height: self.height,
            width: self.width,
            max_words: self.max_words,
            max_word_len: self.max_word_len,
        }
    }

    pub fn hyper(&self, vocab: &Vocab) -> Hyper {
        Hyper {
            layers: self.layers,
            heads: self.heads,
            d_model: self.d_model,
            d_ff: self.d_ff,
            max_len: self.max_len,
            mask: self.mask,
            patch_dim: PATCH * PATCH * 3,
            ..Hyper::toy(vocab)
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            steps: self.steps,
            batch_size: self.batch_size,
            lr: self.lr,
            eval_every: self.eval_every,
            seed: self.seed,
            target_accuracy: self.target_accuracy,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Usage("samples must be positive".into()));
        }
        if self.height % PATCH != 0 || self.width % PATCH != 0 || self.height == 0 || self.width == 0 {
            return Err(Error::Usage(format!("canvas must be a positive multiple of {PATCH}")));
        }
        if let Some(t) = self.target_accuracy {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::Usage("target accuracy must lie in [0, 1]".into()));
            }
        }
        synth_sample_with(0, &self.synth()).map_err(|e| Error::Usage(e.to_string()))?;
        let vocab = Vocab::default();
        self.hyper(&vocab).validate().map_err(|e| Error::Usage(e.to_string()))?;
        let prefix = (self.height / PATCH) * (self.width / PATCH) + 1;
        let longest = self.max_words * (self.max_word_len + 1);
        if prefix + longest > self.max_len {
            return Err(Error::Usage(format!(
                "max_len {} cannot hold {prefix} prefix tokens and {longest} language tokens",
                self.max_len
            )));
        }
        Ok(())
    }

    /// Synthesis seed of corpus sample `i`.
    pub fn sample_seed(&self, i: usize) -> u64 {
        self.seed.wrapping_mul(1000).wrapping_add(i as u64)
    }
}

/// `(text, example)` pairs of the training corpus.
pub fn build_corpus(cfg: &ToyConfig, vocab: &Vocab) -> Result<Vec<(String, TrainSample)>> {
    let sc = cfg.synth();
    (0..cfg.samples)
        .map(|i| {
            let s = synth_sample_with(cfg.sample_seed(i), &sc)?;
            let grid = patch_image(&s.image, PATCH, PATCH)?;
            let ex = TrainSample {
                patches: patches_matrix(&grid),
                tokens: vocab.encode(&s.text)?,
            };
            Ok((s.text, ex))
        })
        .collect()
}

pub struct ToyRun {
    pub checkpoint: Checkpoint,
    pub report: TrainReport,
}

impl ToyRun {
    /// First evaluated step whose accuracy reached `threshold`.
    pub fn steps_to(&self, threshold: f64) -> Option<usize> {
        steps_to(&self.report.curve, threshold)
    }
}

pub fn steps_to(curve: &[CurvePoint], threshold: f64) -> Option<usize> {
    curve.iter().find(|p| p.accuracy >= threshold).map(|p| p.step)
}

pub fn run_toy<E: Executor>(cfg: &ToyConfig, exec: &E, on_eval: impl FnMut(&CurvePoint)) -> Result<ToyRun> {
    cfg.validate()?;
    let vocab = Vocab::default();
    let data: Vec<TrainSample> = build_corpus(cfg, &vocab)?.into_iter().map(|(_, ex)| ex).collect();
    let mut params = ModelParams::init(cfg.hyper(&vocab), cfg.seed)?;
    let report = train(&mut params, &data, &vocab, &cfg.train_config(), exec, on_eval)?;
    Ok(ToyRun {
        checkpoint: Checkpoint {
            params,
            vocab,
            input: [cfg.height, cfg.width],
            patch: [PATCH, PATCH],
        },
        report,
    })
}

/// Loss curve as CSV with a `step,loss,accuracy` header.
pub fn curve_csv(curve: &[CurvePoint]) -> String {
    let mut s = String::from("step,loss,accuracy\n");
    for p in curve {
        s.push_str(&format!("{},{},{}\n", p.step, p.loss, p.accuracy));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_header_and_rows() {
        let c = [CurvePoint { step: 10, loss: 0.5, accuracy: 0.25 }];
        assert_eq!(curve_csv(&c), "step,loss,accuracy\n10,0.5,0.25\n");
        assert_eq!(steps_to(&c, 0.2), Some(10));
        assert_eq!(steps_to(&c, 0.3), None);
    }

    #[test]
    fn config_json_defaults_and_mask_names() {
        let c: ToyConfig = serde_json::from_str(r#"{"mask":"causal","steps":5}"#).unwrap();
        assert_eq!(c.mask, MaskKind::Causal);
        assert_eq!(c.steps, 5);
        assert_eq!(c.samples, ToyConfig::default().samples);
        assert!(serde_json::from_str::<ToyConfig>(r#"{"mask":"x"}"#).is_err());
    }

    #[test]
    fn corpus_is_deterministic() {
        let cfg = ToyConfig { samples: 4, ..ToyConfig::default() };
        let v = Vocab::default();
        let a = build_corpus(&cfg, &v).unwrap();
        let b = build_corpus(&cfg, &v).unwrap();
        assert_eq!(a.len(), 4);
        for ((ta, ea), (tb, eb)) in a.iter().zip(&b) {
            assert_eq!(ta, tb);
            assert_eq!(ea.patches, eb.patches);
        }
    }
}
