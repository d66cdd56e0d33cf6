//! Toy decoder-only recognizer over `[patches ; SEP ; characters]`.
//!
//! Visual patches are projected by a learned linear map, language tokens are
//! looked up in an embedding table, and a pre-norm transformer stack runs
//! over the concatenation under a [`MaskKind`]. Training minimizes the
//! next-token loss over the language tail only; inference decodes greedily
//! or with beam search on top of a key/value cache.

mod attention;
mod decode;
mod mask;
mod model;
mod tensor;
mod train;

pub use attention::{attention_weights, masked_attention};
pub use decode::{beam_search, decode, greedy, sequence_log_prob, DecodeConfig, Decoded, KvCache};
pub use mask::{causal_mask, unified_mask, visual_mask, AttentionMask, MaskKind};
pub use model::{backward, forward, lm_loss, sample_loss, Example, Hyper, ModelParams, TensorView};
pub use tensor::Matrix;
pub use train::{
    exact_accuracy, patches_matrix, train, Adam, CurvePoint, Executor, Sequential, TrainConfig, TrainReport,
    TrainSample,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid prefix length {v_n} for a sequence of {total} tokens")]
    InvalidPrefix { v_n: usize, total: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(&'static str),
    #[error("sequence of {len} tokens exceeds max_len {max}")]
    SequenceTooLong { len: usize, max: usize },
    #[error("token id {0} is outside the vocabulary")]
    UnknownToken(usize),
    #[error("loss is not finite")]
    NonFiniteLoss,
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("empty batch")]
    EmptyBatch,
}
