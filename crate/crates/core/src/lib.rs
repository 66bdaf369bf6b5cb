//! Algorithmic tasks with reference attention masks, attention rollout and
//! the reference-token attention score.
//!
//! A [`Sample`] is a prompt, its unique answer and, for every answer token,
//! the earlier positions whose values determine it. Tokens are single
//! characters.

pub mod checks;
pub mod error;
pub mod rng;
pub mod rollout;
pub mod sample;
pub mod tasks;
pub mod token;

pub use error::{Error, Result};
pub use rng::{seeded_stream, RngStream, RNG_ALGORITHM};
pub use rollout::{
    attention_score, attention_score_at, group_scores, head_average, residual_mix, rollout, rollout_tensor, welch_t, AttentionTensor,
    RolloutMatrix, RolloutMode, ScoreSample, TensorError, WelchResult,
};
pub use sample::{parse_sample, sample_key, serialize_sample, validate_mask, Mask, MaskError, Sample, Split, TaskId};
pub use tasks::{generate, generate_many, preset_config, reference_mask, sample_from_prompt, solve, TaskConfig};
pub use token::{detokenize, tokenize_chars, Token};
