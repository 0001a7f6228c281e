//! Conditional encoder/attention-decoder acoustic model.
//!
//! A phrase's phoneme IDs are encoded to a `[T, 512]` memory. Two conditions
//! are appended to every memory row: a 256-d context embedding, computed from
//! the encoder outputs of the previous and next phrases by one shared
//! reference encoder followed by token attention, and a 128-d acoustic
//! embedding, computed from a reference mel-spectrogram by a separately
//! parameterised reference encoder and token table. The resulting `[T, 896]`
//! memory feeds a location-sensitive attention decoder that emits 80-band
//! mel frames autoregressively.

mod config;
mod decoder;
mod embedding;
mod encoder;
mod io;
mod reference;
mod types;
mod weights;

pub use config::{DecoderConfig, ModelConfig};
pub use decoder::{decode_mel, DecodeLimits, DecodeOutput, StopReason};
pub use embedding::{
    acoustic_embed, condition_concat, context_embed, context_query, token_attention, TokenAttention,
};
pub use encoder::encode_phrase;
pub use io::{
    read_mel, read_tensors, read_weights, write_mel, write_tensors, write_weights, MEL_TENSOR,
    WEIGHTS_MAGIC, WEIGHTS_VERSION,
};
pub use reference::{reference_encode, ReferenceEncoder, ACOUSTIC_REF, CONTEXT_REF};
pub use types::{
    AcousticEmbedding, ConditionedMemory, ContextEmbedding, EncoderOutput, MelSpectrogram,
    ACOUSTIC_DIM, CONDITION_DIM, CONTEXT_DIM, ENCODER_DIM, FRAME_PERIOD_US, MEL_DIM,
    REF_EMBED_DIM, WINDOW_MS,
};
pub use weights::{tensor_specs, ModelWeights};
