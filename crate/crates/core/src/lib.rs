//! Phrase-parallel text-to-speech inference.
//!
//! Text is split into intonation phrases by a linear-chain CRF, every phrase
//! is rendered to phonemes and synthesized into an 80-band mel-spectrogram by
//! a conditional encoder/attention-decoder network, and the phrases run
//! concurrently on a worker pool. Each phrase decode is conditioned on a
//! context embedding built from its neighbouring phrases and on an acoustic
//! embedding built from a reference mel-spectrogram, which keeps prosody and
//! speaking style coherent across phrase boundaries.
//!
//! Module map:
//!
//! * [`frontend`] tokenization, CRF feature extraction, phrase segmentation, G2P
//! * [`crf`] the `{O, L3}` boundary CRF: scoring, inference, decoding, training
//! * [`nn`] deterministic f32 kernels used by the acoustic model
//! * [`acoustic`] encoder, reference encoders, token attention, decoder, weight files
//! * [`scheduler`] sliding windows, parallel/sequential/baseline synthesis, benchmark

pub mod acoustic;
pub mod crf;
pub mod error;
pub mod frontend;
pub mod nn;
pub mod scheduler;

pub use error::{Error, Result};
