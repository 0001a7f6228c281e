//! Linear-chain CRF over `{O, L3}` for intonation-phrase boundary prediction.
//!
//! The feature set includes one history-dependent feature, the number of
//! words since the previous L3 (see [`crate::frontend::DYNAMIC_PREFIX`]).
//! With it the model is no longer first order, so decoding uses a beam
//! search over label histories ([`beam_decode_dynamic`]) while training
//! freezes the history at the gold labels, which keeps the training objective
//! an ordinary linear-chain likelihood. [`viterbi_decode`] and
//! [`forward_backward`] are exact for the static part of the model.

mod inference;
mod io;
mod model;
mod train;

pub use inference::{
    beam_decode_dynamic, forward_backward, greedy_decode, implied_history, sequence_score,
    static_sequence_score, viterbi_decode, BeamHypothesis, ForwardBackward, History,
    SentenceFeatures,
};
pub use io::{parse_corpus, read_model, write_model, CRF_MAGIC, CRF_VERSION};
pub use model::{CrfModel, Label, TrainingExample};
pub use train::{evaluate, nll_gradient, train_crf, EvalReport, Gradient, TrainConfig, TrainReport};

/// Beam width used by phrase segmentation.
pub const DEFAULT_BEAM_WIDTH: usize = 8;
