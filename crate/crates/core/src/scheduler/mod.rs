//! Phrase windows, parallel and baseline synthesis, and the latency benchmark.

mod bench;
mod synth;
mod windows;

pub use bench::{benchmark, synthetic_sentence_text, BenchConfig, BenchmarkReport, BenchmarkRow, Mode};
pub use synth::{
    prepare_sentence, synthesize_sentence_ar_baseline, synthesize_sentence_parallel,
    synthesize_sentence_sequential, EncoderCache, FrameLimit, PhraseReport, PreparedSentence,
    Resources, SentenceSynthesis, SynthOptions, WorkerPool,
};
pub use windows::{build_windows, PhraseWindow, SlidingWindowConfig};
