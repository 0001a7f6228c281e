use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::windows::{build_windows, PhraseWindow, SlidingWindowConfig};
use crate::acoustic::{
    acoustic_embed, condition_concat, context_embed, decode_mel, encode_phrase, AcousticEmbedding,
    DecodeLimits, EncoderOutput, MelSpectrogram, ModelWeights, StopReason,
};
use crate::crf::CrfModel;
use crate::frontend::{g2p, segment_phrases, Frontend, PhonemeSequence, Phrase, Sentence};
use crate::{Error, Result};

/// Decode length cap for one synthesis unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameLimit {
    /// `n` frames per input phoneme.
    PerPhoneme(usize),
    Absolute(usize),
}

impl Default for FrameLimit {
    fn default() -> Self {
        FrameLimit::PerPhoneme(30)
    }
}

impl FrameLimit {
    pub fn frames_for(self, phonemes: usize) -> usize {
        match self {
            FrameLimit::PerPhoneme(n) => n.saturating_mul(phonemes),
            FrameLimit::Absolute(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    pub frame_limit: FrameLimit,
    pub stop_threshold: f32,
    /// Seed for prenet dropout; `None` runs the prenet deterministically without dropout.
    pub prenet_dropout: Option<u64>,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            frame_limit: FrameLimit::default(),
            stop_threshold: 0.5,
            prenet_dropout: None,
        }
    }
}

impl SynthOptions {
    fn limits(&self, phonemes: usize) -> DecodeLimits {
        DecodeLimits {
            max_frames: self.frame_limit.frames_for(phonemes).max(1),
            stop_threshold: self.stop_threshold,
            prenet_dropout: self.prenet_dropout,
            record_alignments: false,
        }
    }
}

/// Read-only inputs shared by every synthesis call.
#[derive(Clone, Copy)]
pub struct Resources<'a> {
    pub frontend: &'a Frontend,
    pub crf: &'a CrfModel,
    pub weights: &'a ModelWeights,
    pub reference_mel: &'a MelSpectrogram,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PhraseReport {
    pub index: usize,
    pub tokens: (usize, usize),
    pub phonemes: usize,
    pub frames: usize,
    pub stopped_by: StopReason,
    #[serde(serialize_with = "as_millis")]
    pub elapsed: Duration,
}

fn as_millis<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1e3)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentenceSynthesis {
    pub mel: MelSpectrogram,
    pub phrases: Vec<PhraseReport>,
    pub elapsed: Duration,
}

impl SentenceSynthesis {
    /// Phrases that hit the frame cap instead of emitting a stop token.
    pub fn frame_limited(&self) -> impl Iterator<Item = &PhraseReport> {
        self.phrases.iter().filter(|p| p.stopped_by == StopReason::FrameLimit)
    }
}

/// Phrase encodings of one sentence, filled once before decoding starts.
#[derive(Debug, Default)]
pub struct EncoderCache {
    entries: BTreeMap<usize, EncoderOutput>,
    encodes: usize,
}

impl EncoderCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_encode(
        &mut self,
        index: usize,
        phonemes: &PhonemeSequence,
        weights: &ModelWeights,
    ) -> Result<&EncoderOutput> {
        if !self.entries.contains_key(&index) {
            let enc = encode_phrase(phonemes, weights)?;
            self.encodes += 1;
            self.entries.insert(index, enc);
        }
        Ok(&self.entries[&index])
    }

    pub fn get(&self, index: usize) -> Option<&EncoderOutput> {
        self.entries.get(&index)
    }

    /// Number of `encode_phrase` calls made through this cache.
    pub fn encode_count(&self) -> usize {
        self.encodes
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Fixed-size pool that phrase tasks run on.
pub struct WorkerPool {
    pool: rayon::ThreadPool,
}

impl WorkerPool {
    pub fn new(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::InvalidArgument("worker count must be >= 1".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .thread_name(|i| format!("phrase-worker-{i}"))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
        Ok(WorkerPool { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }
}

/// Everything the per-phrase tasks read: phoneme inputs, cached encodings
/// and the sentence's acoustic embedding.
pub struct PreparedSentence {
    pub phrases: Vec<Phrase>,
    pub phonemes: Vec<PhonemeSequence>,
    pub windows: Vec<PhraseWindow>,
    pub cache: EncoderCache,
    pub acoustic: AcousticEmbedding,
}

/// Serial prepass: segment, convert to phonemes, encode every phrase once
/// and embed the reference mel.
pub fn prepare_sentence(sentence: &Sentence, res: &Resources<'_>) -> Result<PreparedSentence> {
    let phrases = segment_phrases(sentence, res.crf)?;
    let phonemes = phrases
        .iter()
        .map(|p| g2p(p, sentence, &res.frontend.lexicon, &res.frontend.inventory))
        .collect::<Result<Vec<_>>>()?;
    let windows = build_windows(phrases.len(), &SlidingWindowConfig::INFERENCE)?;
    let mut cache = EncoderCache::new();
    for (i, ph) in phonemes.iter().enumerate() {
        cache.get_or_encode(i, ph, res.weights)?;
    }
    let acoustic = acoustic_embed(res.reference_mel, res.weights)?;
    Ok(PreparedSentence { phrases, phonemes, windows, cache, acoustic })
}

fn phrase_task(
    prep: &PreparedSentence,
    index: usize,
    res: &Resources<'_>,
    opts: &SynthOptions,
) -> Result<(MelSpectrogram, PhraseReport)> {
    let start = Instant::now();
    let window = &prep.windows[index];
    let prev = window.prev.last().and_then(|&j| prep.cache.get(j));
    let next = window.next.first().and_then(|&j| prep.cache.get(j));
    let current = prep
        .cache
        .get(index)
        .ok_or_else(|| Error::InvalidArgument(format!("phrase {index} missing from encoder cache")))?;
    let ctx = context_embed(prev, next, res.weights)?;
    let memory = condition_concat(current, &ctx, &prep.acoustic)?;
    let phonemes = prep.phonemes[index].len();
    let out = decode_mel(&memory, res.weights, &opts.limits(phonemes))?;
    let phrase = &prep.phrases[index];
    let report = PhraseReport {
        index,
        tokens: (phrase.start, phrase.end),
        phonemes,
        frames: out.steps,
        stopped_by: out.stopped_by,
        elapsed: start.elapsed(),
    };
    Ok((out.mel, report))
}

fn assemble(parts: Vec<(MelSpectrogram, PhraseReport)>, start: Instant) -> Result<SentenceSynthesis> {
    let (mels, phrases): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
    Ok(SentenceSynthesis {
        mel: MelSpectrogram::concat(&mels)?,
        phrases,
        elapsed: start.elapsed(),
    })
}

/// Phrase-parallel synthesis: one decode task per phrase on `pool`, results
/// concatenated in phrase order. The output does not depend on the pool size.
pub fn synthesize_sentence_parallel(
    sentence: &Sentence,
    res: &Resources<'_>,
    opts: &SynthOptions,
    pool: &WorkerPool,
) -> Result<SentenceSynthesis> {
    let start = Instant::now();
    let prep = prepare_sentence(sentence, res)?;
    let parts = pool.pool.install(|| {
        (0..prep.phrases.len())
            .into_par_iter()
            .map(|i| phrase_task(&prep, i, res, opts))
            .collect::<Result<Vec<_>>>()
    })?;
    assemble(parts, start)
}

/// The same pipeline as [`synthesize_sentence_parallel`], one phrase after another
/// on the calling thread.
pub fn synthesize_sentence_sequential(
    sentence: &Sentence,
    res: &Resources<'_>,
    opts: &SynthOptions,
) -> Result<SentenceSynthesis> {
    let start = Instant::now();
    let prep = prepare_sentence(sentence, res)?;
    let parts = (0..prep.phrases.len())
        .map(|i| phrase_task(&prep, i, res, opts))
        .collect::<Result<Vec<_>>>()?;
    assemble(parts, start)
}

/// Sentence-level autoregressive baseline: the whole sentence is one unit
/// with no neighbours and a single decode over all its phonemes.
pub fn synthesize_sentence_ar_baseline(
    sentence: &Sentence,
    res: &Resources<'_>,
    opts: &SynthOptions,
) -> Result<SentenceSynthesis> {
    let start = Instant::now();
    if sentence.is_empty() {
        return Err(Error::EmptyInput);
    }
    let whole = Phrase {
        start: 0,
        end: sentence.len(),
        index_in_sentence: 0,
        total_in_sentence: 1,
    };
    let phonemes = g2p(&whole, sentence, &res.frontend.lexicon, &res.frontend.inventory)?;
    let mut cache = EncoderCache::new();
    cache.get_or_encode(0, &phonemes, res.weights)?;
    let prep = PreparedSentence {
        phrases: vec![whole],
        phonemes: vec![phonemes],
        windows: build_windows(1, &SlidingWindowConfig::INFERENCE)?,
        cache,
        acoustic: acoustic_embed(res.reference_mel, res.weights)?,
    };
    let part = phrase_task(&prep, 0, res, opts)?;
    assemble(vec![part], start)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acoustic::ModelConfig;
    use crate::frontend::tokenize;

    fn punct_crf() -> CrfModel {
        let mut crf = CrfModel::new();
        crf.set_weight("punct=1", crate::crf::Label::L3, 10.0);
        crf.set_weight("punct=0", crate::crf::Label::L3, -1.0);
        crf
    }

    struct Fixture {
        frontend: Frontend,
        crf: CrfModel,
        weights: ModelWeights,
        mel: MelSpectrogram,
    }

    impl Fixture {
        fn new() -> Self {
            let frontend = Frontend::bundled();
            let weights = ModelWeights::generate(ModelConfig::small(frontend.inventory.len()), 7);
            Fixture { frontend, crf: punct_crf(), weights, mel: MelSpectrogram::synthetic(20, 3) }
        }

        fn res(&self) -> Resources<'_> {
            Resources { frontend: &self.frontend, crf: &self.crf, weights: &self.weights, reference_mel: &self.mel }
        }

        fn sentence(&self, text: &str) -> Sentence {
            tokenize(text, &self.frontend.lexicon).unwrap()
        }
    }

    fn opts() -> SynthOptions {
        SynthOptions { frame_limit: FrameLimit::PerPhoneme(2), stop_threshold: 1.0, prenet_dropout: None }
    }

    fn sample_text(f: &Fixture) -> String {
        let words: Vec<&String> = f.frontend.lexicon.entries().map(|(w, _)| w).take(6).collect();
        format!("{}{}，{}，{}{}。", words[0], words[1], words[2], words[3], words[4])
    }

    #[test]
    fn parallel_matches_sequential() {
        let f = Fixture::new();
        let s = f.sentence(&sample_text(&f));
        let seq = synthesize_sentence_sequential(&s, &f.res(), &opts()).unwrap();
        assert_eq!(seq.phrases.len(), 3);
        for workers in [1, 2, 3] {
            let pool = WorkerPool::new(workers).unwrap();
            let par = synthesize_sentence_parallel(&s, &f.res(), &opts(), &pool).unwrap();
            assert_eq!(par.mel, seq.mel);
        }
        let total: usize = seq.phrases.iter().map(|p| p.frames).sum();
        assert_eq!(seq.mel.frame_count(), total);
        assert!(seq.phrases.iter().all(|p| p.frames == 2 * p.phonemes));
        assert_eq!(seq.frame_limited().count(), 3);
    }

    #[test]
    fn single_phrase_baseline_equals_parallel() {
        let f = Fixture::new();
        let word = f.frontend.lexicon.entries().next().unwrap().0.clone();
        let s = f.sentence(&word);
        let pool = WorkerPool::new(2).unwrap();
        let par = synthesize_sentence_parallel(&s, &f.res(), &opts(), &pool).unwrap();
        let base = synthesize_sentence_ar_baseline(&s, &f.res(), &opts()).unwrap();
        assert_eq!(par.mel, base.mel);
        assert_eq!(base.mel.frames().dim(1), 80);
    }

    #[test]
    fn baseline_steps_grow_with_phonemes() {
        let f = Fixture::new();
        let text = sample_text(&f);
        let short = f.sentence(&text[..text.find('，').unwrap()]);
        let long = f.sentence(&text);
        let a = synthesize_sentence_ar_baseline(&short, &f.res(), &opts()).unwrap();
        let b = synthesize_sentence_ar_baseline(&long, &f.res(), &opts()).unwrap();
        assert_eq!(b.phrases.len(), 1);
        assert!(b.phrases[0].phonemes > a.phrases[0].phonemes);
        assert!(b.mel.frame_count() > a.mel.frame_count());
    }

    #[test]
    fn cache_matches_fresh_encoding_and_encodes_once() {
        let f = Fixture::new();
        let s = f.sentence(&sample_text(&f));
        let prep = prepare_sentence(&s, &f.res()).unwrap();
        assert_eq!(prep.cache.encode_count(), prep.phrases.len());
        for (i, ph) in prep.phonemes.iter().enumerate() {
            assert_eq!(prep.cache.get(i).unwrap(), &encode_phrase(ph, &f.weights).unwrap());
        }
        let mut cache = EncoderCache::new();
        cache.get_or_encode(0, &prep.phonemes[0], &f.weights).unwrap();
        cache.get_or_encode(0, &prep.phonemes[0], &f.weights).unwrap();
        assert_eq!(cache.encode_count(), 1);
    }

    #[test]
    fn wall_time_bounded_by_longest_phrase() {
        let f = Fixture::new();
        let s = f.sentence(&sample_text(&f));
        let pool = WorkerPool::new(8).unwrap();
        let out = synthesize_sentence_parallel(&s, &f.res(), &opts(), &pool).unwrap();
        let longest = out.phrases.iter().map(|p| p.elapsed).max().unwrap();
        assert!(out.elapsed >= longest);
    }

    #[test]
    fn zero_workers_rejected() {
        assert!(WorkerPool::new(0).is_err());
    }

    #[test]
    fn frame_limits() {
        assert_eq!(FrameLimit::PerPhoneme(3).frames_for(5), 15);
        assert_eq!(FrameLimit::Absolute(7).frames_for(5), 7);
    }
}
