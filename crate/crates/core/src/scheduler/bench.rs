use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use super::synth::{
    synthesize_sentence_ar_baseline, synthesize_sentence_parallel, FrameLimit, Resources,
    SynthOptions, WorkerPool,
};
use crate::acoustic::{MelSpectrogram, ModelWeights};
use crate::crf::{CrfModel, Label};
use crate::frontend::{is_punctuation, tokenize, Frontend, Lexicon};
use crate::nn::SeededRng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Mode {
    ArBaseline,
    Parallel,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::ArBaseline => "ar-baseline",
            Mode::Parallel => "parallel",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    /// Phrase counts, one group each.
    pub groups: Vec<usize>,
    pub sentences_per_group: usize,
    pub repeats: usize,
    pub workers: usize,
    /// Every decode runs exactly this many frames per phoneme; the stop
    /// token is ignored so both modes emit the same number of frames.
    pub frames_per_phoneme: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            groups: vec![5, 10, 20, 40],
            sentences_per_group: 1,
            repeats: 2,
            workers: 8,
            frames_per_phoneme: 4,
            seed: 2019,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub phrase_count: usize,
    pub mode: Mode,
    pub mean_ms: f64,
    pub std_ms: f64,
    pub speedup: f64,
    /// Mean phonemes per phrase over the group's sentences.
    pub phonemes_per_phrase: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchmarkRow>,
}

impl BenchmarkReport {
    pub const CSV_HEADER: &'static str = "phrase_count,mode,mean_ms,std_ms,speedup";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{:.3},{:.3},{:.4}",
                r.phrase_count,
                r.mode.as_str(),
                r.mean_ms,
                r.std_ms,
                r.speedup
            );
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }

    /// Parallel-mode speedups in group order.
    pub fn speedups(&self) -> Vec<(usize, f64)> {
        self.rows
            .iter()
            .filter(|r| r.mode == Mode::Parallel)
            .map(|r| (r.phrase_count, r.speedup))
            .collect()
    }
}

const PHRASE_PHONEMES: std::ops::RangeInclusive<usize> = 12..=18;

/// Random sentence text of `phrases` phrases, each 12 to 18 phonemes long,
/// joined by "，" and closed by "。".
pub fn synthetic_sentence_text(lexicon: &Lexicon, phrases: usize, rng: &mut SeededRng) -> Result<String> {
    let words: Vec<(&str, usize)> = lexicon
        .entries()
        .filter(|(w, e)| !w.chars().any(is_punctuation) && !e.phonemes.is_empty())
        .map(|(w, e)| (w.as_str(), e.phonemes.len()))
        .filter(|&(_, n)| n <= *PHRASE_PHONEMES.end())
        .collect();
    if words.is_empty() || phrases == 0 {
        return Err(Error::InvalidArgument("no usable words or zero phrases".into()));
    }
    let span = PHRASE_PHONEMES.end() - PHRASE_PHONEMES.start() + 1;
    let mut text = String::new();
    for p in 0..phrases {
        let target = PHRASE_PHONEMES.start() + rng.below(span);
        let phrase = loop {
            let mut s = String::new();
            let mut count = 0;
            while count < target {
                let (w, n) = words[rng.below(words.len())];
                s.push_str(w);
                count += n;
            }
            if PHRASE_PHONEMES.contains(&count) {
                break s;
            }
        };
        text.push_str(&phrase);
        text.push(if p + 1 == phrases { '。' } else { '，' });
    }
    Ok(text)
}

/// Boundary model that places L3 exactly at punctuation.
fn punctuation_crf() -> CrfModel {
    let mut crf = CrfModel::new();
    crf.set_weight("punct=1", Label::L3, 10.0);
    crf.set_weight("punct=0", Label::L3, -10.0);
    crf
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Times the sentence-level baseline against phrase-parallel synthesis on
/// synthetic sentences grouped by phrase count.
pub fn benchmark(config: &BenchConfig, frontend: &Frontend, weights: &ModelWeights) -> Result<BenchmarkReport> {
    if config.groups.is_empty() || config.groups.contains(&0) {
        return Err(Error::InvalidArgument("groups must be non-empty phrase counts >= 1".into()));
    }
    if config.sentences_per_group == 0 || config.repeats == 0 || config.frames_per_phoneme == 0 {
        return Err(Error::InvalidArgument(
            "sentences, repeats and frames per phoneme must be >= 1".into(),
        ));
    }
    let crf = punctuation_crf();
    let reference = MelSpectrogram::synthetic(80, config.seed);
    let res = Resources { frontend, crf: &crf, weights, reference_mel: &reference };
    let opts = SynthOptions {
        frame_limit: FrameLimit::PerPhoneme(config.frames_per_phoneme),
        stop_threshold: 1.0,
        prenet_dropout: None,
    };
    let pool = WorkerPool::new(config.workers)?;
    let mut rng = SeededRng::for_name(config.seed, "benchmark_sentences");

    let mut report = BenchmarkReport::default();
    for &count in &config.groups {
        let mut base_ms = Vec::new();
        let mut par_ms = Vec::new();
        let mut phonemes = 0usize;
        for _ in 0..config.sentences_per_group {
            let text = synthetic_sentence_text(&frontend.lexicon, count, &mut rng)?;
            let sentence = tokenize(&text, &frontend.lexicon)?;
            let mut sentence_phonemes = 0;
            for _ in 0..config.repeats {
                let t = Instant::now();
                let base = synthesize_sentence_ar_baseline(&sentence, &res, &opts)?;
                base_ms.push(t.elapsed().as_secs_f64() * 1e3);
                let t = Instant::now();
                let par = synthesize_sentence_parallel(&sentence, &res, &opts, &pool)?;
                par_ms.push(t.elapsed().as_secs_f64() * 1e3);
                if par.phrases.len() != count || par.mel.frame_count() != base.mel.frame_count() {
                    return Err(Error::InvalidArgument(format!(
                        "benchmark sentence split into {} phrases, expected {count}",
                        par.phrases.len()
                    )));
                }
                sentence_phonemes = base.phrases[0].phonemes;
            }
            phonemes += sentence_phonemes;
        }
        let per_phrase = phonemes as f64 / (count * config.sentences_per_group) as f64;
        let (bm, bs) = mean_std(&base_ms);
        let (pm, ps) = mean_std(&par_ms);
        for (mode, mean_ms, std_ms) in [(Mode::ArBaseline, bm, bs), (Mode::Parallel, pm, ps)] {
            report.rows.push(BenchmarkRow {
                phrase_count: count,
                mode,
                mean_ms,
                std_ms,
                speedup: bm / mean_ms,
                phonemes_per_phrase: per_phrase,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acoustic::ModelConfig;
    use crate::frontend::segment_phrases;

    #[test]
    fn synthetic_phrases_have_target_lengths() {
        let fe = Frontend::bundled();
        let mut rng = SeededRng::new(5);
        let crf = punctuation_crf();
        let mut total = 0;
        let mut n = 0;
        for phrases in [1, 3, 7] {
            let text = synthetic_sentence_text(&fe.lexicon, phrases, &mut rng).unwrap();
            let s = tokenize(&text, &fe.lexicon).unwrap();
            let spans = segment_phrases(&s, &crf).unwrap();
            assert_eq!(spans.len(), phrases);
            for p in &spans {
                let ph = crate::frontend::g2p(p, &s, &fe.lexicon, &fe.inventory).unwrap();
                assert!(PHRASE_PHONEMES.contains(&ph.len()), "{}", ph.len());
                total += ph.len();
                n += 1;
            }
        }
        let mean = total as f64 / n as f64;
        assert!((13.0..=17.0).contains(&mean));
    }

    #[test]
    fn synthetic_text_is_seeded() {
        let fe = Frontend::bundled();
        let a = synthetic_sentence_text(&fe.lexicon, 4, &mut SeededRng::new(1)).unwrap();
        let b = synthetic_sentence_text(&fe.lexicon, 4, &mut SeededRng::new(1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn report_shape_and_csv() {
        let fe = Frontend::bundled();
        let w = ModelWeights::generate(ModelConfig::small(fe.inventory.len()), 1);
        let cfg = BenchConfig {
            groups: vec![1, 2],
            sentences_per_group: 1,
            repeats: 1,
            workers: 2,
            frames_per_phoneme: 1,
            seed: 3,
        };
        let r = benchmark(&cfg, &fe, &w).unwrap();
        assert_eq!(r.rows.len(), 4);
        assert!(r.rows.iter().all(|row| row.mean_ms > 0.0));
        assert_eq!(r.rows[0].speedup, 1.0);
        let csv = r.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], BenchmarkReport::CSV_HEADER);
        assert_eq!(lines.len(), 5);
        assert!(lines[2].starts_with("1,parallel,"));
        assert_eq!(r.speedups().len(), 2);
    }

    #[test]
    fn rejects_bad_config() {
        let fe = Frontend::bundled();
        let w = ModelWeights::generate(ModelConfig::small(fe.inventory.len()), 1);
        let cfg = BenchConfig { groups: vec![], ..BenchConfig::default() };
        assert!(benchmark(&cfg, &fe, &w).is_err());
        let cfg = BenchConfig { repeats: 0, ..BenchConfig::default() };
        assert!(benchmark(&cfg, &fe, &w).is_err());
    }

    #[test]
    fn mean_and_sample_std() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-12);
        assert_eq!(mean_std(&[4.0]), (4.0, 0.0));
    }
}
