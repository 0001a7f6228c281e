use std::collections::HashMap;

use super::{CrfModel, Label};
use crate::frontend::{dynamic_feature, static_features, Sentence, DIST_CAP};
use crate::{Error, Result};

/// How the words-since-previous-L3 feature is supplied to a linear-chain pass.
#[derive(Debug, Clone, Copy)]
pub enum History<'a> {
    /// The dynamic feature is left out entirely.
    Disabled,
    /// Per-position values, e.g. derived from gold labels during training.
    Fixed(&'a [usize]),
}

/// Static feature keys of every position of one sentence.
#[derive(Debug, Clone)]
pub struct SentenceFeatures {
    keys: Vec<Vec<String>>,
}

impl SentenceFeatures {
    pub fn new(sentence: &Sentence) -> Self {
        SentenceFeatures {
            keys: (0..sentence.len())
                .map(|i| static_features(sentence, i))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self, position: usize) -> &[String] {
        &self.keys[position]
    }

    /// Per-label emission score at `position`, static features first.
    pub fn emission(&self, model: &CrfModel, position: usize, history: Option<usize>) -> [f64; 2] {
        let mut e = [0.0; 2];
        for key in &self.keys[position] {
            if let Some(w) = model.weights_of(key) {
                e[0] += w[0];
                e[1] += w[1];
            }
        }
        if let Some(ws) = history {
            if let Some(w) = model.weights_of(&dynamic_feature(ws)) {
                e[0] += w[0];
                e[1] += w[1];
            }
        }
        e
    }

    pub(crate) fn emissions(&self, model: &CrfModel, history: History<'_>) -> Vec<[f64; 2]> {
        (0..self.len())
            .map(|i| match history {
                History::Disabled => self.emission(model, i, None),
                History::Fixed(h) => self.emission(model, i, Some(h[i])),
            })
            .collect()
    }
}

/// Words since the previous L3 at every position implied by `labels`
/// (0 at the sentence start and right after an L3).
pub fn implied_history(labels: &[Label]) -> Vec<usize> {
    let mut out = Vec::with_capacity(labels.len());
    let mut ws = 0;
    for &l in labels {
        out.push(ws);
        ws = if l == Label::L3 { 0 } else { ws + 1 };
    }
    out
}

#[inline]
fn step_score(model: &CrfModel, emit: &[f64; 2], prev: Option<Label>, label: Label) -> f64 {
    match prev {
        Some(p) => emit[label.index()] + model.transition[p.index()][label.index()],
        None => emit[label.index()],
    }
}

fn check_len(sentence: &Sentence, labels: &[Label]) -> Result<()> {
    if sentence.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} labels for {} tokens",
            labels.len(),
            sentence.len()
        )));
    }
    Ok(())
}

fn score_with(model: &CrfModel, emissions: &[[f64; 2]], labels: &[Label]) -> f64 {
    let mut total = 0.0;
    let mut prev = None;
    for (emit, &label) in emissions.iter().zip(labels) {
        total += step_score(model, emit, prev, label);
        prev = Some(label);
    }
    total
}

/// Log-potential of `labels`, with the dynamic feature taken from the
/// history the labels themselves imply.
pub fn sequence_score(model: &CrfModel, sentence: &Sentence, labels: &[Label]) -> Result<f64> {
    check_len(sentence, labels)?;
    let feats = SentenceFeatures::new(sentence);
    let history = implied_history(labels);
    let emissions = feats.emissions(model, History::Fixed(&history));
    Ok(score_with(model, &emissions, labels))
}

/// Log-potential of `labels` under a fixed (or disabled) dynamic history.
pub fn static_sequence_score(
    model: &CrfModel,
    sentence: &Sentence,
    labels: &[Label],
    history: History<'_>,
) -> Result<f64> {
    check_len(sentence, labels)?;
    let emissions = SentenceFeatures::new(sentence).emissions(model, history);
    Ok(score_with(model, &emissions, labels))
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

#[derive(Debug, Clone)]
pub struct ForwardBackward {
    pub log_partition: f64,
    /// `marginals[i][label]`.
    pub marginals: Vec<[f64; 2]>,
    /// `pair_marginals[i][from][to]` for positions `i >= 1` (index 0 unused).
    pub pair_marginals: Vec<[[f64; 2]; 2]>,
}

pub(crate) fn forward_backward_emissions(model: &CrfModel, emissions: &[[f64; 2]]) -> ForwardBackward {
    let n = emissions.len();
    let t = &model.transition;
    let mut alpha = vec![[0.0f64; 2]; n];
    let mut beta = vec![[0.0f64; 2]; n];
    alpha[0] = emissions[0];
    for i in 1..n {
        for y in 0..2 {
            alpha[i][y] =
                log_sum_exp(alpha[i - 1][0] + t[0][y], alpha[i - 1][1] + t[1][y]) + emissions[i][y];
        }
    }
    for i in (0..n - 1).rev() {
        for y in 0..2 {
            beta[i][y] = log_sum_exp(
                t[y][0] + emissions[i + 1][0] + beta[i + 1][0],
                t[y][1] + emissions[i + 1][1] + beta[i + 1][1],
            );
        }
    }
    let log_partition = log_sum_exp(alpha[n - 1][0], alpha[n - 1][1]);
    let marginals = (0..n)
        .map(|i| {
            let m0 = (alpha[i][0] + beta[i][0] - log_partition).exp();
            let m1 = (alpha[i][1] + beta[i][1] - log_partition).exp();
            [m0, m1]
        })
        .collect();
    let mut pair_marginals = vec![[[0.0; 2]; 2]; n];
    for i in 1..n {
        for a in 0..2 {
            for b in 0..2 {
                pair_marginals[i][a][b] = (alpha[i - 1][a] + t[a][b] + emissions[i][b] + beta[i][b]
                    - log_partition)
                    .exp();
            }
        }
    }
    ForwardBackward {
        log_partition,
        marginals,
        pair_marginals,
    }
}

/// Log partition function and per-position marginals, exact for a fixed history.
pub fn forward_backward(
    model: &CrfModel,
    sentence: &Sentence,
    history: History<'_>,
) -> Result<ForwardBackward> {
    if sentence.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let History::Fixed(h) = history {
        if h.len() != sentence.len() {
            return Err(Error::InvalidArgument("history length mismatch".into()));
        }
    }
    let emissions = SentenceFeatures::new(sentence).emissions(model, history);
    Ok(forward_backward_emissions(model, &emissions))
}

/// Exact argmax with the dynamic feature disabled. Ties prefer `O`.
pub fn viterbi_decode(model: &CrfModel, sentence: &Sentence) -> Result<Vec<Label>> {
    let n = sentence.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let emissions = SentenceFeatures::new(sentence).emissions(model, History::Disabled);
    let mut delta = vec![[0.0f64; 2]; n];
    let mut back = vec![[Label::O; 2]; n];
    for y in Label::ALL {
        delta[0][y.index()] = step_score(model, &emissions[0], None, y);
    }
    for i in 1..n {
        for y in Label::ALL {
            let mut best = f64::NEG_INFINITY;
            let mut arg = Label::O;
            for p in Label::ALL {
                let s = delta[i - 1][p.index()] + step_score(model, &emissions[i], Some(p), y);
                if s > best {
                    best = s;
                    arg = p;
                }
            }
            delta[i][y.index()] = best;
            back[i][y.index()] = arg;
        }
    }
    let mut last = if delta[n - 1][1] > delta[n - 1][0] {
        Label::L3
    } else {
        Label::O
    };
    let mut labels = vec![Label::O; n];
    for i in (0..n).rev() {
        labels[i] = last;
        last = back[i][last.index()];
    }
    Ok(labels)
}

/// One partial labelling in the dynamic-feature beam.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamHypothesis {
    pub labels: Vec<Label>,
    pub score: f64,
    pub words_since_l3: usize,
}

/// Beam search where each hypothesis feeds its own words-since-L3 count into
/// the dynamic feature.
///
/// Hypotheses whose futures score identically (same last label and, when the
/// model has dynamic weights, same capped history bucket) are merged and only
/// the best is kept, so with zero dynamic weights any width >= 2 is exact.
pub fn beam_decode_dynamic(
    model: &CrfModel,
    sentence: &Sentence,
    beam_width: usize,
) -> Result<Vec<Label>> {
    Ok(beam_search(model, sentence, beam_width)?.labels)
}

/// Locally best label at every step given the labels chosen so far.
pub fn greedy_decode(model: &CrfModel, sentence: &Sentence) -> Result<Vec<Label>> {
    beam_decode_dynamic(model, sentence, 1)
}

pub(crate) fn beam_search(
    model: &CrfModel,
    sentence: &Sentence,
    beam_width: usize,
) -> Result<BeamHypothesis> {
    if beam_width == 0 {
        return Err(Error::InvalidArgument("beam width must be >= 1".into()));
    }
    if sentence.is_empty() {
        return Err(Error::EmptyInput);
    }
    let feats = SentenceFeatures::new(sentence);
    let dynamic = model.has_dynamic_weights();
    let mut beam = vec![BeamHypothesis {
        labels: Vec::with_capacity(sentence.len()),
        score: 0.0,
        words_since_l3: 0,
    }];
    for i in 0..sentence.len() {
        let mut emit_cache: HashMap<usize, [f64; 2]> = HashMap::new();
        let mut next: Vec<BeamHypothesis> = Vec::with_capacity(beam.len() * 2);
        let mut slot: HashMap<(Label, usize), usize> = HashMap::new();
        for hyp in &beam {
            let b = hyp.words_since_l3.min(DIST_CAP);
            let emit = *emit_cache
                .entry(b)
                .or_insert_with(|| feats.emission(model, i, Some(b)));
            let prev = hyp.labels.last().copied();
            for y in Label::ALL {
                let score = hyp.score + step_score(model, &emit, prev, y);
                let ws = if y == Label::L3 { 0 } else { hyp.words_since_l3 + 1 };
                let key = (y, if dynamic { ws.min(DIST_CAP) } else { 0 });
                match slot.get(&key) {
                    Some(&j) if next[j].score >= score => {}
                    Some(&j) => {
                        next[j].labels.clone_from(&hyp.labels);
                        next[j].labels.push(y);
                        next[j].score = score;
                        next[j].words_since_l3 = ws;
                    }
                    None => {
                        let mut labels = hyp.labels.clone();
                        labels.push(y);
                        slot.insert(key, next.len());
                        next.push(BeamHypothesis {
                            labels,
                            score,
                            words_since_l3: ws,
                        });
                    }
                }
            }
        }
        // stable: equal scores keep expansion order (O before L3)
        next.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap_or(std::cmp::Ordering::Equal));
        next.truncate(beam_width);
        beam = next;
    }
    Ok(beam.swap_remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::Token;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use Label::{L3, O};

    fn all_labelings(n: usize) -> Vec<Vec<Label>> {
        (0..1u32 << n)
            .map(|m| (0..n).map(|i| if m >> i & 1 == 1 { L3 } else { O }).collect())
            .collect()
    }

    fn toy_sentence(n: usize, rng: &mut ChaCha8Rng) -> Sentence {
        Sentence::new(
            (0..n)
                .map(|_| {
                    let w = ["a", "b", "c"][rng.gen_range(0..3)];
                    Token::new(w, ["n", "v"][rng.gen_range(0..2)], rng.gen_range(1..3), rng.gen_bool(0.3))
                })
                .collect(),
        )
    }

    fn random_model(sentence: &Sentence, rng: &mut ChaCha8Rng) -> CrfModel {
        let mut m = CrfModel::new();
        for i in 0..sentence.len() {
            for k in static_features(sentence, i) {
                m.set_weights(&k, [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
            }
        }
        for ws in 0..=DIST_CAP {
            m.set_weights(&dynamic_feature(ws), [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
        }
        for a in 0..2 {
            for b in 0..2 {
                m.transition[a][b] = rng.gen_range(-1.0..1.0);
            }
        }
        m
    }

    #[test]
    fn zero_model_scores_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = toy_sentence(4, &mut rng);
        let m = CrfModel::new();
        for labels in all_labelings(4) {
            assert_eq!(sequence_score(&m, &s, &labels).unwrap(), 0.0);
        }
    }

    #[test]
    fn single_active_feature() {
        let s = Sentence::new(vec![Token::new("x", "N", 1, false)]);
        let mut m = CrfModel::new();
        m.set_weight("pos=N", L3, 2.0);
        assert_eq!(sequence_score(&m, &s, &[L3]).unwrap(), 2.0);
        assert_eq!(sequence_score(&m, &s, &[O]).unwrap(), 0.0);
    }

    #[test]
    fn score_matches_hand_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = toy_sentence(4, &mut rng);
        let m = random_model(&s, &mut rng);
        for labels in all_labelings(4) {
            let mut expected = 0.0;
            let mut ws = 0usize;
            for i in 0..4 {
                let y = labels[i].index();
                let mut keys = static_features(&s, i);
                keys.push(format!("dist_prev_L3={}", if ws >= 9 { "9+".to_string() } else { ws.to_string() }));
                let mut here = 0.0;
                for k in keys {
                    here += m.weight(&k, labels[i]);
                }
                if i > 0 {
                    here += m.transition[labels[i - 1].index()][y];
                }
                expected += here;
                ws = if labels[i] == L3 { 0 } else { ws + 1 };
            }
            let got = sequence_score(&m, &s, &labels).unwrap();
            assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        }
    }

    #[test]
    fn zero_model_partition_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..6 {
            let s = toy_sentence(n, &mut rng);
            let fb = forward_backward(&CrfModel::new(), &s, History::Disabled).unwrap();
            assert!((fb.log_partition - n as f64 * 2f64.ln()).abs() < 1e-12);
            for m in fb.marginals {
                assert!((m[0] - 0.5).abs() < 1e-12 && (m[1] - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn partition_and_marginals_match_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 1..=6 {
            let s = toy_sentence(n, &mut rng);
            let m = random_model(&s, &mut rng);
            let hist: Vec<usize> = (0..n).map(|_| rng.gen_range(0..12)).collect();
            let fb = forward_backward(&m, &s, History::Fixed(&hist)).unwrap();
            let scores: Vec<f64> = all_labelings(n)
                .iter()
                .map(|l| static_sequence_score(&m, &s, l, History::Fixed(&hist)).unwrap())
                .collect();
            let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let z = max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
            assert!((fb.log_partition - z).abs() < 1e-8);
            for (i, marg) in fb.marginals.iter().enumerate() {
                assert!((marg[0] + marg[1] - 1.0).abs() < 1e-10);
                let brute: f64 = all_labelings(n)
                    .iter()
                    .zip(&scores)
                    .filter(|(l, _)| l[i] == L3)
                    .map(|(_, s)| (s - z).exp())
                    .sum();
                assert!((marg[1] - brute).abs() < 1e-8);
            }
            for s in scores {
                assert!(fb.log_partition >= s);
            }
        }
    }

    #[test]
    fn viterbi_zero_model_prefers_o() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = toy_sentence(5, &mut rng);
        assert_eq!(viterbi_decode(&CrfModel::new(), &s).unwrap(), vec![O; 5]);
    }

    #[test]
    fn viterbi_dominant_punct_weight() {
        let s = Sentence::new(
            (0..7).map(|i| Token::new("w", "n", 1, i == 1 || i == 4)).collect(),
        );
        let mut m = CrfModel::new();
        m.set_weight("punct=1", L3, 10.0);
        m.set_weight("punct=0", O, 10.0);
        let labels = viterbi_decode(&m, &s).unwrap();
        assert_eq!(labels, [O, L3, O, O, L3, O, O]);
    }

    #[test]
    fn viterbi_beats_random_labelings() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s = toy_sentence(12, &mut rng);
        let m = random_model(&s, &mut rng);
        let best = viterbi_decode(&m, &s).unwrap();
        let best_score = static_sequence_score(&m, &s, &best, History::Disabled).unwrap();
        for _ in 0..1000 {
            let l: Vec<Label> = (0..12).map(|_| if rng.gen_bool(0.5) { L3 } else { O }).collect();
            assert!(best_score >= static_sequence_score(&m, &s, &l, History::Disabled).unwrap());
        }
    }

    #[test]
    fn beam_width_one_is_greedy() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let n = rng.gen_range(1..9);
            let s = toy_sentence(n, &mut rng);
            let m = random_model(&s, &mut rng);
            let feats = SentenceFeatures::new(&s);
            let mut labels = Vec::new();
            let mut ws = 0;
            for i in 0..n {
                let e = feats.emission(&m, i, Some(ws));
                let prev = labels.last().copied();
                let so = step_score(&m, &e, prev, O);
                let sl = step_score(&m, &e, prev, L3);
                let y = if sl > so { L3 } else { O };
                ws = if y == L3 { 0 } else { ws + 1 };
                labels.push(y);
            }
            assert_eq!(greedy_decode(&m, &s).unwrap(), labels);
        }
    }

    #[test]
    fn zero_width_rejected() {
        let s = Sentence::new(vec![Token::new("x", "n", 1, false)]);
        assert!(beam_decode_dynamic(&CrfModel::new(), &s, 0).is_err());
    }

    #[test]
    fn implied_history_resets_after_l3() {
        assert_eq!(implied_history(&[O, O, L3, O, L3, L3]), [0, 1, 2, 0, 1, 0]);
    }
}
