use std::collections::BTreeMap;

use super::inference::{forward_backward_emissions, implied_history, History, SentenceFeatures};
use super::{beam_decode_dynamic, CrfModel, Label, TrainingExample, DEFAULT_BEAM_WIDTH};
use crate::frontend::dynamic_feature;
use crate::{Error, Result};

/// Full-batch gradient descent settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub step: f64,
    /// Step multiplier applied every `decay_every` epochs.
    pub decay: f64,
    pub decay_every: usize,
    pub l2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            step: 0.1,
            decay: 0.9,
            decay_every: 20,
            l2: 1e-3,
        }
    }
}

/// Same shape as the model: per-feature per-label entries plus transitions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Gradient {
    pub weights: BTreeMap<String, [f64; 2]>,
    pub transition: [[f64; 2]; 2],
}

#[derive(Debug, Clone, Default)]
pub struct TrainReport {
    /// Regularized mean NLL before each epoch's update.
    pub losses: Vec<f64>,
    /// Unregularized summed NLL of the returned model.
    pub final_nll: f64,
}

struct Prepared<'a> {
    feats: SentenceFeatures,
    history: Vec<usize>,
    gold: &'a [Label],
}

impl<'a> Prepared<'a> {
    fn new(ex: &'a TrainingExample) -> Self {
        Prepared {
            feats: SentenceFeatures::new(&ex.sentence),
            history: implied_history(&ex.gold_labels),
            gold: &ex.gold_labels,
        }
    }
}

fn accumulate(model: &CrfModel, ex: &Prepared<'_>, grad: &mut Gradient) -> f64 {
    let emissions = ex.feats.emissions(model, History::Fixed(&ex.history));
    let fb = forward_backward_emissions(model, &emissions);

    let mut gold_score = 0.0;
    for (i, &y) in ex.gold.iter().enumerate() {
        gold_score += emissions[i][y.index()];
        if i > 0 {
            gold_score += model.transition[ex.gold[i - 1].index()][y.index()];
        }
    }

    for (i, &gold) in ex.gold.iter().enumerate() {
        let marg = fb.marginals[i];
        let mut delta = marg;
        delta[gold.index()] -= 1.0;
        let dynamic = dynamic_feature(ex.history[i]);
        for key in ex.feats.keys(i).iter().chain(std::iter::once(&dynamic)) {
            let g = grad.weights.entry(key.clone()).or_insert([0.0; 2]);
            g[0] += delta[0];
            g[1] += delta[1];
        }
        if i > 0 {
            let prev = ex.gold[i - 1].index();
            for a in 0..2 {
                for b in 0..2 {
                    let empirical = if a == prev && b == gold.index() { 1.0 } else { 0.0 };
                    grad.transition[a][b] += fb.pair_marginals[i][a][b] - empirical;
                }
            }
        }
    }
    fb.log_partition - gold_score
}

/// Summed negative log-likelihood and its gradient (expected minus
/// empirical counts), with the dynamic feature teacher-forced from gold labels.
pub fn nll_gradient(model: &CrfModel, batch: &[TrainingExample]) -> Result<(f64, Gradient)> {
    if batch.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut grad = Gradient::default();
    let mut nll = 0.0;
    for ex in batch {
        nll += accumulate(model, &Prepared::new(ex), &mut grad);
    }
    Ok((nll, grad))
}

fn l2_norm_sq(model: &CrfModel) -> f64 {
    let w: f64 = model.features().flat_map(|(_, w)| w.iter()).map(|v| v * v).sum();
    let t: f64 = model.transition.iter().flatten().map(|v| v * v).sum();
    w + t
}

/// Minimizes `mean NLL + l2/2 * |w|^2` by full-batch gradient descent from
/// zero weights. Deterministic for a given corpus order.
pub fn train_crf(corpus: &[TrainingExample], config: &TrainConfig) -> Result<(CrfModel, TrainReport)> {
    if corpus.is_empty() {
        return Err(Error::EmptyInput);
    }
    let prepared: Vec<Prepared<'_>> = corpus.iter().map(Prepared::new).collect();
    let scale = 1.0 / corpus.len() as f64;

    let mut model = CrfModel::new();
    for ex in &prepared {
        for i in 0..ex.feats.len() {
            for key in ex.feats.keys(i) {
                model.set_weights(key, [0.0; 2]);
            }
            model.set_weights(&dynamic_feature(ex.history[i]), [0.0; 2]);
        }
    }

    let mut report = TrainReport::default();
    for epoch in 0..config.epochs {
        let step = config.step * config.decay.powi((epoch / config.decay_every.max(1)) as i32);
        let mut grad = Gradient::default();
        let mut nll = 0.0;
        for ex in &prepared {
            nll += accumulate(&model, ex, &mut grad);
        }
        let loss = nll * scale + 0.5 * config.l2 * l2_norm_sq(&model);
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        report.losses.push(loss);

        for (key, w) in model.weights_mut() {
            let g = grad.weights.get(key).copied().unwrap_or([0.0; 2]);
            for y in 0..2 {
                w[y] -= step * (g[y] * scale + config.l2 * w[y]);
            }
        }
        for a in 0..2 {
            for b in 0..2 {
                let w = model.transition[a][b];
                model.transition[a][b] -= step * (grad.transition[a][b] * scale + config.l2 * w);
            }
        }
    }
    if !model.is_finite() {
        return Err(Error::NonFiniteLoss { epoch: config.epochs });
    }
    report.final_nll = nll_gradient(&model, corpus)?.0;
    if !report.final_nll.is_finite() {
        return Err(Error::NonFiniteLoss { epoch: config.epochs });
    }
    Ok((model, report))
}

/// Token accuracy and L3 precision / recall / F1 of beam decoding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn evaluate(model: &CrfModel, corpus: &[TrainingExample]) -> Result<EvalReport> {
    let (mut correct, mut total, mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize, 0usize, 0usize);
    for ex in corpus {
        let pred = beam_decode_dynamic(model, &ex.sentence, DEFAULT_BEAM_WIDTH)?;
        for (p, g) in pred.iter().zip(&ex.gold_labels) {
            total += 1;
            correct += usize::from(p == g);
            match (p, g) {
                (Label::L3, Label::L3) => tp += 1,
                (Label::L3, Label::O) => fp += 1,
                (Label::O, Label::L3) => fneg += 1,
                _ => {}
            }
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fneg);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(EvalReport {
        accuracy: ratio(correct, total),
        precision,
        recall,
        f1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crf::parse_corpus;
    use crate::frontend::{static_features, Sentence, Token, BUNDLED_CORPUS};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use Label::{L3, O};

    fn example(spec: &[(&str, bool, Label)]) -> TrainingExample {
        let tokens = spec.iter().map(|&(t, p, _)| Token::new(t, "n", 1, p)).collect();
        TrainingExample::new(Sentence::new(tokens), spec.iter().map(|s| s.2).collect()).unwrap()
    }

    #[test]
    fn uniform_closed_form() {
        let ex = example(&[("a", false, L3)]);
        let (nll, grad) = nll_gradient(&CrfModel::new(), std::slice::from_ref(&ex)).unwrap();
        assert!((nll - 2f64.ln()).abs() < 1e-12);
        for key in static_features(&ex.sentence, 0) {
            let g = grad.weights[&key];
            assert!((g[1] + 0.5).abs() < 1e-12, "{key}: {g:?}");
            assert!((g[0] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn duplicate_example_doubles() {
        let ex = example(&[("a", false, O), ("b", true, L3), ("c", false, L3)]);
        let mut m = CrfModel::new();
        m.set_weight("text=a", L3, 0.3);
        m.transition[0][1] = -0.2;
        let (n1, g1) = nll_gradient(&m, std::slice::from_ref(&ex)).unwrap();
        let (n2, g2) = nll_gradient(&m, &[ex.clone(), ex]).unwrap();
        assert_eq!(n2, 2.0 * n1);
        for (k, v) in &g1.weights {
            assert_eq!(g2.weights[k], [2.0 * v[0], 2.0 * v[1]]);
        }
        for a in 0..2 {
            for b in 0..2 {
                assert_eq!(g2.transition[a][b], 2.0 * g1.transition[a][b]);
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ex = example(&[("a", false, O), ("b", true, L3), ("a", false, L3)]);
        let batch = [ex];
        let (_, grad) = nll_gradient(&CrfModel::new(), &batch).unwrap();
        let mut model = CrfModel::new();
        for k in grad.weights.keys() {
            model.set_weights(k, [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
        }
        for a in 0..2 {
            for b in 0..2 {
                model.transition[a][b] = rng.gen_range(-1.0..1.0);
            }
        }
        let (_, grad) = nll_gradient(&model, &batch).unwrap();
        let eps = 1e-5;
        let nll_at = |m: &CrfModel| nll_gradient(m, &batch).unwrap().0;
        let check = |analytic: f64, numeric: f64, what: &str| {
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8);
            assert!(rel < 1e-4 || (analytic - numeric).abs() < 1e-9, "{what}: {analytic} vs {numeric}");
        };
        let keys: Vec<String> = grad.weights.keys().cloned().collect();
        for k in keys {
            for y in Label::ALL {
                let base = model.weight(&k, y);
                let mut plus = model.clone();
                plus.set_weight(&k, y, base + eps);
                let mut minus = model.clone();
                minus.set_weight(&k, y, base - eps);
                let numeric = (nll_at(&plus) - nll_at(&minus)) / (2.0 * eps);
                check(grad.weights[&k][y.index()], numeric, &k);
            }
        }
        for a in 0..2 {
            for b in 0..2 {
                let mut plus = model.clone();
                plus.transition[a][b] += eps;
                let mut minus = model.clone();
                minus.transition[a][b] -= eps;
                let numeric = (nll_at(&plus) - nll_at(&minus)) / (2.0 * eps);
                check(grad.transition[a][b], numeric, "transition");
            }
        }
    }

    #[test]
    fn separable_corpus_is_learned() {
        let corpus = parse_corpus(BUNDLED_CORPUS).unwrap();
        let (model, report) = train_crf(&corpus, &TrainConfig::default()).unwrap();
        let eval = evaluate(&model, &corpus).unwrap();
        assert_eq!(eval.accuracy, 1.0);
        assert_eq!(eval.f1, 1.0);
        for w in report.losses.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "loss increased: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn training_is_deterministic() {
        let corpus = parse_corpus(BUNDLED_CORPUS).unwrap();
        let cfg = TrainConfig {
            epochs: 20,
            ..TrainConfig::default()
        };
        let (a, _) = train_crf(&corpus, &cfg).unwrap();
        let (b, _) = train_crf(&corpus, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn huge_step_reports_non_finite_loss() {
        let corpus = parse_corpus(BUNDLED_CORPUS).unwrap();
        let cfg = TrainConfig {
            step: 1e300,
            epochs: 10,
            ..TrainConfig::default()
        };
        assert!(matches!(train_crf(&corpus, &cfg), Err(Error::NonFiniteLoss { .. })));
    }

    #[test]
    fn empty_batch_rejected() {
        assert!(nll_gradient(&CrfModel::new(), &[]).is_err());
        assert!(train_crf(&[], &TrainConfig::default()).is_err());
    }
}
