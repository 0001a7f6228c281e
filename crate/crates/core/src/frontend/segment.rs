use super::Sentence;
use crate::crf::{beam_decode_dynamic, CrfModel, Label, DEFAULT_BEAM_WIDTH};
use crate::{Error, Result};

/// A contiguous token span `[start, end)` ending at an L3 boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Phrase {
    pub start: usize,
    pub end: usize,
    pub index_in_sentence: usize,
    pub total_in_sentence: usize,
}

impl Phrase {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Splits after every L3 and after the final token.
pub fn phrases_from_labels(labels: &[Label]) -> Vec<Phrase> {
    let mut spans = Vec::new();
    let mut start = 0;
    for (i, label) in labels.iter().enumerate() {
        if *label == Label::L3 || i + 1 == labels.len() {
            spans.push((start, i + 1));
            start = i + 1;
        }
    }
    let total = spans.len();
    spans
        .into_iter()
        .enumerate()
        .map(|(index_in_sentence, (start, end))| Phrase {
            start,
            end,
            index_in_sentence,
            total_in_sentence: total,
        })
        .collect()
}

pub fn segment_phrases(sentence: &Sentence, crf: &CrfModel) -> Result<Vec<Phrase>> {
    if sentence.is_empty() {
        return Err(Error::EmptyInput);
    }
    let labels = beam_decode_dynamic(crf, sentence, DEFAULT_BEAM_WIDTH)?;
    Ok(phrases_from_labels(&labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crf::{sequence_score, CrfModel};
    use crate::frontend::Token;
    use proptest::prelude::*;
    use Label::{L3, O};

    #[test]
    fn no_boundaries_single_phrase() {
        let p = phrases_from_labels(&[O, O, O]);
        assert_eq!(p.len(), 1);
        assert_eq!((p[0].start, p[0].end, p[0].total_in_sentence), (0, 3, 1));
    }

    #[test]
    fn boundary_labels_split() {
        let p = phrases_from_labels(&[L3, O, L3]);
        let spans: Vec<_> = p.iter().map(|p| (p.start, p.end)).collect();
        assert_eq!(spans, [(0, 1), (1, 3)]);
        assert_eq!(p[1].index_in_sentence, 1);
        assert_eq!(p[1].total_in_sentence, 2);
    }

    #[test]
    fn split_at_punctuation_matches_brute_force() {
        let tokens = ["a", "b", "c", "d", "e", "f"]
            .iter()
            .enumerate()
            .map(|(i, t)| Token::new(t, "n", 1, i == 2))
            .collect();
        let sentence = Sentence::new(tokens);
        let mut crf = CrfModel::new();
        crf.set_weight("punct=1", L3, 10.0);
        crf.set_weight("punct=0", L3, -1.0);

        // exhaustive argmax over all 64 labelings
        let mut best: Option<(f64, Vec<Label>)> = None;
        for mask in 0u32..64 {
            let labels: Vec<Label> = (0..6)
                .map(|i| if mask >> i & 1 == 1 { L3 } else { O })
                .collect();
            let s = sequence_score(&crf, &sentence, &labels).unwrap();
            if best.as_ref().is_none_or(|(b, _)| s > *b) {
                best = Some((s, labels));
            }
        }
        let (_, best_labels) = best.unwrap();
        assert_eq!(best_labels, [O, O, L3, O, O, O]);

        let phrases = segment_phrases(&sentence, &crf).unwrap();
        let spans: Vec<_> = phrases.iter().map(|p| (p.start, p.end)).collect();
        assert_eq!(spans, [(0, 3), (3, 6)]);
        assert_eq!(phrases_from_labels(&best_labels), phrases);
    }

    proptest! {
        #[test]
        fn spans_partition_tokens(bits in proptest::collection::vec(any::<bool>(), 1..30)) {
            let labels: Vec<Label> = bits.iter().map(|&b| if b { L3 } else { O }).collect();
            let phrases = phrases_from_labels(&labels);
            prop_assert_eq!(phrases[0].start, 0);
            prop_assert_eq!(phrases.last().unwrap().end, labels.len());
            for w in phrases.windows(2) {
                prop_assert_eq!(w[0].end, w[1].start);
            }
            for (i, p) in phrases.iter().enumerate() {
                prop_assert!(p.start < p.end);
                prop_assert_eq!(p.index_in_sentence, i);
                prop_assert_eq!(p.total_in_sentence, phrases.len());
            }
        }
    }
}
