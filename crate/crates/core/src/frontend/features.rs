//! Feature template for the phrase-boundary CRF.
//!
//! Every active feature is a string key. Families emitted per position:
//! text / POS / syllable / punctuation-flag unigrams, all six pairwise
//! combinations of those four, previous/next word and POS bigrams, distance
//! in words and syllables from the previous and to the next punctuation, and
//! the dynamic distance in words since the previous predicted L3.
//! Distances are bucketed as `0`..`8` and `9+`; missing punctuation on a side
//! yields the `BOS` / `EOS` sentinel.

use super::Sentence;

pub type FeatureVector = Vec<String>;

/// Distances at or above this value share the `9+` bucket.
pub const DIST_CAP: usize = 9;

/// Key prefix of the history-dependent feature.
pub const DYNAMIC_PREFIX: &str = "dist_prev_L3=";

const BOS: &str = "BOS";
const EOS: &str = "EOS";

pub fn bucket(n: usize) -> String {
    if n >= DIST_CAP {
        format!("{DIST_CAP}+")
    } else {
        n.to_string()
    }
}

pub fn dynamic_feature(words_since_prev_l3: usize) -> String {
    format!("{DYNAMIC_PREFIX}{}", bucket(words_since_prev_l3))
}

/// All features for `position`, static ones first, the dynamic one last.
pub fn extract_features(
    sentence: &Sentence,
    position: usize,
    words_since_prev_l3: usize,
) -> FeatureVector {
    let mut f = static_features(sentence, position);
    f.push(dynamic_feature(words_since_prev_l3));
    f
}

/// Features that do not depend on the label history.
pub fn static_features(sentence: &Sentence, position: usize) -> FeatureVector {
    let tokens = sentence.tokens();
    assert!(position < tokens.len(), "feature position out of range");
    let tok = &tokens[position];
    let punct = if tok.followed_by_punct { "1" } else { "0" };
    let syl = tok.syllables.to_string();

    let mut f = Vec::with_capacity(20);
    f.push(format!("text={}", tok.text));
    f.push(format!("pos={}", tok.pos));
    f.push(format!("syl={syl}"));
    f.push(format!("punct={punct}"));

    f.push(format!("text|pos={}|{}", tok.text, tok.pos));
    f.push(format!("text|syl={}|{syl}", tok.text));
    f.push(format!("text|punct={}|{punct}", tok.text));
    f.push(format!("pos|syl={}|{syl}", tok.pos));
    f.push(format!("pos|punct={}|{punct}", tok.pos));
    f.push(format!("syl|punct={syl}|{punct}"));

    let (prev_text, prev_pos) = match position.checked_sub(1) {
        Some(p) => (tokens[p].text.as_str(), tokens[p].pos.as_str()),
        None => (BOS, BOS),
    };
    let (next_text, next_pos) = match tokens.get(position + 1) {
        Some(t) => (t.text.as_str(), t.pos.as_str()),
        None => (EOS, EOS),
    };
    f.push(format!("text-1|text={prev_text}|{}", tok.text));
    f.push(format!("text|text+1={}|{next_text}", tok.text));
    f.push(format!("pos-1|pos={prev_pos}|{}", tok.pos));
    f.push(format!("pos|pos+1={}|{next_pos}", tok.pos));

    // punctuation after token j lies before every token i > j
    let prev_punct = sentence.punct_positions().range(..position).next_back().copied();
    let next_punct = sentence.punct_positions().range(position..).next().copied();
    match prev_punct {
        Some(j) => {
            let syls: u32 = tokens[j + 1..=position].iter().map(|t| t.syllables).sum();
            f.push(format!("words_from_prev_punct={}", bucket(position - j)));
            f.push(format!("syls_from_prev_punct={}", bucket(syls as usize)));
        }
        None => {
            f.push(format!("words_from_prev_punct={BOS}"));
            f.push(format!("syls_from_prev_punct={BOS}"));
        }
    }
    match next_punct {
        Some(k) => {
            let syls: u32 = tokens[position + 1..=k].iter().map(|t| t.syllables).sum();
            f.push(format!("words_to_next_punct={}", bucket(k - position)));
            f.push(format!("syls_to_next_punct={}", bucket(syls as usize)));
        }
        None => {
            f.push(format!("words_to_next_punct={EOS}"));
            f.push(format!("syls_to_next_punct={EOS}"));
        }
    }
    f
}
