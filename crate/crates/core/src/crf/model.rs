use std::collections::BTreeMap;

use crate::frontend::{Sentence, DYNAMIC_PREFIX};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Label {
    O = 0,
    L3 = 1,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::O, Label::L3];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::O => "O",
            Label::L3 => "L3",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s {
            "O" => Some(Label::O),
            "L3" => Some(Label::L3),
            _ => None,
        }
    }
}

/// Feature weights per label plus the label-transition matrix.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CrfModel {
    weights: BTreeMap<String, [f64; 2]>,
    /// `transition[from][to]`, indexed by [`Label::index`].
    pub transition: [[f64; 2]; 2],
}

impl CrfModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn weight(&self, feature: &str, label: Label) -> f64 {
        self.weights.get(feature).map_or(0.0, |w| w[label.index()])
    }

    pub fn weights_of(&self, feature: &str) -> Option<&[f64; 2]> {
        self.weights.get(feature)
    }

    pub fn set_weight(&mut self, feature: &str, label: Label, value: f64) {
        self.weights.entry(feature.to_string()).or_insert([0.0; 2])[label.index()] = value;
    }

    pub fn set_weights(&mut self, feature: &str, values: [f64; 2]) {
        self.weights.insert(feature.to_string(), values);
    }

    pub fn weights_mut(&mut self) -> impl Iterator<Item = (&String, &mut [f64; 2])> {
        self.weights.iter_mut()
    }

    pub fn features(&self) -> impl Iterator<Item = (&String, &[f64; 2])> {
        self.weights.iter()
    }

    pub fn feature_count(&self) -> usize {
        self.weights.len()
    }

    /// Whether any weight on the words-since-L3 feature is non-zero.
    pub fn has_dynamic_weights(&self) -> bool {
        self.weights
            .range(DYNAMIC_PREFIX.to_string()..)
            .take_while(|(k, _)| k.starts_with(DYNAMIC_PREFIX))
            .any(|(_, w)| w[0] != 0.0 || w[1] != 0.0)
    }

    /// Zeroes every weight on the words-since-L3 feature.
    pub fn clear_dynamic_weights(&mut self) {
        for (k, w) in self.weights.iter_mut() {
            if k.starts_with(DYNAMIC_PREFIX) {
                *w = [0.0; 2];
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.transition.iter().flatten().all(|v| v.is_finite())
            && self.weights.values().flatten().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub sentence: Sentence,
    pub gold_labels: Vec<Label>,
}

impl TrainingExample {
    pub fn new(sentence: Sentence, gold_labels: Vec<Label>) -> Result<Self> {
        if sentence.is_empty() || sentence.len() != gold_labels.len() {
            return Err(Error::InvalidArgument(format!(
                "training example has {} tokens and {} labels",
                sentence.len(),
                gold_labels.len()
            )));
        }
        if gold_labels.last() != Some(&Label::L3) {
            return Err(Error::InvalidArgument(
                "final token of a training sentence must be labelled L3".into(),
            ));
        }
        Ok(TrainingExample {
            sentence,
            gold_labels,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dynamic_weight_detection() {
        let mut m = CrfModel::new();
        m.set_weight("text=a", Label::L3, 1.0);
        assert!(!m.has_dynamic_weights());
        m.set_weight("dist_prev_L3=3", Label::O, 0.5);
        assert!(m.has_dynamic_weights());
        m.clear_dynamic_weights();
        assert!(!m.has_dynamic_weights());
        assert_eq!(m.weight("text=a", Label::L3), 1.0);
    }
}
