use super::{Lexicon, Phrase, PhonemeInventory, Sentence};
use crate::{Error, Result};

/// Phoneme IDs of one phrase, as consumed by the acoustic model.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PhonemeSequence {
    ids: Vec<u32>,
}

impl PhonemeSequence {
    pub fn new(ids: Vec<u32>) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(PhonemeSequence { ids })
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Concatenation of several sequences, in order.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a PhonemeSequence>) -> Result<Self> {
        let ids: Vec<u32> = parts.into_iter().flat_map(|p| p.ids.iter().copied()).collect();
        Self::new(ids)
    }
}

/// Concatenates each token's lexicon pronunciation and maps it to IDs.
pub fn g2p(
    phrase: &Phrase,
    sentence: &Sentence,
    lexicon: &Lexicon,
    inventory: &PhonemeInventory,
) -> Result<PhonemeSequence> {
    if phrase.start >= phrase.end || phrase.end > sentence.len() {
        return Err(Error::InvalidArgument(format!(
            "phrase span {}..{} invalid for sentence of {} tokens",
            phrase.start,
            phrase.end,
            sentence.len()
        )));
    }
    let mut ids = Vec::new();
    for tok in &sentence.tokens()[phrase.start..phrase.end] {
        let entry = lexicon
            .get(&tok.text)
            .ok_or_else(|| Error::InvalidArgument(format!("token {:?} not in lexicon", tok.text)))?;
        for p in &entry.phonemes {
            ids.push(inventory.id_of(p)?);
        }
    }
    PhonemeSequence::new(ids)
}
