//! Text frontend: lexicon-driven word segmentation, boundary-CRF features,
//! phrase segmentation and grapheme-to-phoneme lookup.

mod features;
mod g2p;
mod lexicon;
mod segment;
mod tokenize;

pub use features::{
    bucket, dynamic_feature, extract_features, static_features, FeatureVector, DIST_CAP,
    DYNAMIC_PREFIX,
};
pub use g2p::{g2p, PhonemeSequence};
pub use lexicon::{LexEntry, Lexicon, PhonemeInventory};
pub use segment::{phrases_from_labels, segment_phrases, Phrase};
pub use tokenize::{is_punctuation, tokenize, Sentence, Token};

/// Bundled toy lexicon (Mandarin characters and words, pinyin initials/finals).
pub const BUNDLED_LEXICON: &str = include_str!("../../data/lexicon.tsv");
/// Phoneme inventory matching [`BUNDLED_LEXICON`].
pub const BUNDLED_PHONES: &str = include_str!("../../data/phones.txt");
/// Boundary-labelled training corpus for the bundled lexicon.
pub const BUNDLED_CORPUS: &str = include_str!("../../data/boundary_corpus.tsv");

/// Lexicon plus phoneme inventory, the two data files the frontend needs.
#[derive(Debug, Clone)]
pub struct Frontend {
    pub lexicon: Lexicon,
    pub inventory: PhonemeInventory,
}

impl Frontend {
    pub fn new(lexicon: Lexicon, inventory: PhonemeInventory) -> crate::Result<Self> {
        // every lexicon phoneme must resolve, otherwise g2p fails much later
        for entry in lexicon.entries() {
            for p in &entry.1.phonemes {
                inventory.id_of(p)?;
            }
        }
        Ok(Frontend { lexicon, inventory })
    }

    pub fn bundled() -> Self {
        let lexicon = Lexicon::parse(BUNDLED_LEXICON).expect("bundled lexicon parses");
        let inventory = PhonemeInventory::parse(BUNDLED_PHONES).expect("bundled phones parse");
        Frontend::new(lexicon, inventory).expect("bundled data is consistent")
    }

    pub fn load(
        lexicon: impl AsRef<std::path::Path>,
        phones: impl AsRef<std::path::Path>,
    ) -> crate::Result<Self> {
        let lexicon = Lexicon::parse(&std::fs::read_to_string(lexicon)?)?;
        let inventory = PhonemeInventory::parse(&std::fs::read_to_string(phones)?)?;
        Frontend::new(lexicon, inventory)
    }
}
