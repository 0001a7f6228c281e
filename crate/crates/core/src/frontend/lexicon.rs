use std::collections::{BTreeMap, HashMap};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexEntry {
    pub pos: String,
    pub syllables: u32,
    pub phonemes: Vec<String>,
}

/// Word → (POS, syllable count, phonemes).
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: BTreeMap<String, LexEntry>,
    max_word_chars: usize,
}

impl Lexicon {
    /// Parses `word<TAB>pos<TAB>syllables<TAB>phoneme phoneme ...` lines.
    /// Blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lex = Lexicon::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: &str| Error::Parse {
                what: "lexicon",
                line: line_no,
                reason: reason.to_string(),
            };
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 {
                return Err(bad("expected 4 tab-separated fields"));
            }
            let syllables: u32 = fields[2]
                .trim()
                .parse()
                .map_err(|_| bad("syllable count is not an integer"))?;
            let phonemes: Vec<String> = fields[3].split_whitespace().map(str::to_string).collect();
            let word = fields[0].trim();
            lex.insert(word, fields[1].trim(), syllables, phonemes)
                .map_err(|e| bad(&e.to_string()))?;
        }
        Ok(lex)
    }

    pub fn insert(
        &mut self,
        word: &str,
        pos: &str,
        syllables: u32,
        phonemes: Vec<String>,
    ) -> Result<()> {
        if word.is_empty() {
            return Err(Error::InvalidArgument("empty lexicon word".into()));
        }
        if syllables == 0 {
            return Err(Error::InvalidArgument(format!("{word}: syllable count must be >= 1")));
        }
        if phonemes.is_empty() {
            return Err(Error::InvalidArgument(format!("{word}: no phonemes")));
        }
        if self.entries.contains_key(word) {
            return Err(Error::InvalidArgument(format!("duplicate lexicon word {word:?}")));
        }
        self.max_word_chars = self.max_word_chars.max(word.chars().count());
        self.entries.insert(
            word.to_string(),
            LexEntry {
                pos: pos.to_string(),
                syllables,
                phonemes,
            },
        );
        Ok(())
    }

    pub fn get(&self, word: &str) -> Option<&LexEntry> {
        self.entries.get(word)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&String, &LexEntry)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_word_chars(&self) -> usize {
        self.max_word_chars
    }
}

/// Ordered phoneme table; the 0-based line number is the phoneme ID.
#[derive(Debug, Clone, Default)]
pub struct PhonemeInventory {
    phones: Vec<String>,
    ids: HashMap<String, u32>,
}

impl PhonemeInventory {
    pub fn parse(text: &str) -> Result<Self> {
        let mut inv = PhonemeInventory::default();
        for (idx, raw) in text.lines().enumerate() {
            let p = raw.trim();
            if p.is_empty() {
                return Err(Error::Parse {
                    what: "phoneme inventory",
                    line: idx + 1,
                    reason: "empty line (line numbers are phoneme IDs)".into(),
                });
            }
            if inv.ids.insert(p.to_string(), idx as u32).is_some() {
                return Err(Error::Parse {
                    what: "phoneme inventory",
                    line: idx + 1,
                    reason: format!("duplicate phoneme {p:?}"),
                });
            }
            inv.phones.push(p.to_string());
        }
        Ok(inv)
    }

    pub fn from_phones<I: IntoIterator<Item = S>, S: Into<String>>(phones: I) -> Result<Self> {
        let joined: Vec<String> = phones.into_iter().map(Into::into).collect();
        Self::parse(&joined.join("\n"))
    }

    pub fn id_of(&self, phone: &str) -> Result<u32> {
        self.ids
            .get(phone)
            .copied()
            .ok_or_else(|| Error::UnknownPhoneme(phone.to_string()))
    }

    pub fn phone(&self, id: u32) -> Option<&str> {
        self.phones.get(id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.phones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phones.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_entries_and_comments() {
        let lex = Lexicon::parse("# c\nab\tn\t2\ta1 b2\n\nc\tv\t1\tc3\n").unwrap();
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.get("ab").unwrap().phonemes, vec!["a1", "b2"]);
        assert_eq!(lex.max_word_chars(), 2);
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(Lexicon::parse("a\tn\t0\tx\n").is_err());
        assert!(Lexicon::parse("a\tn\t1\t\n").is_err());
        assert!(Lexicon::parse("a\tn\t1\tx\na\tv\t1\ty\n").is_err());
        assert!(Lexicon::parse("a\tn\t1\n").is_err());
    }

    #[test]
    fn inventory_ids_are_line_numbers() {
        let inv = PhonemeInventory::parse("x\ny\nz\n").unwrap();
        assert_eq!(inv.id_of("z").unwrap(), 2);
        assert!(matches!(inv.id_of("q"), Err(Error::UnknownPhoneme(_))));
        assert!(PhonemeInventory::parse("x\nx\n").is_err());
    }
}
