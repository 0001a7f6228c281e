use std::collections::BTreeSet;

use super::Lexicon;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub pos: String,
    pub syllables: u32,
    pub followed_by_punct: bool,
}

impl Token {
    pub fn new(text: &str, pos: &str, syllables: u32, followed_by_punct: bool) -> Self {
        Token {
            text: text.to_string(),
            pos: pos.to_string(),
            syllables,
            followed_by_punct,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    tokens: Vec<Token>,
    punct_positions: BTreeSet<usize>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Self {
        let punct_positions = tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| t.followed_by_punct)
            .map(|(i, _)| i)
            .collect();
        Sentence {
            tokens,
            punct_positions,
        }
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn punct_positions(&self) -> &BTreeSet<usize> {
        &self.punct_positions
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Token texts joined with no separator.
    pub fn joined_text(&self) -> String {
        self.tokens.iter().map(|t| t.text.as_str()).collect()
    }
}

/// ASCII punctuation plus the common CJK full-width marks.
pub fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '，' | '。' | '、' | '；' | '：' | '？' | '！' | '…' | '—' | '“' | '”' | '‘' | '’'
                | '（' | '）' | '《' | '》' | '「' | '」'
        )
}

/// Greedy longest-match word segmentation against `lexicon`.
///
/// Punctuation is consumed and marks the preceding token; whitespace is
/// skipped without marking anything.
pub fn tokenize(raw: &str, lexicon: &Lexicon) -> Result<Sentence> {
    let chars: Vec<char> = raw.trim().chars().collect();
    if chars.is_empty() {
        return Err(Error::EmptyInput);
    }
    let max_len = lexicon.max_word_chars().max(1);
    let mut tokens: Vec<Token> = Vec::new();
    let mut i = 0;
    let mut buf = String::new();
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if is_punctuation(c) {
            if let Some(last) = tokens.last_mut() {
                last.followed_by_punct = true;
            }
            i += 1;
            continue;
        }
        let mut matched = None;
        let upper = max_len.min(chars.len() - i);
        for len in (1..=upper).rev() {
            let span = &chars[i..i + len];
            if span.iter().any(|&c| c.is_whitespace() || is_punctuation(c)) {
                continue;
            }
            buf.clear();
            buf.extend(span);
            if let Some(entry) = lexicon.get(&buf) {
                matched = Some((len, entry));
                break;
            }
        }
        let (len, entry) = matched.ok_or(Error::UnsegmentableInput { ch: c, offset: i })?;
        tokens.push(Token {
            text: buf.clone(),
            pos: entry.pos.clone(),
            syllables: entry.syllables,
            followed_by_punct: false,
        });
        i += len;
    }
    if tokens.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(Sentence::new(tokens))
}
