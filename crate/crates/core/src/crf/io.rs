//! CRF model file (`PPCF`) and boundary-corpus TSV.
//!
//! Model layout, all little-endian: magic `PPCF`, version `u32`, transition
//! matrix as 4 `f32` (row-major `[from][to]`, O before L3), feature count
//! `u32`, then per feature (sorted by key): key length `u32`, UTF-8 key,
//! weights for O and L3 as 2 `f32`.

use std::io::{Read, Write};

use super::{CrfModel, Label, TrainingExample};
use crate::frontend::{Sentence, Token};
use crate::{Error, Result};

pub const CRF_MAGIC: &[u8; 4] = b"PPCF";
pub const CRF_VERSION: u32 = 1;

pub fn write_model<W: Write>(model: &CrfModel, mut out: W) -> Result<()> {
    let mut buf = Vec::new();
    buf.extend_from_slice(CRF_MAGIC);
    buf.extend_from_slice(&CRF_VERSION.to_le_bytes());
    for row in &model.transition {
        for v in row {
            buf.extend_from_slice(&(*v as f32).to_le_bytes());
        }
    }
    buf.extend_from_slice(&(model.feature_count() as u32).to_le_bytes());
    for (key, w) in model.features() {
        buf.extend_from_slice(&(key.len() as u32).to_le_bytes());
        buf.extend_from_slice(key.as_bytes());
        buf.extend_from_slice(&(w[0] as f32).to_le_bytes());
        buf.extend_from_slice(&(w[1] as f32).to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.data.len() - self.pos < n {
            return Err(bad("truncated file"));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

fn bad(reason: &str) -> Error {
    Error::Format {
        what: "CRF model",
        reason: reason.to_string(),
    }
}

pub fn read_model<R: Read>(mut input: R) -> Result<CrfModel> {
    let mut data = Vec::new();
    input.read_to_end(&mut data)?;
    let mut c = Cursor { data: &data, pos: 0 };
    if c.take(4)? != CRF_MAGIC {
        return Err(bad("bad magic"));
    }
    let version = c.u32()?;
    if version != CRF_VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let mut model = CrfModel::new();
    for a in 0..2 {
        for b in 0..2 {
            model.transition[a][b] = c.f32()? as f64;
        }
    }
    let count = c.u32()?;
    for _ in 0..count {
        let len = c.u32()? as usize;
        let key = std::str::from_utf8(c.take(len)?).map_err(|_| bad("feature key is not UTF-8"))?;
        let w = [c.f32()? as f64, c.f32()? as f64];
        model.set_weights(key, w);
    }
    if c.pos != data.len() {
        return Err(bad("trailing bytes"));
    }
    if !model.is_finite() {
        return Err(bad("non-finite weight"));
    }
    Ok(model)
}

/// Parses `text<TAB>pos<TAB>syllables<TAB>punct_flag<TAB>label` lines, with
/// blank lines between sentences.
pub fn parse_corpus(text: &str) -> Result<Vec<TrainingExample>> {
    let mut corpus = Vec::new();
    let mut tokens = Vec::new();
    let mut labels = Vec::new();
    let mut start_line = 1;
    let flush = |tokens: &mut Vec<Token>, labels: &mut Vec<Label>, line: usize, corpus: &mut Vec<TrainingExample>| {
        if tokens.is_empty() {
            return Ok(());
        }
        let ex = TrainingExample::new(Sentence::new(std::mem::take(tokens)), std::mem::take(labels))
            .map_err(|e| Error::Parse {
                what: "corpus",
                line,
                reason: e.to_string(),
            })?;
        corpus.push(ex);
        Ok::<(), Error>(())
    };
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush(&mut tokens, &mut labels, start_line, &mut corpus)?;
            start_line = line_no + 1;
            continue;
        }
        let err = |reason: &str| Error::Parse {
            what: "corpus",
            line: line_no,
            reason: reason.to_string(),
        };
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 5 {
            return Err(err("expected 5 tab-separated fields"));
        }
        let syllables: u32 = f[2].parse().map_err(|_| err("bad syllable count"))?;
        if f[0].is_empty() || syllables == 0 {
            return Err(err("empty token or zero syllables"));
        }
        let punct = match f[3] {
            "0" => false,
            "1" => true,
            _ => return Err(err("punct flag must be 0 or 1")),
        };
        let label = Label::parse(f[4]).ok_or_else(|| err("label must be O or L3"))?;
        tokens.push(Token::new(f[0], f[1], syllables, punct));
        labels.push(label);
    }
    flush(&mut tokens, &mut labels, start_line, &mut corpus)?;
    if corpus.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(corpus)
}
