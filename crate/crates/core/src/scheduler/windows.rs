use crate::{Error, Result};

/// Sliding text window sizes: `m` previous phrases, `k` current phrases,
/// `n` next phrases, advancing by `shift`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlidingWindowConfig {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub shift: usize,
}

impl SlidingWindowConfig {
    /// One phrase per window with one neighbour on each side; the inference setting.
    pub const INFERENCE: SlidingWindowConfig = SlidingWindowConfig { m: 1, n: 1, k: 1, shift: 1 };

    pub fn new(m: usize, n: usize, k: usize, shift: usize) -> Result<Self> {
        if k == 0 || shift == 0 {
            return Err(Error::InvalidArgument(format!(
                "window needs k >= 1 and shift >= 1 (got k={k}, shift={shift})"
            )));
        }
        Ok(SlidingWindowConfig { m, n, k, shift })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhraseWindow {
    pub prev: Vec<usize>,
    pub current: Vec<usize>,
    pub next: Vec<usize>,
}

/// Windows start at `0, shift, 2·shift, …` and stop after the first window
/// whose current block reaches the last phrase, so a final block is
/// truncated rather than repeated. Neighbour lists are cut at the edges.
///
/// 5 phrases with `k = 3, shift = 1` give the currents `[0..2], [1..3], [2..4]`.
pub fn build_windows(phrase_count: usize, config: &SlidingWindowConfig) -> Result<Vec<PhraseWindow>> {
    if phrase_count == 0 {
        return Err(Error::EmptyInput);
    }
    let config = SlidingWindowConfig::new(config.m, config.n, config.k, config.shift)?;
    let mut windows = Vec::new();
    let mut start = 0;
    while start < phrase_count {
        let end = (start + config.k).min(phrase_count);
        windows.push(PhraseWindow {
            prev: (start.saturating_sub(config.m)..start).collect(),
            current: (start..end).collect(),
            next: (end..(end + config.n).min(phrase_count)).collect(),
        });
        if end == phrase_count {
            break;
        }
        start += config.shift;
    }
    Ok(windows)
}
