use crate::nn::Tensor;
use crate::{Error, Result};

pub const ENCODER_DIM: usize = 512;
pub const CONTEXT_DIM: usize = 256;
pub const ACOUSTIC_DIM: usize = 128;
pub const CONDITION_DIM: usize = ENCODER_DIM + CONTEXT_DIM + ACOUSTIC_DIM;
/// Output width of either reference encoder.
pub const REF_EMBED_DIM: usize = 128;
pub const MEL_DIM: usize = 80;
/// 12.5 ms hop.
pub const FRAME_PERIOD_US: u32 = 12_500;
pub const WINDOW_MS: f32 = 50.0;

/// `[T, 512]` encoder states of one phrase.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderOutput(Tensor);

impl EncoderOutput {
    pub fn new(t: Tensor) -> Result<Self> {
        if t.rank() != 2 || t.dim(1) != ENCODER_DIM {
            return Err(Error::shape("encoder output", format!("{:?}", t.shape())));
        }
        Ok(EncoderOutput(t))
    }

    pub fn tensor(&self) -> &Tensor {
        &self.0
    }

    pub fn steps(&self) -> usize {
        self.0.dim(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContextEmbedding(pub(crate) Vec<f32>);

impl ContextEmbedding {
    pub fn new(v: Vec<f32>) -> Result<Self> {
        if v.len() != CONTEXT_DIM {
            return Err(Error::shape("context embedding", format!("width {}", v.len())));
        }
        Ok(ContextEmbedding(v))
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcousticEmbedding(pub(crate) Vec<f32>);

impl AcousticEmbedding {
    pub fn new(v: Vec<f32>) -> Result<Self> {
        if v.len() != ACOUSTIC_DIM {
            return Err(Error::shape("acoustic embedding", format!("width {}", v.len())));
        }
        Ok(AcousticEmbedding(v))
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }
}

/// `[T, 896]`: encoder row, then the context and acoustic embeddings
/// repeated on every row.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionedMemory(pub(crate) Tensor);

impl ConditionedMemory {
    pub fn tensor(&self) -> &Tensor {
        &self.0
    }

    pub fn steps(&self) -> usize {
        self.0.dim(0)
    }

    pub fn width(&self) -> usize {
        self.0.dim(1)
    }
}

/// `[F, 80]` mel-spectrogram with its frame period.
#[derive(Debug, Clone, PartialEq)]
pub struct MelSpectrogram {
    frames: Tensor,
    pub frame_period_us: u32,
}

impl MelSpectrogram {
    pub fn new(frames: Tensor) -> Result<Self> {
        Self::with_period(frames, FRAME_PERIOD_US)
    }

    pub fn with_period(frames: Tensor, frame_period_us: u32) -> Result<Self> {
        if frames.rank() != 2 || frames.dim(1) != MEL_DIM {
            return Err(Error::shape("mel", format!("expected [F, 80], got {:?}", frames.shape())));
        }
        Ok(MelSpectrogram {
            frames,
            frame_period_us,
        })
    }

    pub fn frames(&self) -> &Tensor {
        &self.frames
    }

    pub fn frame_count(&self) -> usize {
        self.frames.dim(0)
    }

    /// Frame-wise concatenation in the given order.
    pub fn concat(parts: &[MelSpectrogram]) -> Result<Self> {
        let first = parts.first().ok_or(Error::EmptyInput)?;
        let mut data = Vec::with_capacity(parts.iter().map(|m| m.frames.len()).sum());
        for p in parts {
            data.extend_from_slice(p.frames.data());
        }
        let n = data.len() / MEL_DIM;
        Self::with_period(Tensor::new(vec![n, MEL_DIM], data)?, first.frame_period_us)
    }

    /// Deterministic pseudo-random reference, for runs without recorded audio.
    pub fn synthetic(frames: usize, seed: u64) -> Self {
        let mut rng = crate::nn::SeededRng::for_name(seed, "reference_mel");
        let data = (0..frames * MEL_DIM).map(|_| rng.symmetric(4.0) - 4.0).collect();
        Self::new(Tensor::new(vec![frames.max(1), MEL_DIM], data).expect("shape")).expect("width")
    }
}
