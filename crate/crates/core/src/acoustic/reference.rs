use super::encoder::batch_norm_params;
use super::types::REF_EMBED_DIM;
use super::weights::ModelWeights;
use crate::nn::{conv2d, gru_forward, linear_vec, relu_inplace, softmax_inplace, GruParams, Tensor};
use crate::{Error, Result};

/// Tensor-name prefix of the reference encoder shared by the previous and
/// next phrase.
pub const CONTEXT_REF: &str = "context_ref";
/// Tensor-name prefix of the reference encoder that reads mel-spectrograms.
pub const ACOUSTIC_REF: &str = "acoustic_ref";

/// One reference encoder's parameters, selected by name prefix.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceEncoder<'a> {
    weights: &'a ModelWeights,
    prefix: &'static str,
    input_dim: usize,
}

impl<'a> ReferenceEncoder<'a> {
    /// The encoder applied to neighbouring phrases' `[T, 512]` encoder outputs.
    pub fn context(weights: &'a ModelWeights) -> Self {
        ReferenceEncoder {
            weights,
            prefix: CONTEXT_REF,
            input_dim: super::types::ENCODER_DIM,
        }
    }

    /// The encoder applied to `[F, 80]` reference mel-spectrograms.
    pub fn acoustic(weights: &'a ModelWeights) -> Self {
        ReferenceEncoder {
            weights,
            prefix: ACOUSTIC_REF,
            input_dim: super::types::MEL_DIM,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn t(&self, suffix: &str) -> &'a Tensor {
        self.weights.t(&format!("{}.{suffix}", self.prefix))
    }
}

/// Maps a variable-length `[T, D]` sequence to a 128-d probability vector.
///
/// The input is one image channel `[1, T, D]`; each conv layer is 3x3,
/// stride 2x2, batch-norm, ReLU. The result `[C, T', D']` is read as a
/// sequence of `T'` vectors of width `C * D'` (channel-major), summarised by
/// the final GRU state, then projected and softmax-normalised.
pub fn reference_encode(input: &Tensor, encoder: &ReferenceEncoder<'_>) -> Result<Vec<f32>> {
    if input.rank() != 2 || input.dim(1) != encoder.input_dim {
        return Err(Error::shape(
            "reference_encode",
            format!("expected [T, {}], got {:?}", encoder.input_dim, input.shape()),
        ));
    }
    let cfg = encoder.weights.config();
    let mut x = input.clone().reshape(vec![1, input.dim(0), input.dim(1)])?;
    for i in 0..cfg.ref_filters.len() {
        let mut y = conv2d(&x, encoder.t(&format!("conv{i}.weight")), (2, 2))?;
        let bn = batch_norm_params(encoder.weights, &format!("{}.conv{i}", encoder.prefix));
        crate::nn::batch_norm_inplace(&mut y, &bn)?;
        relu_inplace(y.data_mut());
        x = y;
    }
    let (c, t, d) = (x.dim(0), x.dim(1), x.dim(2));
    let mut seq = Vec::with_capacity(c * t * d);
    for step in 0..t {
        for ch in 0..c {
            let base = (ch * t + step) * d;
            seq.extend_from_slice(&x.data()[base..base + d]);
        }
    }
    let seq = Tensor::new(vec![t, c * d], seq)?;
    let gru = GruParams {
        w_ih: encoder.t("gru.w_ih"),
        w_hh: encoder.t("gru.w_hh"),
        b_ih: encoder.t("gru.b_ih"),
        b_hh: encoder.t("gru.b_hh"),
    };
    let (_, h) = gru_forward(&seq, &gru, &vec![0.0; cfg.ref_gru_dim])?;
    let mut out = linear_vec(&h, encoder.t("fc.weight"), Some(encoder.t("fc.bias")));
    debug_assert_eq!(out.len(), REF_EMBED_DIM);
    softmax_inplace(&mut out);
    Ok(out)
}
