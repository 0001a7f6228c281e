use super::types::{EncoderOutput, ENCODER_DIM};
use super::weights::ModelWeights;
use crate::frontend::PhonemeSequence;
use crate::nn::{conv1d, lstm_forward, relu_inplace, BatchNorm, LstmParams, LstmState, Tensor, BN_EPSILON};
use crate::{Error, Result};

pub(crate) fn batch_norm_params<'a>(weights: &'a ModelWeights, prefix: &str) -> BatchNorm<'a> {
    BatchNorm {
        mean: weights.t(&format!("{prefix}.bn.mean")).data(),
        var: weights.t(&format!("{prefix}.bn.var")).data(),
        gamma: weights.t(&format!("{prefix}.bn.gamma")).data(),
        beta: weights.t(&format!("{prefix}.bn.beta")).data(),
        epsilon: BN_EPSILON,
    }
}

pub(crate) fn lstm_params<'a>(weights: &'a ModelWeights, prefix: &str) -> LstmParams<'a> {
    LstmParams {
        w_ih: weights.t(&format!("{prefix}.w_ih")),
        w_hh: weights.t(&format!("{prefix}.w_hh")),
        b: weights.t(&format!("{prefix}.b")),
    }
}

fn reverse_rows(t: &Tensor) -> Tensor {
    let rows = t.dim(0);
    let data = (0..rows).rev().flat_map(|r| t.row(r).iter().copied()).collect();
    Tensor::new(t.shape().to_vec(), data).expect("same shape")
}

/// Embedding lookup, conv/batch-norm/ReLU stack over time, then one
/// bidirectional LSTM (256 per direction) giving `[T, 512]`.
pub fn encode_phrase(phonemes: &PhonemeSequence, weights: &ModelWeights) -> Result<EncoderOutput> {
    let cfg = weights.config();
    let table = weights.t("embedding");
    let mut rows = Vec::with_capacity(phonemes.len() * ENCODER_DIM);
    for &id in phonemes.ids() {
        let id = id as usize;
        if id >= cfg.n_phonemes {
            return Err(Error::UnknownPhonemeId {
                id,
                size: cfg.n_phonemes,
            });
        }
        rows.extend_from_slice(table.row(id));
    }
    let steps = phonemes.len();
    // channel-major [C, T] through the conv stack
    let mut x = Tensor::new(vec![steps, ENCODER_DIM], rows)?.transpose();
    for i in 0..cfg.encoder_conv_layers {
        let name = format!("encoder.conv{i}");
        let mut y = conv1d(
            &x,
            weights.t(&format!("{name}.weight")),
            Some(weights.t(&format!("{name}.bias"))),
        )?;
        crate::nn::batch_norm_inplace(&mut y, &batch_norm_params(weights, &name))?;
        relu_inplace(y.data_mut());
        x = y;
    }
    let x = x.transpose();
    let half = ENCODER_DIM / 2;
    let (fwd, _) = lstm_forward(&x, &lstm_params(weights, "encoder.lstm.fwd"), LstmState::zeros(half))?;
    let (bwd_rev, _) = lstm_forward(
        &reverse_rows(&x),
        &lstm_params(weights, "encoder.lstm.bwd"),
        LstmState::zeros(half),
    )?;
    let bwd = reverse_rows(&bwd_rev);
    let mut out = Vec::with_capacity(steps * ENCODER_DIM);
    for t in 0..steps {
        out.extend_from_slice(fwd.row(t));
        out.extend_from_slice(bwd.row(t));
    }
    EncoderOutput::new(Tensor::new(vec![steps, ENCODER_DIM], out)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acoustic::ModelConfig;

    #[test]
    fn shape_purity_sensitivity() {
        let w = ModelWeights::generate(ModelConfig::small(6), 11);
        let one = PhonemeSequence::new(vec![3]).unwrap();
        let out = encode_phrase(&one, &w).unwrap();
        assert_eq!(out.tensor().shape(), [1, 512]);

        let a = PhonemeSequence::new(vec![1, 4, 2]).unwrap();
        let b = PhonemeSequence::new(vec![4, 1, 2]).unwrap();
        let ea = encode_phrase(&a, &w).unwrap();
        assert_eq!(ea, encode_phrase(&a, &w).unwrap());
        assert_ne!(ea, encode_phrase(&b, &w).unwrap());
        assert!(ea.tensor().is_finite());
    }

    #[test]
    fn out_of_range_id() {
        let w = ModelWeights::generate(ModelConfig::small(6), 11);
        let bad = PhonemeSequence::new(vec![0, 6]).unwrap();
        assert!(matches!(
            encode_phrase(&bad, &w),
            Err(Error::UnknownPhonemeId { id: 6, size: 6 })
        ));
    }
}
