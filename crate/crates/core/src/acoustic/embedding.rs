use super::reference::{reference_encode, ReferenceEncoder};
use super::types::{
    AcousticEmbedding, ConditionedMemory, ContextEmbedding, EncoderOutput, MelSpectrogram,
    CONDITION_DIM, ENCODER_DIM, REF_EMBED_DIM,
};
use super::weights::ModelWeights;
use crate::nn::{dot_attention, tanh_op, Tensor};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct TokenAttention {
    pub output: Vec<f32>,
    pub weights: Vec<f32>,
}

/// Single-head scaled dot-product attention of `query` over a token table;
/// the table rows are the keys and `tanh(rows)` the values.
pub fn token_attention(
    query: &[f32],
    table: &Tensor,
    w_query: &Tensor,
    w_key: &Tensor,
) -> Result<TokenAttention> {
    let values = tanh_op(table);
    let att = dot_attention(query, table, &values, w_query, w_key)?;
    Ok(TokenAttention {
        output: att.context,
        weights: att.weights,
    })
}

fn table_attention(weights: &ModelWeights, prefix: &str, query: &[f32]) -> Result<TokenAttention> {
    token_attention(
        query,
        weights.t(&format!("{prefix}.table")),
        weights.t(&format!("{prefix}.query")),
        weights.t(&format!("{prefix}.key")),
    )
}

/// `[e_prev ‖ e_next]` where each half is the shared context reference
/// encoding of that neighbour, or zeros when the neighbour is absent.
pub fn context_query(
    prev: Option<&EncoderOutput>,
    next: Option<&EncoderOutput>,
    weights: &ModelWeights,
) -> Result<Vec<f32>> {
    let encoder = ReferenceEncoder::context(weights);
    let mut query = Vec::with_capacity(2 * REF_EMBED_DIM);
    for side in [prev, next] {
        match side {
            Some(enc) => query.extend(reference_encode(enc.tensor(), &encoder)?),
            None => query.extend(std::iter::repeat_n(0.0, REF_EMBED_DIM)),
        }
    }
    Ok(query)
}

/// 256-d context embedding of the current phrase from its neighbours.
pub fn context_embed(
    prev: Option<&EncoderOutput>,
    next: Option<&EncoderOutput>,
    weights: &ModelWeights,
) -> Result<ContextEmbedding> {
    let query = context_query(prev, next, weights)?;
    let att = table_attention(weights, "context_tokens", &query)?;
    ContextEmbedding::new(att.output)
}

/// 128-d acoustic embedding of a reference mel-spectrogram.
pub fn acoustic_embed(reference_mel: &MelSpectrogram, weights: &ModelWeights) -> Result<AcousticEmbedding> {
    let query = reference_encode(reference_mel.frames(), &ReferenceEncoder::acoustic(weights))?;
    let att = table_attention(weights, "acoustic_tokens", &query)?;
    AcousticEmbedding::new(att.output)
}

/// Row `t` is `[enc[t] ‖ ctx ‖ ac]`.
pub fn condition_concat(
    enc: &EncoderOutput,
    ctx: &ContextEmbedding,
    ac: &AcousticEmbedding,
) -> Result<ConditionedMemory> {
    let steps = enc.steps();
    let mut data = Vec::with_capacity(steps * CONDITION_DIM);
    for t in 0..steps {
        data.extend_from_slice(enc.tensor().row(t));
        data.extend_from_slice(ctx.as_slice());
        data.extend_from_slice(ac.as_slice());
    }
    debug_assert_eq!(ENCODER_DIM + ctx.as_slice().len() + ac.as_slice().len(), CONDITION_DIM);
    Ok(ConditionedMemory(Tensor::new(vec![steps, CONDITION_DIM], data)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acoustic::{encode_phrase, ModelConfig};
    use crate::frontend::PhonemeSequence;
    use crate::nn::SeededRng;

    fn weights() -> ModelWeights {
        ModelWeights::generate(ModelConfig::small(8), 21)
    }

    fn enc(w: &ModelWeights, ids: &[u32]) -> EncoderOutput {
        encode_phrase(&PhonemeSequence::new(ids.to_vec()).unwrap(), w).unwrap()
    }

    #[test]
    fn identical_token_rows_give_tanh_row() {
        let mut rng = SeededRng::new(4);
        let row: Vec<f32> = (0..6).map(|_| rng.symmetric(1.5)).collect();
        let table = Tensor::new(vec![10, 6], row.repeat(10)).unwrap();
        let wq = Tensor::new(vec![3, 6], (0..18).map(|_| rng.symmetric(1.0)).collect()).unwrap();
        let wk = Tensor::new(vec![6, 6], (0..36).map(|_| rng.symmetric(1.0)).collect()).unwrap();
        for q in [[0.0, 0.0, 0.0], [1.0, -2.0, 0.5]] {
            let att = token_attention(&q, &table, &wq, &wk).unwrap();
            for (o, r) in att.output.iter().zip(&row) {
                assert!((o - r.tanh()).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn token_attention_matches_naive() {
        let mut rng = SeededRng::new(5);
        let table = Tensor::new(vec![10, 4], (0..40).map(|_| rng.symmetric(1.0)).collect()).unwrap();
        let wq = Tensor::new(vec![3, 4], (0..12).map(|_| rng.symmetric(1.0)).collect()).unwrap();
        let wk = Tensor::new(vec![4, 4], (0..16).map(|_| rng.symmetric(1.0)).collect()).unwrap();
        let q = [0.3f32, -1.1, 0.8];
        let att = token_attention(&q, &table, &wq, &wk).unwrap();
        let qp: Vec<f64> = (0..4).map(|j| (0..3).map(|i| q[i] as f64 * wq.data()[i * 4 + j] as f64).sum()).collect();
        let scores: Vec<f64> = (0..10)
            .map(|n| {
                let kp: Vec<f64> = (0..4).map(|j| (0..4).map(|i| table.data()[n * 4 + i] as f64 * wk.data()[i * 4 + j] as f64).sum()).collect();
                qp.iter().zip(&kp).map(|(a, b)| a * b).sum::<f64>() / 2.0
            })
            .collect();
        let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = scores.iter().map(|s| (s - m).exp()).sum();
        let w: Vec<f64> = scores.iter().map(|s| (s - m).exp() / z).collect();
        assert!((att.weights.iter().sum::<f32>() - 1.0).abs() < 1e-6);
        for j in 0..4 {
            let expect: f64 = (0..10).map(|n| w[n] * (table.data()[n * 4 + j] as f64).tanh()).sum();
            assert!((att.output[j] as f64 - expect).abs() < 1e-6);
        }
    }

    #[test]
    fn absent_neighbours_give_zero_query() {
        let w = weights();
        let q = context_query(None, None, &w).unwrap();
        assert_eq!(q, vec![0.0; 256]);
        let att = table_attention(&w, "context_tokens", &q).unwrap();
        // zero query => equal logits => uniform weights
        for x in &att.weights {
            assert!((x - 0.1).abs() < 1e-6);
        }
        assert_eq!(context_embed(None, None, &w).unwrap().as_slice().len(), 256);
    }

    #[test]
    fn shared_encoder_for_both_neighbours() {
        let w = weights();
        let e = enc(&w, &[1, 2, 3, 4]);
        let q = context_query(Some(&e), Some(&e), &w).unwrap();
        assert_eq!(q[..128], q[128..]);
    }

    #[test]
    fn swapping_neighbours_swaps_halves() {
        let w = weights();
        let (a, b) = (enc(&w, &[1, 2]), enc(&w, &[5, 6, 7]));
        let ab = context_query(Some(&a), Some(&b), &w).unwrap();
        let ba = context_query(Some(&b), Some(&a), &w).unwrap();
        assert_ne!(ab, ba);
        assert_eq!(ab[..128], ba[128..]);
        assert_eq!(ab[128..], ba[..128]);
    }

    #[test]
    fn acoustic_embedding_width_purity_sensitivity() {
        let w = weights();
        let r1 = MelSpectrogram::synthetic(30, 1);
        let r2 = MelSpectrogram::synthetic(30, 2);
        let a = acoustic_embed(&r1, &w).unwrap();
        assert_eq!(a.as_slice().len(), 128);
        assert_eq!(a, acoustic_embed(&r1, &w).unwrap());
        assert_ne!(a, acoustic_embed(&r2, &w).unwrap());
    }

    #[test]
    fn concat_duplicates_conditions() {
        let w = weights();
        let e = enc(&w, &[0, 3, 3, 1]);
        let ctx = context_embed(None, Some(&e), &w).unwrap();
        let ac = acoustic_embed(&MelSpectrogram::synthetic(8, 3), &w).unwrap();
        let m = condition_concat(&e, &ctx, &ac).unwrap();
        assert_eq!(m.width(), 896);
        for t in 0..4 {
            assert_eq!(&m.tensor().row(t)[..512], e.tensor().row(t));
            assert_eq!(m.tensor().row(t)[512..], m.tensor().row(0)[512..]);
        }
        let single = enc(&w, &[2]);
        let m1 = condition_concat(&single, &ctx, &ac).unwrap();
        let joined: Vec<f32> = single.tensor().row(0).iter().chain(ctx.as_slice()).chain(ac.as_slice()).copied().collect();
        assert_eq!(m1.tensor().row(0), &joined[..]);
    }
}
