use super::encoder::{batch_norm_params, lstm_params};
use super::types::{ConditionedMemory, MelSpectrogram, CONDITION_DIM, MEL_DIM};
use super::weights::ModelWeights;
use crate::nn::{
    conv1d, linear_vec, relu_inplace, sigmoid_scalar, softmax_inplace, LstmParams, LstmState,
    SeededRng, Tensor,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    StopToken,
    FrameLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeLimits {
    pub max_frames: usize,
    /// Decoding stops once `sigmoid(stop_logit)` exceeds this; values >= 1
    /// never stop early.
    pub stop_threshold: f32,
    /// Prenet dropout (p = 0.5) keyed by this seed; `None` disables it.
    pub prenet_dropout: Option<u64>,
    /// Keep every step's attention weights in the output.
    pub record_alignments: bool,
}

impl DecodeLimits {
    pub fn new(max_frames: usize) -> Self {
        DecodeLimits {
            max_frames,
            stop_threshold: 0.5,
            prenet_dropout: None,
            record_alignments: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutput {
    pub mel: MelSpectrogram,
    pub stopped_by: StopReason,
    /// Autoregressive steps taken (equals the frame count).
    pub steps: usize,
    /// Per-step attention weights over memory rows, when recorded.
    pub alignments: Vec<Vec<f32>>,
}

struct Params<'a> {
    prenet: Vec<(&'a Tensor, &'a Tensor)>,
    attention_rnn: LstmParams<'a>,
    decoder_rnn: LstmParams<'a>,
    query: &'a Tensor,
    memory: &'a Tensor,
    location_conv: &'a Tensor,
    location_dense: &'a Tensor,
    v: &'a Tensor,
    mel_w: &'a Tensor,
    mel_b: &'a Tensor,
    stop_w: &'a Tensor,
    stop_b: &'a Tensor,
}

impl<'a> Params<'a> {
    fn resolve(w: &'a ModelWeights) -> Self {
        let prenet = (0..w.config().decoder.prenet_dims.len())
            .map(|i| {
                (
                    w.t(&format!("decoder.prenet{i}.weight")),
                    w.t(&format!("decoder.prenet{i}.bias")),
                )
            })
            .collect();
        Params {
            prenet,
            attention_rnn: lstm_params(w, "decoder.attention_rnn"),
            decoder_rnn: lstm_params(w, "decoder.decoder_rnn"),
            query: w.t("decoder.attention.query"),
            memory: w.t("decoder.attention.memory"),
            location_conv: w.t("decoder.attention.location_conv"),
            location_dense: w.t("decoder.attention.location_dense"),
            v: w.t("decoder.attention.v"),
            mel_w: w.t("decoder.mel_proj.weight"),
            mel_b: w.t("decoder.mel_proj.bias"),
            stop_w: w.t("decoder.stop_proj.weight"),
            stop_b: w.t("decoder.stop_proj.bias"),
        }
    }
}

/// Location-sensitive attention read: energies
/// `v · tanh(W_q h + W_m m_t + W_l conv([α_prev, Σα])_t)` over memory rows.
fn attend(
    p: &Params<'_>,
    query_h: &[f32],
    processed_memory: &Tensor,
    prev_weights: &[f32],
    cumulative: &[f32],
    weights_out: &mut [f32],
) -> Result<()> {
    let steps = prev_weights.len();
    let a = p.v.len();
    let q = linear_vec(query_h, p.query, None);
    let mut loc_in = Vec::with_capacity(2 * steps);
    loc_in.extend_from_slice(prev_weights);
    loc_in.extend_from_slice(cumulative);
    let loc = conv1d(&Tensor::new(vec![2, steps], loc_in)?, p.location_conv, None)?;
    let filters = loc.dim(0);
    let mut feat = vec![0.0f32; filters];
    let mut proj = vec![0.0f32; a];
    for (t, energy) in weights_out.iter_mut().enumerate() {
        for (f, x) in feat.iter_mut().enumerate() {
            *x = loc.data()[f * steps + t];
        }
        crate::nn::ops_affine(&mut proj, &feat, p.location_dense.data(), None);
        let pm = processed_memory.row(t);
        let mut e = 0.0f32;
        for k in 0..a {
            e += p.v.data()[k] * (q[k] + pm[k] + proj[k]).tanh();
        }
        *energy = e;
    }
    softmax_inplace(weights_out);
    Ok(())
}

fn postnet(weights: &ModelWeights, frames: &Tensor) -> Result<Tensor> {
    let layers = weights.config().decoder.postnet_layers;
    let mut x = frames.transpose();
    for i in 0..layers {
        let name = format!("postnet.conv{i}");
        let mut y = conv1d(
            &x,
            weights.t(&format!("{name}.weight")),
            Some(weights.t(&format!("{name}.bias"))),
        )?;
        crate::nn::batch_norm_inplace(&mut y, &batch_norm_params(weights, &name))?;
        if i + 1 < layers {
            y.data_mut().iter_mut().for_each(|v| *v = v.tanh());
        }
        x = y;
    }
    let residual = x.transpose();
    let data = frames
        .data()
        .iter()
        .zip(residual.data())
        .map(|(a, b)| a + b)
        .collect();
    Tensor::new(frames.shape().to_vec(), data)
}

/// Autoregressive mel decoding over a conditioned memory.
///
/// Each step: prenet on the previous frame (zeros at the start), attention
/// LSTM on `[prenet ‖ previous context]`, location-sensitive attention,
/// decoder LSTM on `[attention state ‖ context]`, then linear projections of
/// `[decoder state ‖ context]` to an 80-d frame and a stop logit. A residual
/// postnet is added over the whole frame sequence at the end.
pub fn decode_mel(
    memory: &ConditionedMemory,
    weights: &ModelWeights,
    limits: &DecodeLimits,
) -> Result<DecodeOutput> {
    if limits.max_frames == 0 {
        return Err(Error::InvalidArgument("max_frames must be >= 1".into()));
    }
    if memory.width() != CONDITION_DIM {
        return Err(Error::shape("decode_mel", format!("memory width {}", memory.width())));
    }
    let cfg = &weights.config().decoder;
    let p = Params::resolve(weights);
    let mem = memory.tensor();
    let steps_in = mem.dim(0);

    let processed_memory = crate::nn::linear(mem, p.memory, None)?;
    let mut att_state = LstmState::zeros(cfg.attention_rnn_dim);
    let mut dec_state = LstmState::zeros(cfg.decoder_rnn_dim);
    let mut gates = Vec::new();
    let mut att_weights = vec![0.0f32; steps_in];
    let mut cumulative = vec![0.0f32; steps_in];
    let mut new_weights = vec![0.0f32; steps_in];
    let mut context = vec![0.0f32; CONDITION_DIM];
    let mut prev_frame = vec![0.0f32; MEL_DIM];
    let mut frames: Vec<f32> = Vec::new();
    let mut alignments = Vec::new();
    let mut dropout = limits.prenet_dropout.map(|s| SeededRng::for_name(s, "prenet_dropout"));
    let mut proj_in = vec![0.0f32; cfg.decoder_rnn_dim + CONDITION_DIM];
    let mut stopped_by = StopReason::FrameLimit;

    for _ in 0..limits.max_frames {
        let mut x = prev_frame.clone();
        for &(w, b) in &p.prenet {
            x = linear_vec(&x, w, Some(b));
            relu_inplace(&mut x);
            if let Some(rng) = dropout.as_mut() {
                for v in x.iter_mut() {
                    *v = if rng.unit() < 0.5 { 0.0 } else { *v * 2.0 };
                }
            }
        }
        p.attention_rnn.step(&[&x, &context], &mut att_state, &mut gates);

        attend(&p, &att_state.h, &processed_memory, &att_weights, &cumulative, &mut new_weights)?;
        std::mem::swap(&mut att_weights, &mut new_weights);
        for (c, w) in cumulative.iter_mut().zip(&att_weights) {
            *c += w;
        }
        context.fill(0.0);
        for (t, &w) in att_weights.iter().enumerate() {
            for (c, &m) in context.iter_mut().zip(mem.row(t)) {
                *c += w * m;
            }
        }
        if limits.record_alignments {
            alignments.push(att_weights.clone());
        }

        p.decoder_rnn.step(&[&att_state.h, &context], &mut dec_state, &mut gates);
        proj_in[..cfg.decoder_rnn_dim].copy_from_slice(&dec_state.h);
        proj_in[cfg.decoder_rnn_dim..].copy_from_slice(&context);
        let frame = linear_vec(&proj_in, p.mel_w, Some(p.mel_b));
        let stop_logit = linear_vec(&proj_in, p.stop_w, Some(p.stop_b))[0];
        frames.extend_from_slice(&frame);
        prev_frame = frame;
        if sigmoid_scalar(stop_logit) > limits.stop_threshold {
            stopped_by = StopReason::StopToken;
            break;
        }
    }
    let n = frames.len() / MEL_DIM;
    let raw = Tensor::new(vec![n, MEL_DIM], frames)?;
    let refined = postnet(weights, &raw)?;
    Ok(DecodeOutput {
        mel: MelSpectrogram::new(refined)?,
        stopped_by,
        steps: n,
        alignments,
    })
}
