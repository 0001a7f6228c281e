use super::types::{CONDITION_DIM, MEL_DIM};

/// Decoder sizes. Defaults follow the usual Tacotron 2 settings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecoderConfig {
    pub prenet_dims: Vec<usize>,
    pub attention_rnn_dim: usize,
    pub decoder_rnn_dim: usize,
    pub attention_dim: usize,
    pub location_filters: usize,
    pub location_kernel: usize,
    pub postnet_channels: usize,
    pub postnet_layers: usize,
    pub postnet_kernel: usize,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            prenet_dims: vec![256, 256],
            attention_rnn_dim: 1024,
            decoder_rnn_dim: 1024,
            attention_dim: 128,
            location_filters: 32,
            location_kernel: 31,
            postnet_channels: 512,
            postnet_layers: 5,
            postnet_kernel: 5,
        }
    }
}

impl DecoderConfig {
    /// Narrow recurrences and postnet for desk-scale runs; the attention
    /// block keeps its full size.
    pub fn small() -> Self {
        DecoderConfig {
            prenet_dims: vec![64, 64],
            attention_rnn_dim: 64,
            decoder_rnn_dim: 64,
            attention_dim: 128,
            location_filters: 32,
            location_kernel: 31,
            postnet_channels: 64,
            postnet_layers: 5,
            postnet_kernel: 5,
        }
    }

    pub fn prenet_out(&self) -> usize {
        *self.prenet_dims.last().unwrap_or(&MEL_DIM)
    }

    pub fn attention_rnn_input(&self) -> usize {
        self.prenet_out() + CONDITION_DIM
    }

    pub fn decoder_rnn_input(&self) -> usize {
        self.attention_rnn_dim + CONDITION_DIM
    }

    pub fn projection_input(&self) -> usize {
        self.decoder_rnn_dim + CONDITION_DIM
    }
}

/// Full network configuration. Condition widths (512/256/128) and the mel
/// width (80) are fixed; everything else is a free size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelConfig {
    pub n_phonemes: usize,
    pub encoder_conv_layers: usize,
    pub encoder_conv_channels: usize,
    pub encoder_kernel: usize,
    pub ref_filters: Vec<usize>,
    pub ref_gru_dim: usize,
    pub token_count: usize,
    pub decoder: DecoderConfig,
}

impl ModelConfig {
    pub fn new(n_phonemes: usize) -> Self {
        ModelConfig {
            n_phonemes,
            encoder_conv_layers: 3,
            encoder_conv_channels: 512,
            encoder_kernel: 5,
            ref_filters: vec![32, 32, 64, 64, 128, 128],
            ref_gru_dim: 128,
            token_count: 10,
            decoder: DecoderConfig::default(),
        }
    }

    /// Desk-scale sizes: narrow encoder convs, reference encoders and
    /// decoder recurrences. All interface widths are unchanged.
    pub fn small(n_phonemes: usize) -> Self {
        ModelConfig {
            n_phonemes,
            encoder_conv_layers: 3,
            encoder_conv_channels: 64,
            encoder_kernel: 5,
            ref_filters: vec![8, 8, 16, 16, 32, 32],
            ref_gru_dim: 32,
            token_count: 10,
            decoder: DecoderConfig::small(),
        }
    }

    pub fn ref_channels_out(&self) -> usize {
        *self.ref_filters.last().expect("reference encoder has conv layers")
    }

    /// Width of a dimension after the stride-2 conv stack.
    pub fn ref_reduced(&self, n: usize) -> usize {
        (0..self.ref_filters.len()).fold(n, |acc, _| acc.div_ceil(2))
    }
}
