use std::collections::BTreeMap;

use super::config::{DecoderConfig, ModelConfig};
use super::reference::{ACOUSTIC_REF, CONTEXT_REF};
use super::types::{ACOUSTIC_DIM, CONDITION_DIM, CONTEXT_DIM, ENCODER_DIM, MEL_DIM, REF_EMBED_DIM};
use crate::nn::{init_weights, Tensor, TensorSpec};
use crate::{Error, Result};

fn batch_norm(specs: &mut Vec<TensorSpec>, prefix: &str, channels: usize) {
    specs.push(TensorSpec::constant(format!("{prefix}.bn.mean"), &[channels], 0.0));
    specs.push(TensorSpec::constant(format!("{prefix}.bn.var"), &[channels], 1.0));
    specs.push(TensorSpec::constant(format!("{prefix}.bn.gamma"), &[channels], 1.0));
    specs.push(TensorSpec::constant(format!("{prefix}.bn.beta"), &[channels], 0.0));
}

fn lstm(specs: &mut Vec<TensorSpec>, prefix: &str, d_in: usize, hidden: usize) {
    specs.push(TensorSpec::glorot(format!("{prefix}.w_ih"), &[d_in, 4 * hidden]));
    specs.push(TensorSpec::glorot(format!("{prefix}.w_hh"), &[hidden, 4 * hidden]));
    specs.push(TensorSpec::glorot(format!("{prefix}.b"), &[4 * hidden]));
}

fn reference_encoder(specs: &mut Vec<TensorSpec>, prefix: &str, cfg: &ModelConfig, input_dim: usize) {
    let mut c_in = 1;
    for (i, &f) in cfg.ref_filters.iter().enumerate() {
        let name = format!("{prefix}.conv{i}");
        specs.push(TensorSpec::glorot(format!("{name}.weight"), &[f, c_in, 3, 3]));
        batch_norm(specs, &name, f);
        c_in = f;
    }
    let gru_in = cfg.ref_channels_out() * cfg.ref_reduced(input_dim);
    let h = cfg.ref_gru_dim;
    specs.push(TensorSpec::glorot(format!("{prefix}.gru.w_ih"), &[gru_in, 3 * h]));
    specs.push(TensorSpec::glorot(format!("{prefix}.gru.w_hh"), &[h, 3 * h]));
    specs.push(TensorSpec::glorot(format!("{prefix}.gru.b_ih"), &[3 * h]));
    specs.push(TensorSpec::glorot(format!("{prefix}.gru.b_hh"), &[3 * h]));
    specs.push(TensorSpec::glorot(format!("{prefix}.fc.weight"), &[h, REF_EMBED_DIM]));
    specs.push(TensorSpec::glorot(format!("{prefix}.fc.bias"), &[REF_EMBED_DIM]));
}

fn token_table(specs: &mut Vec<TensorSpec>, prefix: &str, tokens: usize, query_dim: usize, dim: usize) {
    specs.push(TensorSpec::glorot(format!("{prefix}.table"), &[tokens, dim]));
    specs.push(TensorSpec::glorot(format!("{prefix}.query"), &[query_dim, dim]));
    specs.push(TensorSpec::glorot(format!("{prefix}.key"), &[dim, dim]));
}

fn decoder(specs: &mut Vec<TensorSpec>, d: &DecoderConfig) {
    let mut width = MEL_DIM;
    for (i, &p) in d.prenet_dims.iter().enumerate() {
        specs.push(TensorSpec::glorot(format!("decoder.prenet{i}.weight"), &[width, p]));
        specs.push(TensorSpec::glorot(format!("decoder.prenet{i}.bias"), &[p]));
        width = p;
    }
    lstm(specs, "decoder.attention_rnn", d.attention_rnn_input(), d.attention_rnn_dim);
    let a = d.attention_dim;
    specs.push(TensorSpec::glorot("decoder.attention.query", &[d.attention_rnn_dim, a]));
    specs.push(TensorSpec::glorot("decoder.attention.memory", &[CONDITION_DIM, a]));
    specs.push(TensorSpec::glorot(
        "decoder.attention.location_conv",
        &[d.location_filters, 2, d.location_kernel],
    ));
    specs.push(TensorSpec::glorot("decoder.attention.location_dense", &[d.location_filters, a]));
    specs.push(TensorSpec::glorot("decoder.attention.v", &[a]));
    lstm(specs, "decoder.decoder_rnn", d.decoder_rnn_input(), d.decoder_rnn_dim);
    specs.push(TensorSpec::glorot("decoder.mel_proj.weight", &[d.projection_input(), MEL_DIM]));
    specs.push(TensorSpec::glorot("decoder.mel_proj.bias", &[MEL_DIM]));
    specs.push(TensorSpec::glorot("decoder.stop_proj.weight", &[d.projection_input(), 1]));
    specs.push(TensorSpec::glorot("decoder.stop_proj.bias", &[1]));
    for i in 0..d.postnet_layers {
        let c_in = if i == 0 { MEL_DIM } else { d.postnet_channels };
        let c_out = if i + 1 == d.postnet_layers { MEL_DIM } else { d.postnet_channels };
        let name = format!("postnet.conv{i}");
        specs.push(TensorSpec::glorot(format!("{name}.weight"), &[c_out, c_in, d.postnet_kernel]));
        specs.push(TensorSpec::glorot(format!("{name}.bias"), &[c_out]));
        batch_norm(specs, &name, c_out);
    }
}

/// The full manifest of tensor names, shapes and initializers for `cfg`.
pub fn tensor_specs(cfg: &ModelConfig) -> Vec<TensorSpec> {
    let mut specs = Vec::new();
    specs.push(TensorSpec::glorot("embedding", &[cfg.n_phonemes, ENCODER_DIM]));
    let mut c_in = ENCODER_DIM;
    for i in 0..cfg.encoder_conv_layers {
        let name = format!("encoder.conv{i}");
        let c = cfg.encoder_conv_channels;
        specs.push(TensorSpec::glorot(format!("{name}.weight"), &[c, c_in, cfg.encoder_kernel]));
        specs.push(TensorSpec::glorot(format!("{name}.bias"), &[c]));
        batch_norm(&mut specs, &name, c);
        c_in = c;
    }
    lstm(&mut specs, "encoder.lstm.fwd", c_in, ENCODER_DIM / 2);
    lstm(&mut specs, "encoder.lstm.bwd", c_in, ENCODER_DIM / 2);

    // one context reference encoder, applied to both neighbours
    reference_encoder(&mut specs, CONTEXT_REF, cfg, ENCODER_DIM);
    reference_encoder(&mut specs, ACOUSTIC_REF, cfg, MEL_DIM);
    token_table(&mut specs, "context_tokens", cfg.token_count, 2 * REF_EMBED_DIM, CONTEXT_DIM);
    token_table(&mut specs, "acoustic_tokens", cfg.token_count, REF_EMBED_DIM, ACOUSTIC_DIM);
    decoder(&mut specs, &cfg.decoder);
    specs
}

/// Immutable named-tensor store for the whole network.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelWeights {
    config: ModelConfig,
    tensors: BTreeMap<String, Tensor>,
}

impl ModelWeights {
    /// Seeded random initialization of every tensor in the manifest.
    pub fn generate(config: ModelConfig, seed: u64) -> Self {
        let tensors = init_weights(&tensor_specs(&config), seed);
        ModelWeights { config, tensors }
    }

    /// Validates `tensors` against the manifest implied by their own shapes.
    pub fn from_tensors(tensors: BTreeMap<String, Tensor>) -> Result<Self> {
        let config = infer_config(&tensors)?;
        let specs = tensor_specs(&config);
        if specs.len() != tensors.len() {
            let expected: std::collections::BTreeSet<&str> = specs.iter().map(|s| s.name.as_str()).collect();
            let extra: Vec<&String> = tensors.keys().filter(|k| !expected.contains(k.as_str())).collect();
            return Err(Error::Format {
                what: "weights",
                reason: format!(
                    "manifest expects {} tensors, file has {} (unexpected: {extra:?})",
                    specs.len(),
                    tensors.len()
                ),
            });
        }
        for spec in &specs {
            let t = tensors
                .get(&spec.name)
                .ok_or_else(|| Error::MissingTensor(spec.name.clone()))?;
            if t.shape() != spec.shape.as_slice() {
                return Err(Error::Format {
                    what: "weights",
                    reason: format!("{}: expected {:?}, got {:?}", spec.name, spec.shape, t.shape()),
                });
            }
            if !t.is_finite() {
                return Err(Error::Format {
                    what: "weights",
                    reason: format!("{}: non-finite value", spec.name),
                });
            }
        }
        Ok(ModelWeights { config, tensors })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn tensors(&self) -> &BTreeMap<String, Tensor> {
        &self.tensors
    }

    pub fn get(&self, name: &str) -> Result<&Tensor> {
        self.tensors
            .get(name)
            .ok_or_else(|| Error::MissingTensor(name.to_string()))
    }

    /// Lookup for names guaranteed by manifest validation.
    pub(crate) fn t(&self, name: &str) -> &Tensor {
        self.tensors
            .get(name)
            .unwrap_or_else(|| panic!("validated weights lack {name}"))
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors.values().map(Tensor::len).sum()
    }

    pub fn tensor_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.tensors.get_mut(name)
    }
}

fn count_indexed(tensors: &BTreeMap<String, Tensor>, prefix: &str, suffix: &str) -> usize {
    (0..).take_while(|i| tensors.contains_key(&format!("{prefix}{i}{suffix}"))).count()
}

fn infer_config(tensors: &BTreeMap<String, Tensor>) -> Result<ModelConfig> {
    let get = |name: &str| tensors.get(name).ok_or_else(|| Error::MissingTensor(name.to_string()));
    let dim = |name: &str, axis: usize| -> Result<usize> {
        let t = get(name)?;
        if axis >= t.rank() {
            return Err(Error::Format {
                what: "weights",
                reason: format!("{name} has rank {}", t.rank()),
            });
        }
        Ok(t.dim(axis))
    };
    let encoder_conv_layers = count_indexed(tensors, "encoder.conv", ".weight");
    let (encoder_conv_channels, encoder_kernel) = if encoder_conv_layers > 0 {
        (dim("encoder.conv0.weight", 0)?, dim("encoder.conv0.weight", 2)?)
    } else {
        (ENCODER_DIM, 1)
    };
    let ref_layers = count_indexed(tensors, &format!("{CONTEXT_REF}.conv"), ".weight");
    if ref_layers == 0 {
        return Err(Error::MissingTensor(format!("{CONTEXT_REF}.conv0.weight")));
    }
    let ref_filters = (0..ref_layers)
        .map(|i| dim(&format!("{CONTEXT_REF}.conv{i}.weight"), 0))
        .collect::<Result<Vec<_>>>()?;
    let prenet_layers = count_indexed(tensors, "decoder.prenet", ".weight");
    let prenet_dims = (0..prenet_layers)
        .map(|i| dim(&format!("decoder.prenet{i}.weight"), 1))
        .collect::<Result<Vec<_>>>()?;
    let postnet_layers = count_indexed(tensors, "postnet.conv", ".weight");
    if postnet_layers < 2 {
        return Err(Error::Format {
            what: "weights",
            reason: "postnet needs at least 2 layers".into(),
        });
    }
    Ok(ModelConfig {
        n_phonemes: dim("embedding", 0)?,
        encoder_conv_layers,
        encoder_conv_channels,
        encoder_kernel,
        ref_filters,
        ref_gru_dim: dim(&format!("{CONTEXT_REF}.gru.w_hh"), 0)?,
        token_count: dim("context_tokens.table", 0)?,
        decoder: DecoderConfig {
            prenet_dims,
            attention_rnn_dim: dim("decoder.attention_rnn.w_hh", 0)?,
            decoder_rnn_dim: dim("decoder.decoder_rnn.w_hh", 0)?,
            attention_dim: dim("decoder.attention.v", 0)?,
            location_filters: dim("decoder.attention.location_conv", 0)?,
            location_kernel: dim("decoder.attention.location_conv", 2)?,
            postnet_channels: dim("postnet.conv0.weight", 0)?,
            postnet_layers,
            postnet_kernel: dim("postnet.conv0.weight", 2)?,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Init;

    #[test]
    fn manifest_round_trips_through_inference() {
        for cfg in [ModelConfig::new(7), ModelConfig::small(12)] {
            let w = ModelWeights::generate(cfg.clone(), 1);
            assert_eq!(w.config(), &cfg);
            let again = ModelWeights::from_tensors(w.tensors().clone()).unwrap();
            assert_eq!(again, w);
        }
    }

    #[test]
    fn stated_dimensions() {
        let w = ModelWeights::generate(ModelConfig::new(5), 3);
        assert_eq!(w.t("context_tokens.table").shape(), [10, 256]);
        assert_eq!(w.t("acoustic_tokens.table").shape(), [10, 128]);
        assert_eq!(w.t(&format!("{CONTEXT_REF}.gru.w_ih")).shape(), [1024, 384]);
        assert_eq!(w.t(&format!("{ACOUSTIC_REF}.gru.w_ih")).shape(), [256, 384]);
        assert_eq!(w.t(&format!("{CONTEXT_REF}.fc.weight")).shape(), [128, 128]);
        assert_eq!(w.t("encoder.lstm.fwd.w_hh").shape(), [256, 1024]);
        // one set of context reference-encoder parameters, no per-neighbour copies
        assert!(!w.tensors().keys().any(|k| k.contains("prev") || k.contains("next")));

        // 512 → 8 after six stride-2 convs, 32 filters, 32-d GRU
        let small = ModelWeights::generate(ModelConfig::small(5), 3);
        assert_eq!(small.t(&format!("{CONTEXT_REF}.gru.w_ih")).shape(), [256, 96]);
        assert_eq!(small.t(&format!("{CONTEXT_REF}.fc.weight")).shape(), [32, 128]);
        assert_eq!(small.t("encoder.lstm.fwd.w_hh").shape(), [256, 1024]);
    }

    #[test]
    fn distinct_names_get_distinct_values() {
        let specs = tensor_specs(&ModelConfig::small(6));
        let w = init_weights(&specs, 77);
        let random: Vec<&TensorSpec> = specs.iter().filter(|s| s.init == Init::Glorot).collect();
        for (i, a) in random.iter().enumerate() {
            for b in &random[i + 1..] {
                let (x, y) = (&w[&a.name], &w[&b.name]);
                let n = x.len().min(y.len()).min(16);
                assert_ne!(x.data()[..n], y.data()[..n], "{} vs {}", a.name, b.name);
            }
        }
    }

    #[test]
    fn validation_failures() {
        let w = ModelWeights::generate(ModelConfig::small(5), 3);
        let mut missing = w.tensors().clone();
        missing.remove("decoder.stop_proj.bias");
        assert!(ModelWeights::from_tensors(missing).is_err());
        let mut extra = w.tensors().clone();
        extra.insert("junk".into(), Tensor::zeros(&[1]));
        assert!(ModelWeights::from_tensors(extra).is_err());
        let mut wrong = w.tensors().clone();
        wrong.insert("decoder.mel_proj.bias".into(), Tensor::zeros(&[81]));
        assert!(ModelWeights::from_tensors(wrong).is_err());
    }
}
