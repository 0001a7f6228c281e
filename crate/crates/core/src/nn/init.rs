use std::collections::BTreeMap;

use super::{SeededRng, Tensor};

/// How a named tensor is initialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    /// Uniform in `±sqrt(6 / (fan_in + fan_out))` from a name-salted stream.
    Glorot,
    /// Constant value (batch-norm statistics and affine defaults).
    Constant(u32),
}

impl Init {
    pub fn constant(v: f32) -> Self {
        Init::Constant(v.to_bits())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorSpec {
    pub name: String,
    pub shape: Vec<usize>,
    pub init: Init,
}

impl TensorSpec {
    pub fn glorot(name: impl Into<String>, shape: &[usize]) -> Self {
        TensorSpec {
            name: name.into(),
            shape: shape.to_vec(),
            init: Init::Glorot,
        }
    }

    pub fn constant(name: impl Into<String>, shape: &[usize], value: f32) -> Self {
        TensorSpec {
            name: name.into(),
            shape: shape.to_vec(),
            init: Init::constant(value),
        }
    }

    /// `(fan_in, fan_out)`: rank 1 uses its length for both; rank 2 is
    /// `[in, out]`; higher ranks are `[out, in, receptive...]`.
    pub fn fans(&self) -> (usize, usize) {
        match self.shape.as_slice() {
            [n] => (*n, *n),
            [i, o] => (*i, *o),
            [o, i, rest @ ..] => {
                let r: usize = rest.iter().product();
                (i * r, o * r)
            }
            [] => (1, 1),
        }
    }

    pub fn glorot_bound(&self) -> f32 {
        let (fi, fo) = self.fans();
        (6.0 / (fi + fo) as f64).sqrt() as f32
    }
}

/// Builds every tensor in `specs`, each from its own `(seed, name)` stream.
pub fn init_weights(specs: &[TensorSpec], seed: u64) -> BTreeMap<String, Tensor> {
    specs
        .iter()
        .map(|spec| {
            let n: usize = spec.shape.iter().product();
            let data = match spec.init {
                Init::Constant(bits) => vec![f32::from_bits(bits); n],
                Init::Glorot => {
                    let bound = spec.glorot_bound();
                    let mut rng = SeededRng::for_name(seed, &spec.name);
                    (0..n).map(|_| rng.symmetric(bound)).collect()
                }
            };
            let t = Tensor::new(spec.shape.clone(), data).expect("spec shape is non-empty");
            (spec.name.clone(), t)
        })
        .collect()
}
