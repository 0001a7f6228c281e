use super::ops::{affine_into, softmax_inplace};
use super::Tensor;
use crate::{Error, Result};

/// Output of a single attention read.
#[derive(Debug, Clone, PartialEq)]
pub struct Attention {
    pub context: Vec<f32>,
    pub weights: Vec<f32>,
}

/// Scaled dot-product attention with learned projections.
///
/// `q = query · w_query`, `k_n = keys_n · w_key` (both into a common width
/// `A`), `weights = softmax(q · k_n / sqrt(A))`, `context = Σ weights_n values_n`.
pub fn dot_attention(
    query: &[f32],
    keys: &Tensor,
    values: &Tensor,
    w_query: &Tensor,
    w_key: &Tensor,
) -> Result<Attention> {
    if keys.rank() != 2 || values.rank() != 2 || keys.dim(0) != values.dim(0) {
        return Err(Error::shape(
            "dot_attention",
            format!("keys {:?}, values {:?}", keys.shape(), values.shape()),
        ));
    }
    let a = w_query.dim(1);
    if w_query.shape() != [query.len(), a] || w_key.shape() != [keys.dim(1), a] {
        return Err(Error::shape(
            "dot_attention",
            format!(
                "projections {:?} / {:?} for query {} and keys {:?}",
                w_query.shape(),
                w_key.shape(),
                query.len(),
                keys.shape()
            ),
        ));
    }
    let n = keys.dim(0);
    let mut q = vec![0.0; a];
    affine_into(&mut q, query, w_query.data(), None);
    let scale = 1.0 / (a as f32).sqrt();
    let mut k = vec![0.0; a];
    let mut weights = Vec::with_capacity(n);
    for row in 0..n {
        affine_into(&mut k, keys.row(row), w_key.data(), None);
        let dot: f32 = q.iter().zip(&k).map(|(x, y)| x * y).sum();
        weights.push(dot * scale);
    }
    softmax_inplace(&mut weights);
    let mut context = vec![0.0; values.dim(1)];
    for (row, &w) in weights.iter().enumerate() {
        for (c, &v) in context.iter_mut().zip(values.row(row)) {
            *c += w * v;
        }
    }
    Ok(Attention { context, weights })
}
