use super::Tensor;
use crate::{Error, Result};

pub const BN_EPSILON: f32 = 1e-5;

/// `out = b + x W` for a single vector; `w` is `[x.len(), out.len()]` row-major.
#[inline]
pub(crate) fn affine_into(out: &mut [f32], x: &[f32], w: &[f32], b: Option<&[f32]>) {
    let n = out.len();
    debug_assert_eq!(w.len(), x.len() * n);
    match b {
        Some(b) => out.copy_from_slice(b),
        None => out.fill(0.0),
    }
    for (i, &xi) in x.iter().enumerate() {
        let row = &w[i * n..(i + 1) * n];
        for (o, &wij) in out.iter_mut().zip(row) {
            *o += xi * wij;
        }
    }
}

/// `out += x W` without resetting `out`.
#[inline]
pub(crate) fn accumulate_into(out: &mut [f32], x: &[f32], w: &[f32]) {
    let n = out.len();
    debug_assert_eq!(w.len(), x.len() * n);
    for (i, &xi) in x.iter().enumerate() {
        let row = &w[i * n..(i + 1) * n];
        for (o, &wij) in out.iter_mut().zip(row) {
            *o += xi * wij;
        }
    }
}

/// `x W + b` over the last axis of `x` (`[D_in]` or `[N, D_in]`).
pub fn linear(x: &Tensor, w: &Tensor, b: Option<&Tensor>) -> Result<Tensor> {
    if w.rank() != 2 {
        return Err(Error::shape("linear", "weight must be rank 2"));
    }
    let (d_in, d_out) = (w.dim(0), w.dim(1));
    let last = *x.shape().last().unwrap();
    if last != d_in || x.rank() > 2 {
        return Err(Error::shape(
            "linear",
            format!("input {:?} vs weight {:?}", x.shape(), w.shape()),
        ));
    }
    if let Some(b) = b {
        b.expect_shape("linear bias", &[d_out])?;
    }
    let rows = x.len() / d_in;
    let mut out = vec![0.0; rows * d_out];
    for r in 0..rows {
        affine_into(
            &mut out[r * d_out..(r + 1) * d_out],
            &x.data()[r * d_in..(r + 1) * d_in],
            w.data(),
            b.map(Tensor::data),
        );
    }
    let mut shape = x.shape().to_vec();
    *shape.last_mut().unwrap() = d_out;
    Tensor::new(shape, out)
}

/// Slice form of [`linear`] for a single vector.
pub fn linear_vec(x: &[f32], w: &Tensor, b: Option<&Tensor>) -> Vec<f32> {
    let mut out = vec![0.0; w.dim(1)];
    affine_into(&mut out, x, w.data(), b.map(Tensor::data));
    out
}

pub fn relu(x: &Tensor) -> Tensor {
    let mut y = x.clone();
    relu_inplace(y.data_mut());
    y
}

pub fn relu_inplace(x: &mut [f32]) {
    for v in x {
        *v = v.max(0.0);
    }
}

pub fn tanh_op(x: &Tensor) -> Tensor {
    let mut y = x.clone();
    y.data_mut().iter_mut().for_each(|v| *v = v.tanh());
    y
}

#[inline]
pub fn sigmoid_scalar(v: f32) -> f32 {
    1.0 / (1.0 + (-v).exp())
}

pub fn sigmoid(x: &Tensor) -> Tensor {
    let mut y = x.clone();
    y.data_mut().iter_mut().for_each(|v| *v = sigmoid_scalar(*v));
    y
}

/// In-place max-subtracted softmax.
pub fn softmax_inplace(x: &mut [f32]) {
    let max = x.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let mut sum = 0.0;
    for v in x.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    let inv = 1.0 / sum;
    for v in x.iter_mut() {
        *v *= inv;
    }
}

/// Softmax over the last axis.
pub fn softmax(x: &Tensor) -> Tensor {
    let mut y = x.clone();
    let d = *x.shape().last().unwrap();
    for chunk in y.data_mut().chunks_mut(d) {
        softmax_inplace(chunk);
    }
    y
}

/// Per-channel inference-mode batch-norm parameters.
#[derive(Debug, Clone, Copy)]
pub struct BatchNorm<'a> {
    pub mean: &'a [f32],
    pub var: &'a [f32],
    pub gamma: &'a [f32],
    pub beta: &'a [f32],
    pub epsilon: f32,
}

/// `(x - mean) / sqrt(var + eps) * gamma + beta`, channel on axis 0.
pub fn batch_norm_inference(x: &Tensor, bn: &BatchNorm<'_>) -> Result<Tensor> {
    let mut y = x.clone();
    batch_norm_inplace(&mut y, bn)?;
    Ok(y)
}

pub(crate) fn batch_norm_inplace(x: &mut Tensor, bn: &BatchNorm<'_>) -> Result<()> {
    let c = x.dim(0);
    if [bn.mean.len(), bn.var.len(), bn.gamma.len(), bn.beta.len()]
        .iter()
        .any(|&n| n != c)
    {
        return Err(Error::shape("batch_norm", format!("{c} channels")));
    }
    let per = x.len() / c;
    for (ch, chunk) in x.data_mut().chunks_mut(per).enumerate() {
        let inv = 1.0 / (bn.var[ch] + bn.epsilon).sqrt();
        let (m, g, b) = (bn.mean[ch], bn.gamma[ch], bn.beta[ch]);
        for v in chunk {
            *v = (*v - m) * inv * g + b;
        }
    }
    Ok(())
}
