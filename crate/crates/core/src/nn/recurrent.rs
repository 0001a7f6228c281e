use super::ops::{accumulate_into, sigmoid_scalar};
use super::Tensor;
use crate::{Error, Result};

/// GRU weights, gate order `r, z, n`:
/// `w_ih [D_in, 3H]`, `w_hh [H, 3H]`, `b_ih [3H]`, `b_hh [3H]`.
#[derive(Debug, Clone, Copy)]
pub struct GruParams<'a> {
    pub w_ih: &'a Tensor,
    pub w_hh: &'a Tensor,
    pub b_ih: &'a Tensor,
    pub b_hh: &'a Tensor,
}

impl GruParams<'_> {
    pub fn hidden(&self) -> usize {
        self.w_hh.dim(0)
    }

    fn check(&self, d_in: usize) -> Result<()> {
        let h = self.hidden();
        self.w_ih.expect_shape("gru w_ih", &[d_in, 3 * h])?;
        self.w_hh.expect_shape("gru w_hh", &[h, 3 * h])?;
        self.b_ih.expect_shape("gru b_ih", &[3 * h])?;
        self.b_hh.expect_shape("gru b_hh", &[3 * h])
    }
}

/// Runs a GRU over `inputs [T, D_in]` from `h0`. Returns every hidden state
/// `[T, H]` and the final one.
///
/// `r = σ(x·W_ir + b_ir + h·W_hr + b_hr)`, `z` likewise,
/// `n = tanh(x·W_in + b_in + r ⊙ (h·W_hn + b_hn))`, `h' = (1 - z) ⊙ n + z ⊙ h`.
pub fn gru_forward(inputs: &Tensor, params: &GruParams<'_>, h0: &[f32]) -> Result<(Tensor, Vec<f32>)> {
    if inputs.rank() != 2 {
        return Err(Error::shape("gru", "inputs must be [T, D]"));
    }
    params.check(inputs.dim(1))?;
    let h_dim = params.hidden();
    if h0.len() != h_dim {
        return Err(Error::shape("gru", "h0 width"));
    }
    let steps = inputs.dim(0);
    let mut h = h0.to_vec();
    let mut gi = vec![0.0; 3 * h_dim];
    let mut gh = vec![0.0; 3 * h_dim];
    let mut outputs = Vec::with_capacity(steps * h_dim);
    for t in 0..steps {
        gi.copy_from_slice(params.b_ih.data());
        accumulate_into(&mut gi, inputs.row(t), params.w_ih.data());
        gh.copy_from_slice(params.b_hh.data());
        accumulate_into(&mut gh, &h, params.w_hh.data());
        for j in 0..h_dim {
            let r = sigmoid_scalar(gi[j] + gh[j]);
            let z = sigmoid_scalar(gi[h_dim + j] + gh[h_dim + j]);
            let n = (gi[2 * h_dim + j] + r * gh[2 * h_dim + j]).tanh();
            h[j] = (1.0 - z) * n + z * h[j];
        }
        outputs.extend_from_slice(&h);
    }
    Ok((Tensor::new(vec![steps, h_dim], outputs)?, h))
}

/// LSTM weights, gate order `i, f, g, o`:
/// `w_ih [D_in, 4H]`, `w_hh [H, 4H]`, `b [4H]`.
#[derive(Debug, Clone, Copy)]
pub struct LstmParams<'a> {
    pub w_ih: &'a Tensor,
    pub w_hh: &'a Tensor,
    pub b: &'a Tensor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<f32>,
    pub c: Vec<f32>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        LstmState {
            h: vec![0.0; hidden],
            c: vec![0.0; hidden],
        }
    }
}

impl LstmParams<'_> {
    pub fn hidden(&self) -> usize {
        self.w_hh.dim(0)
    }

    pub fn check(&self, d_in: usize) -> Result<()> {
        let h = self.hidden();
        self.w_ih.expect_shape("lstm w_ih", &[d_in, 4 * h])?;
        self.w_hh.expect_shape("lstm w_hh", &[h, 4 * h])?;
        self.b.expect_shape("lstm b", &[4 * h])
    }

    /// One step. `x` may be given in pieces that are logically concatenated,
    /// which saves building the joined input vector every step.
    pub fn step(&self, x_parts: &[&[f32]], state: &mut LstmState, gates: &mut Vec<f32>) {
        let h_dim = self.hidden();
        gates.clear();
        gates.extend_from_slice(self.b.data());
        let stride = 4 * h_dim;
        let mut offset = 0;
        for part in x_parts {
            let w = &self.w_ih.data()[offset * stride..(offset + part.len()) * stride];
            accumulate_into(gates, part, w);
            offset += part.len();
        }
        debug_assert_eq!(offset, self.w_ih.dim(0));
        accumulate_into(gates, &state.h, self.w_hh.data());
        for j in 0..h_dim {
            let i = sigmoid_scalar(gates[j]);
            let f = sigmoid_scalar(gates[h_dim + j]);
            let g = gates[2 * h_dim + j].tanh();
            let o = sigmoid_scalar(gates[3 * h_dim + j]);
            state.c[j] = f * state.c[j] + i * g;
            state.h[j] = o * state.c[j].tanh();
        }
    }
}

/// Runs an LSTM over `inputs [T, D_in]`; returns hidden states `[T, H]` and the final state.
pub fn lstm_forward(
    inputs: &Tensor,
    params: &LstmParams<'_>,
    state0: LstmState,
) -> Result<(Tensor, LstmState)> {
    if inputs.rank() != 2 {
        return Err(Error::shape("lstm", "inputs must be [T, D]"));
    }
    params.check(inputs.dim(1))?;
    let h_dim = params.hidden();
    if state0.h.len() != h_dim || state0.c.len() != h_dim {
        return Err(Error::shape("lstm", "initial state width"));
    }
    let steps = inputs.dim(0);
    let mut state = state0;
    let mut gates = Vec::with_capacity(4 * h_dim);
    let mut outputs = Vec::with_capacity(steps * h_dim);
    for t in 0..steps {
        params.step(&[inputs.row(t)], &mut state, &mut gates);
        outputs.extend_from_slice(&state.h);
    }
    Ok((Tensor::new(vec![steps, h_dim], outputs)?, state))
}
