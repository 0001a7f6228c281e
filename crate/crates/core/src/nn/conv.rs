use super::Tensor;
use crate::{Error, Result};

/// 2-D convolution with "same-ceil" zero padding: output spatial size is
/// `ceil(in / stride)` and output `(i, j)` is centred on input
/// `(i * stride, j * stride)`. Kernel layout `[C_out, C_in, KH, KW]`, odd sizes.
pub fn conv2d(input: &Tensor, kernel: &Tensor, stride: (usize, usize)) -> Result<Tensor> {
    if input.rank() != 3 || kernel.rank() != 4 || kernel.dim(1) != input.dim(0) {
        return Err(Error::shape(
            "conv2d",
            format!("input {:?}, kernel {:?}", input.shape(), kernel.shape()),
        ));
    }
    let (c_in, h, w) = (input.dim(0), input.dim(1), input.dim(2));
    let (c_out, kh, kw) = (kernel.dim(0), kernel.dim(2), kernel.dim(3));
    if kh % 2 == 0 || kw % 2 == 0 || stride.0 == 0 || stride.1 == 0 {
        return Err(Error::shape("conv2d", "kernel sizes must be odd and strides positive"));
    }
    let (oh, ow) = (h.div_ceil(stride.0), w.div_ceil(stride.1));
    let (ph, pw) = (kh / 2, kw / 2);
    let x = input.data();
    let k = kernel.data();
    let mut out = vec![0.0f32; c_out * oh * ow];
    for co in 0..c_out {
        let plane = &mut out[co * oh * ow..(co + 1) * oh * ow];
        for ci in 0..c_in {
            let src = &x[ci * h * w..(ci + 1) * h * w];
            for a in 0..kh {
                for b in 0..kw {
                    let wt = k[((co * c_in + ci) * kh + a) * kw + b];
                    for i in 0..oh {
                        let Some(y) = (i * stride.0 + a).checked_sub(ph).filter(|&y| y < h) else {
                            continue;
                        };
                        let row = &src[y * w..(y + 1) * w];
                        let dst = &mut plane[i * ow..(i + 1) * ow];
                        for (j, d) in dst.iter_mut().enumerate() {
                            if let Some(xx) = (j * stride.1 + b).checked_sub(pw).filter(|&xx| xx < w) {
                                *d += row[xx] * wt;
                            }
                        }
                    }
                }
            }
        }
    }
    Tensor::new(vec![c_out, oh, ow], out)
}

/// Stride-1 1-D convolution with symmetric zero padding `(K-1)/2`.
/// Input `[C_in, T]`, kernel `[C_out, C_in, K]` (K odd), bias `[C_out]`.
pub fn conv1d(input: &Tensor, kernel: &Tensor, bias: Option<&Tensor>) -> Result<Tensor> {
    if input.rank() != 2 || kernel.rank() != 3 || kernel.dim(1) != input.dim(0) || kernel.dim(2).is_multiple_of(2) {
        return Err(Error::shape(
            "conv1d",
            format!("input {:?}, kernel {:?}", input.shape(), kernel.shape()),
        ));
    }
    let (c_in, t) = (input.dim(0), input.dim(1));
    let (c_out, kn) = (kernel.dim(0), kernel.dim(2));
    if let Some(b) = bias {
        b.expect_shape("conv1d bias", &[c_out])?;
    }
    let pad = kn / 2;
    let x = input.data();
    let k = kernel.data();
    let mut out = vec![0.0f32; c_out * t];
    for co in 0..c_out {
        let dst = &mut out[co * t..(co + 1) * t];
        if let Some(b) = bias {
            dst.fill(b.data()[co]);
        }
        for ci in 0..c_in {
            let src = &x[ci * t..(ci + 1) * t];
            let taps = &k[(co * c_in + ci) * kn..(co * c_in + ci + 1) * kn];
            for (a, &wt) in taps.iter().enumerate() {
                // output s reads input s + a - pad
                let lo = pad.saturating_sub(a);
                let hi = (t + pad).saturating_sub(a).min(t);
                if lo >= hi {
                    continue;
                }
                let shift = a as isize - pad as isize;
                let s0 = (lo as isize + shift) as usize;
                for (d, &v) in dst[lo..hi].iter_mut().zip(&src[s0..s0 + (hi - lo)]) {
                    *d += v * wt;
                }
            }
        }
    }
    Tensor::new(vec![c_out, t], out)
}
