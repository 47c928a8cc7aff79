//! 2-D convolution (cross-correlation, CNN convention) with exact analytic
//! gradients, plus the sigmoid activation.
//!
//! Accumulation order is fixed: for every output element the contributions
//! are added in (channel, kernel row, kernel column) order, so results are
//! bit-reproducible across runs and match a naive quadruple-loop evaluated
//! in the same order.

use crate::tensor::{FilterStack, Tensor3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvMode {
    /// No padding; output dims = input − kernel + 1 (stride 1).
    Valid,
    /// Zero padding of (k−1)/2 on each side; requires odd kernels.
    Same,
}

/// Output dims and padding for one spatial axis.
fn axis_geometry(input: usize, kernel: usize, mode: ConvMode, stride: usize) -> (usize, usize) {
    match mode {
        ConvMode::Valid => {
            assert!(
                kernel <= input,
                "valid convolution needs kernel ({kernel}) <= input ({input})"
            );
            ((input - kernel) / stride + 1, 0)
        }
        ConvMode::Same => {
            assert!(kernel % 2 == 1, "same convolution needs an odd kernel, got {kernel}");
            (input.div_ceil(stride), (kernel - 1) / 2)
        }
    }
}

pub fn conv2d(input: &Tensor3, filters: &FilterStack, mode: ConvMode) -> Tensor3 {
    conv2d_strided(input, filters, mode, 1)
}

pub fn conv2d_strided(input: &Tensor3, filters: &FilterStack, mode: ConvMode, stride: usize) -> Tensor3 {
    assert!(stride >= 1);
    assert_eq!(
        input.channels(),
        filters.in_channels,
        "input channels {} do not match filter in_channels {}",
        input.channels(),
        filters.in_channels
    );
    let (in_h, in_w) = input.spatial_dims();
    let (out_h, pad_h) = axis_geometry(in_h, filters.k_h, mode, stride);
    let (out_w, pad_w) = axis_geometry(in_w, filters.k_w, mode, stride);
    let mut out = Tensor3::zeros(filters.out_channels, out_h, out_w);

    for o in 0..filters.out_channels {
        out.channel_mut(o).fill(filters.bias[o]);
        for l in 0..filters.in_channels {
            for u in 0..filters.k_h {
                for v in 0..filters.k_w {
                    let w = filters.weight(o, l, u, v);
                    if stride == 1 {
                        // Row AXPY: out[o][i][j] += w * in[l][i+u-pad][j+v-pad]
                        // over the j range where the input index is valid.
                        let (j_lo, j_hi) = clipped_range(out_w, in_w, v, pad_w);
                        if j_lo >= j_hi {
                            continue;
                        }
                        for i in 0..out_h {
                            let iy = i + u;
                            if iy < pad_h || iy - pad_h >= in_h {
                                continue;
                            }
                            let src = &input.row(l, iy - pad_h)[j_lo + v - pad_w..j_hi + v - pad_w];
                            let dst = &mut out.row_mut(o, i)[j_lo..j_hi];
                            for (d, s) in dst.iter_mut().zip(src) {
                                *d += w * s;
                            }
                        }
                    } else {
                        for i in 0..out_h {
                            let iy = i * stride + u;
                            if iy < pad_h || iy - pad_h >= in_h {
                                continue;
                            }
                            let in_row = input.row(l, iy - pad_h);
                            let out_row = out.row_mut(o, i);
                            for (j, d) in out_row.iter_mut().enumerate() {
                                let jx = j * stride + v;
                                if jx >= pad_w && jx - pad_w < in_w {
                                    *d += w * in_row[jx - pad_w];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    debug_assert!(out.is_finite(), "convolution produced non-finite values");
    out
}

/// For stride 1: output columns j where in-column j+v-pad lies in [0, in_w).
#[inline]
fn clipped_range(out_w: usize, in_w: usize, v: usize, pad_w: usize) -> (usize, usize) {
    let j_lo = pad_w.saturating_sub(v);
    let j_hi = (in_w + pad_w - v).min(out_w);
    (j_lo, j_hi)
}

/// Gradients of sum(upstream ⊙ conv2d(input, filters)) with respect to the
/// weights, the biases and (optionally) the input.
#[derive(Debug, Clone)]
pub struct ConvGrads {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub input: Option<Tensor3>,
}

pub fn conv2d_grads(input: &Tensor3, filters: &FilterStack, upstream: &Tensor3, mode: ConvMode) -> ConvGrads {
    conv2d_strided_grads(input, filters, upstream, mode, 1, true)
}

pub fn conv2d_strided_grads(
    input: &Tensor3,
    filters: &FilterStack,
    upstream: &Tensor3,
    mode: ConvMode,
    stride: usize,
    need_input_grad: bool,
) -> ConvGrads {
    assert_eq!(input.channels(), filters.in_channels, "input/filter channel mismatch");
    let (in_h, in_w) = input.spatial_dims();
    let (out_h, pad_h) = axis_geometry(in_h, filters.k_h, mode, stride);
    let (out_w, pad_w) = axis_geometry(in_w, filters.k_w, mode, stride);
    assert_eq!(
        (upstream.channels(), upstream.height(), upstream.width()),
        (filters.out_channels, out_h, out_w),
        "upstream shape does not match convolution output shape"
    );

    let mut w_grads = vec![0.0; filters.weights.len()];
    let mut b_grads = vec![0.0; filters.out_channels];
    let mut in_grads = need_input_grad.then(|| Tensor3::zeros(input.channels(), in_h, in_w));

    for o in 0..filters.out_channels {
        b_grads[o] = upstream.channel(o).iter().sum();
        for l in 0..filters.in_channels {
            for u in 0..filters.k_h {
                for v in 0..filters.k_w {
                    let widx = filters.weight_index(o, l, u, v);
                    let w = filters.weights[widx];
                    let mut acc = 0.0;
                    if stride == 1 {
                        let (j_lo, j_hi) = clipped_range(out_w, in_w, v, pad_w);
                        if j_lo >= j_hi {
                            continue;
                        }
                        for i in 0..out_h {
                            let iy = i + u;
                            if iy < pad_h || iy - pad_h >= in_h {
                                continue;
                            }
                            let up_row = &upstream.row(o, i)[j_lo..j_hi];
                            let src = &input.row(l, iy - pad_h)[j_lo + v - pad_w..j_hi + v - pad_w];
                            acc += up_row.iter().zip(src).map(|(g, x)| g * x).sum::<f64>();
                            if let Some(gin) = in_grads.as_mut() {
                                let dst = &mut gin.row_mut(l, iy - pad_h)[j_lo + v - pad_w..j_hi + v - pad_w];
                                for (d, g) in dst.iter_mut().zip(up_row) {
                                    *d += w * g;
                                }
                            }
                        }
                    } else {
                        for i in 0..out_h {
                            let iy = i * stride + u;
                            if iy < pad_h || iy - pad_h >= in_h {
                                continue;
                            }
                            for j in 0..out_w {
                                let jx = j * stride + v;
                                if jx < pad_w || jx - pad_w >= in_w {
                                    continue;
                                }
                                let g = upstream.get(o, i, j);
                                acc += g * input.get(l, iy - pad_h, jx - pad_w);
                                if let Some(gin) = in_grads.as_mut() {
                                    let cur = gin.get(l, iy - pad_h, jx - pad_w);
                                    gin.set(l, iy - pad_h, jx - pad_w, cur + w * g);
                                }
                            }
                        }
                    }
                    w_grads[widx] = acc;
                }
            }
        }
    }
    ConvGrads { weights: w_grads, bias: b_grads, input: in_grads }
}

/// Elementwise logistic function, numerically stable on both tails.
pub fn sigmoid_map(x: &Tensor3) -> Tensor3 {
    let data = x.data().iter().map(|&v| sigmoid(v)).collect();
    Tensor3::from_vec(x.channels(), x.height(), x.width(), data)
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Gradient through the sigmoid given its output `y`: upstream ⊙ y ⊙ (1−y).
pub fn sigmoid_grad(y: &Tensor3, upstream: &Tensor3) -> Tensor3 {
    assert_eq!(y.data().len(), upstream.data().len(), "sigmoid_grad shape mismatch");
    let data = y
        .data()
        .iter()
        .zip(upstream.data())
        .map(|(&yv, &g)| g * yv * (1.0 - yv))
        .collect();
    Tensor3::from_vec(y.channels(), y.height(), y.width(), data)
}
