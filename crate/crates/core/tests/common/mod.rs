//! Independent oracles shared by the integration tests. Everything here is
//! deliberately written as naive, direct computation so it cannot share a
//! code path (or a bug) with the implementation it checks.

use convtrack::features::Rect;
use convtrack::tensor::{FilterStack, Map2, Tensor3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Quadruple-loop cross-correlation with bias, zero padding in same mode,
/// accumulation in (channel, kernel-row, kernel-col) order.
pub fn naive_conv2d(input: &Tensor3, f: &FilterStack, same: bool, stride: usize) -> Tensor3 {
    let (in_h, in_w) = input.spatial_dims();
    let (pad_h, pad_w) = if same { ((f.k_h - 1) / 2, (f.k_w - 1) / 2) } else { (0, 0) };
    let (out_h, out_w) = if same {
        (in_h.div_ceil(stride), in_w.div_ceil(stride))
    } else {
        ((in_h - f.k_h) / stride + 1, (in_w - f.k_w) / stride + 1)
    };
    let mut out = Tensor3::zeros(f.out_channels, out_h, out_w);
    for o in 0..f.out_channels {
        for i in 0..out_h {
            for j in 0..out_w {
                let mut acc = f.bias[o];
                for l in 0..f.in_channels {
                    for u in 0..f.k_h {
                        for v in 0..f.k_w {
                            let iy = (i * stride + u) as isize - pad_h as isize;
                            let jx = (j * stride + v) as isize - pad_w as isize;
                            if iy >= 0 && (iy as usize) < in_h && jx >= 0 && (jx as usize) < in_w {
                                acc += f.weight(o, l, u, v) * input.get(l, iy as usize, jx as usize);
                            }
                        }
                    }
                }
                out.set(o, i, j, acc);
            }
        }
    }
    out
}

/// Direct-summation squared-error loss with an L2 penalty.
pub fn naive_l2_loss(response: &Map2, label: &Map2, params: &[&[f64]], weight_decay: f64) -> f64 {
    let mut loss = 0.0;
    for k in 0..response.len() {
        let d = response.data()[k] - label.data()[k];
        loss += d * d;
    }
    let mut reg = 0.0;
    for arr in params {
        for p in *arr {
            reg += p * p;
        }
    }
    loss + weight_decay * reg
}

/// Counting oracle for IoU on a 10×-upsampled integer grid; exact whenever
/// all rect coordinates are multiples of 0.1.
pub fn pixel_count_iou(a: &Rect, b: &Rect) -> f64 {
    let up = 10.0;
    let cells = |r: &Rect| {
        (
            (r.x * up).round() as i64,
            (r.y * up).round() as i64,
            ((r.x + r.w) * up).round() as i64,
            ((r.y + r.h) * up).round() as i64,
        )
    };
    let (ax0, ay0, ax1, ay1) = cells(a);
    let (bx0, by0, bx1, by1) = cells(b);
    let mut inter = 0u64;
    let mut union = 0u64;
    for y in ay0.min(by0)..ay1.max(by1) {
        for x in ax0.min(bx0)..ax1.max(bx1) {
            let in_a = x >= ax0 && x < ax1 && y >= ay0 && y < ay1;
            let in_b = x >= bx0 && x < bx1 && y >= by0 && y < by1;
            inter += (in_a && in_b) as u64;
            union += (in_a || in_b) as u64;
        }
    }
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

pub fn random_rect(rng: &mut ChaCha8Rng, span: f64, snap_tenths: bool) -> Rect {
    let mut v = |lo: f64, hi: f64| {
        let x: f64 = rng.random_range(lo..hi);
        if snap_tenths {
            (x * 10.0).round() / 10.0
        } else {
            x
        }
    };
    Rect::new(v(0.0, span), v(0.0, span), v(0.5, span / 2.0 + 0.5), v(0.5, span / 2.0 + 0.5))
}

pub fn random_tensor(rng: &mut ChaCha8Rng, c: usize, h: usize, w: usize) -> Tensor3 {
    let data = (0..c * h * w).map(|_| rng.random_range(-1.0..1.0)).collect();
    Tensor3::from_vec(c, h, w, data)
}

pub fn random_filters(rng: &mut ChaCha8Rng, o: usize, i: usize, kh: usize, kw: usize) -> FilterStack {
    let weights = (0..o * i * kh * kw).map(|_| rng.random_range(-1.0..1.0)).collect();
    let bias = (0..o).map(|_| rng.random_range(-1.0..1.0)).collect();
    FilterStack::from_weights(o, i, kh, kw, weights, bias)
}
