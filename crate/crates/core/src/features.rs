//! Patch extraction and feature computation: bilinear crop/resize of a
//! padded search window, plus the pluggable feature extractors (grayscale
//! copy, gradient channels, and a small trainable two-layer CNN).

use serde::{Deserialize, Serialize};

use crate::conv::{self, ConvMode};
use crate::tensor::{FilterStack, Map2, Tensor3};

/// Grayscale frame, intensities in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    height: usize,
    width: usize,
    pixels: Vec<f64>,
}

impl Frame {
    pub fn from_pixels(height: usize, width: usize, pixels: Vec<f64>) -> Self {
        assert_eq!(pixels.len(), height * width, "pixel count does not match dims");
        debug_assert!(pixels.iter().all(|&p| (0.0..=1.0).contains(&p)), "pixels must lie in [0,1]");
        Frame { height, width, pixels }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    /// Bilinear sample with clamp-to-edge border handling.
    pub fn sample(&self, y: f64, x: f64) -> f64 {
        let h = self.height as isize;
        let w = self.width as isize;
        let y0f = y.floor();
        let x0f = x.floor();
        let fy = y - y0f;
        let fx = x - x0f;
        let clamp = |v: isize, hi: isize| v.clamp(0, hi - 1) as usize;
        let y0 = clamp(y0f as isize, h);
        let y1 = clamp(y0f as isize + 1, h);
        let x0 = clamp(x0f as isize, w);
        let x1 = clamp(x0f as isize + 1, w);
        let p00 = self.get(y0, x0);
        let p01 = self.get(y0, x1);
        let p10 = self.get(y1, x0);
        let p11 = self.get(y1, x1);
        (1.0 - fy) * ((1.0 - fx) * p00 + fx * p01) + fy * ((1.0 - fx) * p10 + fx * p11)
    }
}

/// Axis-aligned rectangle: top-left corner plus size, in pixels, 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        assert!(w > 0.0 && h > 0.0, "rect size must be positive");
        Rect { x, y, w, h }
    }

    pub fn from_center(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        Rect::new(cx - w / 2.0, cy - h / 2.0, w, h)
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }
}

/// The crop geometry: a window in frame coordinates resampled to a fixed
/// patch size. Pixel-center convention, so an integer-aligned window with
/// out dims equal to its pixel dims reproduces the sub-image exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchWindow {
    pub x0: f64,
    pub y0: f64,
    pub w: f64,
    pub h: f64,
    pub out_w: usize,
    pub out_h: usize,
}

impl SearchWindow {
    /// Window centered on the target with side = target side × (1 + padding).
    pub fn around(target: &Rect, padding: f64, out: (usize, usize)) -> Self {
        assert!(padding >= 0.0, "padding must be nonnegative");
        assert!(target.w >= 1.0 && target.h >= 1.0, "degenerate target rect");
        let (cx, cy) = target.center();
        let w = target.w * (1.0 + padding);
        let h = target.h * (1.0 + padding);
        SearchWindow { x0: cx - w / 2.0, y0: cy - h / 2.0, w, h, out_h: out.0, out_w: out.1 }
    }

    /// Frame x of patch column p (pixel centers).
    #[inline]
    pub fn frame_x(&self, p: f64) -> f64 {
        self.x0 + (p + 0.5) * (self.w / self.out_w as f64) - 0.5
    }

    #[inline]
    pub fn frame_y(&self, p: f64) -> f64 {
        self.y0 + (p + 0.5) * (self.h / self.out_h as f64) - 0.5
    }

    /// Patch column of frame x; inverse of [`frame_x`].
    #[inline]
    pub fn patch_x(&self, fx: f64) -> f64 {
        (fx - self.x0 + 0.5) * (self.out_w as f64 / self.w) - 0.5
    }

    #[inline]
    pub fn patch_y(&self, fy: f64) -> f64 {
        (fy - self.y0 + 0.5) * (self.out_h as f64 / self.h) - 0.5
    }

    pub fn scale(&self) -> (f64, f64) {
        (self.w / self.out_w as f64, self.h / self.out_h as f64)
    }
}

/// Resample the window region of `frame` into an out_h×out_w patch.
pub fn sample_window(frame: &Frame, win: &SearchWindow) -> Map2 {
    let mut out = Map2::zeros(win.out_h, win.out_w);
    for i in 0..win.out_h {
        let sy = win.frame_y(i as f64);
        for j in 0..win.out_w {
            out.set(i, j, frame.sample(sy, win.frame_x(j as f64)));
        }
    }
    out
}

/// Crop the padded window around `target` and resize it to `out`.
pub fn crop_resize(frame: &Frame, target: &Rect, padding: f64, out: (usize, usize)) -> Map2 {
    sample_window(frame, &SearchWindow::around(target, padding, out))
}

/// Feature extractor applied to a cropped patch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Extractor {
    /// Single-channel copy of the patch.
    Gray,
    /// Central-difference x/y gradients plus gradient magnitude.
    Grad,
    /// conv(stride 2, same) → sigmoid → conv(stride 2, same); total stride 4.
    TinyCnn { conv1: FilterStack, conv2: FilterStack },
}

impl Extractor {
    pub fn tiny_cnn<R: rand::Rng>(mid: usize, out: usize, kernel: usize, std: f64, rng: &mut R) -> Self {
        // second layer scaled down by its fan-in so the feature magnitudes
        // stay comparable to the gradient-channel extractor
        let fan2 = (mid * kernel * kernel) as f64;
        Extractor::TinyCnn {
            conv1: FilterStack::randn(mid, 1, kernel, kernel, std, rng),
            conv2: FilterStack::randn(out, mid, kernel, kernel, std / fan2.sqrt(), rng),
        }
    }

    /// Ratio of patch size to feature-map size.
    pub fn cell_stride(&self) -> usize {
        match self {
            Extractor::Gray | Extractor::Grad => 1,
            Extractor::TinyCnn { .. } => 4,
        }
    }

    pub fn out_channels(&self) -> usize {
        match self {
            Extractor::Gray => 1,
            Extractor::Grad => 3,
            Extractor::TinyCnn { conv2, .. } => conv2.out_channels,
        }
    }
}

/// Run the extractor over a patch. Patch dims must divide the cell stride.
pub fn extract(extractor: &Extractor, patch: &Map2) -> Tensor3 {
    let stride = extractor.cell_stride();
    assert!(
        patch.height() % stride == 0 && patch.width() % stride == 0,
        "patch dims {}x{} not divisible by cell stride {}",
        patch.height(),
        patch.width(),
        stride
    );
    match extractor {
        Extractor::Gray => Tensor3::from_map(patch),
        Extractor::Grad => gradient_channels(patch),
        Extractor::TinyCnn { conv1, conv2 } => {
            let x = Tensor3::from_map(patch);
            let a = conv::conv2d_strided(&x, conv1, ConvMode::Same, 2);
            let y = conv::sigmoid_map(&a);
            conv::conv2d_strided(&y, conv2, ConvMode::Same, 2)
        }
    }
}

/// Central differences with replicated borders, plus gradient magnitude.
fn gradient_channels(patch: &Map2) -> Tensor3 {
    let (h, w) = (patch.height(), patch.width());
    let mut out = Tensor3::zeros(3, h, w);
    for i in 0..h {
        let up = i.saturating_sub(1);
        let dn = (i + 1).min(h - 1);
        for j in 0..w {
            let lf = j.saturating_sub(1);
            let rt = (j + 1).min(w - 1);
            let gx = (patch.get(i, rt) - patch.get(i, lf)) / 2.0;
            let gy = (patch.get(dn, j) - patch.get(up, j)) / 2.0;
            out.set(0, i, j, gx);
            out.set(1, i, j, gy);
            out.set(2, i, j, (gx * gx + gy * gy).sqrt());
        }
    }
    out
}

/// Parameter gradients of the two CNN layers.
#[derive(Debug, Clone)]
pub struct TinyCnnGrads {
    pub conv1_weights: Vec<f64>,
    pub conv1_bias: Vec<f64>,
    pub conv2_weights: Vec<f64>,
    pub conv2_bias: Vec<f64>,
}

/// Backpropagate `upstream` (gradient w.r.t. extract output) through both
/// CNN layers and the sigmoid; returns exact parameter gradients.
pub fn tinycnn_backward(extractor: &Extractor, patch: &Map2, upstream: &Tensor3) -> TinyCnnGrads {
    let Extractor::TinyCnn { conv1, conv2 } = extractor else {
        panic!("tinycnn_backward called on a parameter-free extractor");
    };
    let x = Tensor3::from_map(patch);
    let a = conv::conv2d_strided(&x, conv1, ConvMode::Same, 2);
    let y = conv::sigmoid_map(&a);
    let g2 = conv::conv2d_strided_grads(&y, conv2, upstream, ConvMode::Same, 2, true);
    let dy = g2.input.expect("input grad requested");
    let da = conv::sigmoid_grad(&y, &dy);
    let g1 = conv::conv2d_strided_grads(&x, conv1, &da, ConvMode::Same, 2, false);
    TinyCnnGrads {
        conv1_weights: g1.weights,
        conv1_bias: g1.bias,
        conv2_weights: g2.weights,
        conv2_bias: g2.bias,
    }
}

/// Multiply every feature channel elementwise by the Hann map.
pub fn apply_window(feat: &Tensor3, hann: &Map2) -> Tensor3 {
    assert_eq!(
        feat.spatial_dims(),
        (hann.height(), hann.width()),
        "window dims do not match feature dims"
    );
    let mut out = feat.clone();
    for c in 0..feat.channels() {
        for (v, &h) in out.channel_mut(c).iter_mut().zip(hann.data()) {
            *v *= h;
        }
    }
    out
}
