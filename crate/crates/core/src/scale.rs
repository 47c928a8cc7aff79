//! Scale estimation: a pyramid of target-tight crops scored by a learned
//! 1-D discriminative filter over the scale dimension, trained by the same
//! ridge loss and SGD as the translation head.
//!
//! Each pyramid level is resampled to a fixed template and reduced to a
//! short gradient-energy descriptor; the filter scores every level and the
//! (parabola-refined) argmax gives the scale change.

use crate::config::ScaleConfig;
use crate::features::{crop_resize, extract, Extractor, Frame, Rect};
use crate::optim::{sgd_step, OptState};
use crate::tensor::Map2;
use crate::window::gaussian1d;

/// Per-scale linear scorer plus its optimizer state.
#[derive(Debug, Clone)]
pub struct ScaleFilter {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
    opt: OptState,
}

impl ScaleFilter {
    pub fn new(cfg: &ScaleConfig, momentum: f64) -> Self {
        ScaleFilter {
            rows: cfg.count,
            cols: cfg.descriptor_dim,
            weights: vec![0.0; cfg.count * cfg.descriptor_dim],
            opt: OptState::new(cfg.count * cfg.descriptor_dim, momentum, cfg.weight_decay, cfg.lr),
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    /// Fit the filter on one frame by sweeping synthetic scale offsets:
    /// descriptors extracted around base size a^(−k)·true size peak at
    /// offset k, which gives the regressor genuinely shifted samples to
    /// discriminate even though only one frame is available. The sweep is
    /// interleaved (0, +1, −1, +2, −2, …) so momentum sees no one-sided
    /// run of offsets that would bias the fit.
    pub fn init_on_frame(&mut self, frame: &Frame, center: (f64, f64), true_size: (f64, f64), cfg: &ScaleConfig) {
        let sweep = cfg.half_span() / 2;
        let mut offsets = vec![0i32];
        for k in 1..=sweep {
            offsets.push(k);
            offsets.push(-k);
        }
        // descriptors are reused across rounds; compute once per offset
        let samples: Vec<(f64, crate::tensor::Map2)> = offsets
            .iter()
            .map(|&k| {
                let f = cfg.step.powi(-k);
                let base = (true_size.0 * f, true_size.1 * f);
                (k as f64, scale_descriptors(frame, center, base, cfg))
            })
            .collect();
        for _ in 0..cfg.init_rounds {
            for (offset, desc) in &samples {
                scale_train(self, desc, *offset, cfg);
            }
        }
    }
}

/// Pyramid of patch sizes a^n·(W, H) for n in −⌊(S−1)/2⌋..⌊(S−1)/2⌋.
pub fn pyramid_sizes(w: f64, h: f64, cfg: &ScaleConfig) -> Vec<(f64, f64)> {
    assert!(w > 0.0 && h > 0.0, "pyramid base size must be positive");
    let half = cfg.half_span();
    (-half..=half)
        .map(|n| {
            let f = cfg.step.powi(n);
            (w * f, h * f)
        })
        .collect()
}

/// S×descriptor_dim matrix: per pyramid level, the target-tight crop is
/// resampled to the template and reduced to block means of the gradient
/// magnitude, rows ordered by scale index ascending.
pub fn scale_descriptors(frame: &Frame, center: (f64, f64), base: (f64, f64), cfg: &ScaleConfig) -> Map2 {
    let grid = (cfg.descriptor_dim as f64).sqrt() as usize;
    assert_eq!(grid * grid, cfg.descriptor_dim, "descriptor_dim must be a perfect square");
    let t = cfg.template_size;
    assert!(t % grid == 0, "template must divide into the block grid");
    let block = t / grid;
    let mut out = Map2::zeros(cfg.count, cfg.descriptor_dim);
    for (row, &(wn, hn)) in pyramid_sizes(base.0, base.1, cfg).iter().enumerate() {
        // degenerate pyramid sizes are clipped, not rejected
        let rect = Rect::from_center(center.0, center.1, wn.max(2.0), hn.max(2.0));
        let patch = crop_resize(frame, &rect, 0.0, (t, t));
        let grads = extract(&Extractor::Grad, &patch);
        for bi in 0..grid {
            for bj in 0..grid {
                let mut acc = 0.0;
                for i in 0..block {
                    for j in 0..block {
                        acc += grads.get(2, bi * block + i, bj * block + j);
                    }
                }
                out.set(row, bi * grid + bj, acc / (block * block) as f64);
            }
        }
    }
    out
}

/// score[n] = dot(weights row n, descriptor row n).
pub fn scale_response(filter: &ScaleFilter, desc: &Map2) -> Vec<f64> {
    assert_eq!(
        (desc.height(), desc.width()),
        (filter.rows, filter.cols),
        "descriptor shape does not match filter"
    );
    (0..filter.rows)
        .map(|n| {
            filter.weights[n * filter.cols..(n + 1) * filter.cols]
                .iter()
                .zip(desc.row(n))
                .map(|(w, d)| w * d)
                .sum()
        })
        .collect()
}

/// One SGD step toward a 1-D Gaussian label centered at
/// (S−1)/2 + true_offset_cells. Returns the pre-step ridge loss.
pub fn scale_train(filter: &mut ScaleFilter, desc: &Map2, true_offset_cells: f64, cfg: &ScaleConfig) -> f64 {
    let half = cfg.half_span() as f64;
    assert!(
        true_offset_cells.abs() <= half,
        "scale offset {true_offset_cells} outside ±{half}"
    );
    let center = half + true_offset_cells;
    let label = gaussian1d(filter.rows, center, cfg.sigma_cells);
    let scores = scale_response(filter, desc);

    let mut loss = 0.0;
    let mut grads = vec![0.0; filter.weights.len()];
    for n in 0..filter.rows {
        let d = scores[n] - label[n];
        loss += d * d;
        for c in 0..filter.cols {
            grads[n * filter.cols + c] = 2.0 * d * desc.get(n, c);
        }
    }
    loss += cfg.weight_decay * filter.weights.iter().map(|w| w * w).sum::<f64>();

    filter.opt.learning_rate = cfg.lr;
    filter.opt.weight_decay = cfg.weight_decay;
    sgd_step(&mut filter.weights, &grads, &mut filter.opt);
    loss
}

/// Scale multiplier a^(n*), with n* the parabola-refined argmax offset.
pub fn estimate_scale(filter: &ScaleFilter, desc: &Map2, cfg: &ScaleConfig) -> f64 {
    let scores = scale_response(filter, desc);
    let mut best = 0usize;
    for (k, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = k;
        }
    }
    let mut refined = best as f64;
    if best > 0 && best + 1 < scores.len() {
        refined += crate::tracker::parabolic_offset(scores[best - 1], scores[best], scores[best + 1]);
    }
    cfg.step.powf(refined - cfg.half_span() as f64)
}
