//! The tracking state machine: two-layer convolutional head over extracted
//! features, first-frame fitting, per-frame response and peak localization,
//! peak-versus-noise gating of online updates, and the scale branch hookup.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{FeatureKind, TrackerConfig};
use crate::conv::{self, ConvMode};
use crate::features::{
    apply_window, extract, sample_window, tinycnn_backward, Extractor, Frame, Rect, SearchWindow,
};
use crate::optim::{l2_loss_and_grad, sgd_step, OptState};
use crate::scale::{estimate_scale, scale_descriptors, scale_train, ScaleFilter};
use crate::tensor::{FilterStack, Map2, Tensor3};
use crate::window::{gaussian_label, hann2d};

/// Decorrelates the extractor init stream from the head init stream.
const EXTRACTOR_SEED_SALT: u64 = 0x9e3779b97f4a7c15;

/// Two convolutional layers with a sigmoid between them; the second layer
/// has a single output channel, the response map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackHead {
    pub layer1: FilterStack,
    pub layer2: FilterStack,
}

impl TrackHead {
    /// Zero-mean Gaussian init for the weights of both layers; the first
    /// layer's bias starts at `config.head_init_bias`.
    pub fn random<R: rand::Rng>(in_channels: usize, config: &TrackerConfig, rng: &mut R) -> Self {
        let mut layer1 = FilterStack::randn(
            config.hidden_channels,
            in_channels,
            config.head_kernel,
            config.head_kernel,
            config.head_init_std,
            rng,
        );
        layer1.bias.fill(config.head_init_bias);
        let layer2 = FilterStack::randn(
            1,
            config.hidden_channels,
            config.head_kernel,
            config.head_kernel,
            config.head_init_std2,
            rng,
        );
        TrackHead { layer1, layer2 }
    }

    /// conv-same → sigmoid → conv-same; spatial dims preserved.
    pub fn forward(&self, feat: &Tensor3) -> Map2 {
        self.forward_full(feat).1
    }

    /// Forward pass keeping the post-sigmoid hidden activations for backprop.
    pub fn forward_full(&self, feat: &Tensor3) -> (Tensor3, Map2) {
        let a = conv::conv2d(feat, &self.layer1, ConvMode::Same);
        let hidden = conv::sigmoid_map(&a);
        let resp = conv::conv2d(&hidden, &self.layer2, ConvMode::Same);
        (hidden, resp.into_map())
    }
}

/// Response scores plus the geometry needed to map cells back to frame
/// pixels: the crop window origin/scale and the feature cell stride.
#[derive(Debug, Clone)]
pub struct ResponseMap {
    pub map: Map2,
    pub cell_stride: usize,
    /// Crop window origin (x0, y0) in frame pixels.
    pub origin: (f64, f64),
    /// Frame pixels per patch pixel (sx, sy).
    pub window_scale: (f64, f64),
}

impl ResponseMap {
    pub fn from_window(map: Map2, cell_stride: usize, win: &SearchWindow) -> Self {
        let (sx, sy) = win.scale();
        ResponseMap { map, cell_stride, origin: (win.x0, win.y0), window_scale: (sx, sy) }
    }

    /// Identity geometry: stride 1, origin (0,0), unit scale.
    pub fn plain(map: Map2) -> Self {
        ResponseMap { map, cell_stride: 1, origin: (0.0, 0.0), window_scale: (1.0, 1.0) }
    }

    /// Frame pixel (x, y) of fractional cell coordinates (row, col).
    pub fn cell_to_pixel(&self, row: f64, col: f64) -> (f64, f64) {
        let sx = self.cell_stride as f64 * self.window_scale.0;
        let sy = self.cell_stride as f64 * self.window_scale.1;
        (self.origin.0 + (col + 0.5) * sx - 0.5, self.origin.1 + (row + 0.5) * sy - 0.5)
    }
}

/// Peak of a response map: refined pixel position and raw extrema.
#[derive(Debug, Clone, Copy)]
pub struct Peak {
    /// Subcell-refined peak mapped to frame pixels (x, y).
    pub pixel: (f64, f64),
    pub rmax: f64,
    pub rmin: f64,
    /// Unrefined argmax cell (row, col).
    pub cell: (usize, usize),
}

/// Vertex offset of the parabola through (−1, left), (0, center), (1, right),
/// clamped to ±0.5 cells. Positive moves toward the right neighbor.
pub fn parabolic_offset(left: f64, center: f64, right: f64) -> f64 {
    let denom = 2.0 * (left - 2.0 * center + right);
    if denom.abs() < 1e-300 {
        return 0.0;
    }
    ((left - right) / denom).clamp(-0.5, 0.5)
}

/// Integer argmax (first occurrence row-major) with 1-D parabolic
/// refinement per axis, skipped at map borders.
pub fn locate_peak(resp: &ResponseMap) -> Peak {
    let m = &resp.map;
    assert!(!m.is_empty(), "locate_peak on an empty map");
    let (r, c) = m.argmax();
    let rmax = m.get(r, c);
    let rmin = m.min();
    let mut fr = r as f64;
    let mut fc = c as f64;
    if r > 0 && r + 1 < m.height() {
        fr += parabolic_offset(m.get(r - 1, c), rmax, m.get(r + 1, c));
    }
    if c > 0 && c + 1 < m.width() {
        fc += parabolic_offset(m.get(r, c - 1), rmax, m.get(r, c + 1));
    }
    Peak { pixel: resp.cell_to_pixel(fr, fc), rmax, rmin, cell: (r, c) }
}

/// Peak-versus-noise ratio: (Rmax − Rmin) / mean(R \ one max occurrence),
/// clamped to [0, cap]; a near-zero denominator maps to cap (peaked map)
/// or 0 (flat map).
pub fn pnr(map: &Map2, epsilon: f64, cap: f64) -> f64 {
    assert!(map.len() >= 2, "pnr needs at least two cells");
    let rmax = map.max();
    let rmin = map.min();
    let denom = (map.sum() - rmax) / (map.len() - 1) as f64;
    if denom.abs() < epsilon {
        return if rmax > rmin { cap } else { 0.0 };
    }
    ((rmax - rmin) / denom).clamp(0.0, cap)
}

/// Gate decision against the historical means computed BEFORE appending the
/// current values; both values are then recorded unconditionally.
///
/// The comparison is an inclusive ≥ with a relative slack of 1e-9: a frame
/// that reproduces the history exactly must pass, and the floating-point
/// mean of n equal values can land an ulp above the value itself.
pub fn gate_and_record(
    pnr_history: &mut Vec<f64>,
    rmax_history: &mut Vec<f64>,
    pnr_t: f64,
    rmax_t: f64,
) -> bool {
    assert!(!pnr_history.is_empty() && !rmax_history.is_empty(), "histories must be seeded");
    let pnr_mean = pnr_history.iter().sum::<f64>() / pnr_history.len() as f64;
    let rmax_mean = rmax_history.iter().sum::<f64>() / rmax_history.len() as f64;
    let above = |v: f64, mean: f64| v >= mean - 1e-9 * mean.abs();
    let pass = above(pnr_t, pnr_mean) && above(rmax_t, rmax_mean);
    pnr_history.push(pnr_t);
    rmax_history.push(rmax_t);
    pass
}

/// Wall-clock seconds accumulated per pipeline stage.
#[derive(Debug, Clone, Copy, Default)]
pub struct StageTimes {
    pub crop: f64,
    pub extract: f64,
    pub head: f64,
    pub scale: f64,
    pub update: f64,
    pub frames: usize,
}

/// Model plus optimizer state; shared by online tracking and offline
/// pretraining.
#[derive(Debug, Clone)]
pub(crate) struct TrainRig {
    pub extractor: Extractor,
    pub head: TrackHead,
    pub hann: Map2,
    head_opts: [OptState; 4],
    cnn_opts: Option<[OptState; 4]>,
}

impl TrainRig {
    pub fn new(extractor: Extractor, head: TrackHead, config: &TrackerConfig) -> Self {
        let opt = |len: usize| OptState::new(len, config.momentum, config.weight_decay_first, config.lr_first);
        let head_opts = [
            opt(head.layer1.weights.len()),
            opt(head.layer1.bias.len()),
            opt(head.layer2.weights.len()),
            opt(head.layer2.bias.len()),
        ];
        let cnn_opts = match &extractor {
            Extractor::TinyCnn { conv1, conv2 } => Some([
                opt(conv1.weights.len()),
                opt(conv1.bias.len()),
                opt(conv2.weights.len()),
                opt(conv2.bias.len()),
            ]),
            _ => None,
        };
        let cells = config.feature_cells();
        TrainRig { extractor, head, hann: hann2d(cells, cells), head_opts, cnn_opts }
    }

    pub fn response(&self, patch: &Map2) -> Map2 {
        let feat = extract(&self.extractor, patch);
        self.head.forward(&apply_window(&feat, &self.hann))
    }

    /// One forward/backward/SGD pass on (patch, label); extractor
    /// parameters train only when asked. Returns the pre-step loss.
    pub fn train_step(
        &mut self,
        patch: &Map2,
        label: &Map2,
        lr: f64,
        weight_decay: f64,
        train_extractor: bool,
    ) -> f64 {
        let feat = extract(&self.extractor, patch);
        let featw = apply_window(&feat, &self.hann);
        let (hidden, resp) = self.head.forward_full(&featw);

        let mut params: Vec<&[f64]> = vec![
            &self.head.layer1.weights,
            &self.head.layer1.bias,
            &self.head.layer2.weights,
            &self.head.layer2.bias,
        ];
        if train_extractor {
            if let Extractor::TinyCnn { conv1, conv2 } = &self.extractor {
                params.push(&conv1.weights);
                params.push(&conv1.bias);
                params.push(&conv2.weights);
                params.push(&conv2.bias);
            }
        }
        let (loss, dresp) = l2_loss_and_grad(&resp, label, &params, weight_decay);
        drop(params);

        let dresp_t = Tensor3::from_map(&dresp);
        let g2 = conv::conv2d_grads(&hidden, &self.head.layer2, &dresp_t, ConvMode::Same);
        let dhidden = g2.input.as_ref().expect("layer2 input grad");
        let da = conv::sigmoid_grad(&hidden, dhidden);
        let need_feat_grad = train_extractor && matches!(self.extractor, Extractor::TinyCnn { .. });
        let g1 = conv::conv2d_strided_grads(&featw, &self.head.layer1, &da, ConvMode::Same, 1, need_feat_grad);

        let cnn_grads = if need_feat_grad {
            let dfeatw = g1.input.as_ref().expect("layer1 input grad");
            let dfeat = apply_window(dfeatw, &self.hann);
            Some(tinycnn_backward(&self.extractor, patch, &dfeat))
        } else {
            None
        };

        for opt in self.head_opts.iter_mut() {
            opt.learning_rate = lr;
            opt.weight_decay = weight_decay;
        }
        sgd_step(&mut self.head.layer1.weights, &g1.weights, &mut self.head_opts[0]);
        sgd_step(&mut self.head.layer1.bias, &g1.bias, &mut self.head_opts[1]);
        sgd_step(&mut self.head.layer2.weights, &g2.weights, &mut self.head_opts[2]);
        sgd_step(&mut self.head.layer2.bias, &g2.bias, &mut self.head_opts[3]);

        if let (Some(cg), Some(opts), Extractor::TinyCnn { conv1, conv2 }) =
            (cnn_grads, self.cnn_opts.as_mut(), &mut self.extractor)
        {
            for opt in opts.iter_mut() {
                opt.learning_rate = lr;
                opt.weight_decay = weight_decay;
            }
            sgd_step(&mut conv1.weights, &cg.conv1_weights, &mut opts[0]);
            sgd_step(&mut conv1.bias, &cg.conv1_bias, &mut opts[1]);
            sgd_step(&mut conv2.weights, &cg.conv2_weights, &mut opts[2]);
            sgd_step(&mut conv2.bias, &cg.conv2_bias, &mut opts[3]);
        }
        loss
    }
}

/// All mutable per-target tracking state.
#[derive(Debug, Clone)]
pub struct TrackerState {
    pub config: TrackerConfig,
    rig: TrainRig,
    pub position: Rect,
    pub pnr_history: Vec<f64>,
    pub rmax_history: Vec<f64>,
    pub scale_filter: ScaleFilter,
    pub frame_index: usize,
    pub updates: usize,
    pub times: StageTimes,
    pub seed: u64,
}

/// Build the configured extractor; TinyCnn weights come from the salted
/// stream so the head draws identical values with or without pretraining.
pub fn build_extractor(config: &TrackerConfig, seed: u64) -> Extractor {
    match config.feature_kind {
        FeatureKind::Gray => Extractor::Gray,
        FeatureKind::Grad => Extractor::Grad,
        FeatureKind::TinyCnn => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ EXTRACTOR_SEED_SALT);
            Extractor::tiny_cnn(
                config.cnn_mid_channels,
                config.cnn_out_channels,
                config.cnn_kernel,
                config.cnn_init_std,
                &mut rng,
            )
        }
    }
}

impl TrackerState {
    /// Fit the randomly initialized head on the ground-truth patch of the
    /// first frame, seed the gating histories from the post-training
    /// response, and fit the scale filter.
    pub fn init_first_frame(frame: &Frame, ground_truth: &Rect, config: &TrackerConfig, seed: u64) -> Self {
        let extractor = build_extractor(config, seed);
        Self::init_with_extractor(frame, ground_truth, config, extractor, seed)
    }

    /// Same as [`init_first_frame`] but reusing an (offline-trained)
    /// extractor; the head is always re-initialized randomly.
    pub fn init_with_extractor(
        frame: &Frame,
        ground_truth: &Rect,
        config: &TrackerConfig,
        extractor: Extractor,
        seed: u64,
    ) -> Self {
        config.validate().expect("invalid tracker config");
        assert!(ground_truth.w >= 1.0 && ground_truth.h >= 1.0, "degenerate ground-truth rect");
        let position = clip_rect_center(ground_truth, frame);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let head = TrackHead::random(extractor.out_channels(), config, &mut rng);
        let mut rig = TrainRig::new(extractor, head, config);

        let p = config.patch_size;
        let win = SearchWindow::around(&position, config.padding, (p, p));
        let patch = sample_window(frame, &win);
        let label = centered_label(config, &win, &position);
        for _ in 0..config.first_frame_steps {
            rig.train_step(&patch, &label, config.lr_first, config.weight_decay_first, false);
        }

        let resp = rig.response(&patch);
        let pnr0 = pnr(&resp, config.epsilon, config.pnr_cap);
        let rmax0 = resp.max();

        let mut scale_filter = ScaleFilter::new(&config.scale, config.momentum);
        scale_filter.init_on_frame(frame, position.center(), (position.w, position.h), &config.scale);

        TrackerState {
            config: config.clone(),
            rig,
            position,
            pnr_history: vec![pnr0],
            rmax_history: vec![rmax0],
            scale_filter,
            frame_index: 1,
            updates: 0,
            times: StageTimes::default(),
            seed,
        }
    }

    pub fn extractor(&self) -> &Extractor {
        &self.rig.extractor
    }

    pub fn extractor_mut(&mut self) -> &mut Extractor {
        &mut self.rig.extractor
    }

    pub fn head(&self) -> &TrackHead {
        &self.rig.head
    }

    pub fn head_mut(&mut self) -> &mut TrackHead {
        &mut self.rig.head
    }

    /// Response of the current model on the crop at the current position.
    pub fn response_at_position(&self, frame: &Frame) -> ResponseMap {
        let p = self.config.patch_size;
        let win = SearchWindow::around(&self.position, self.config.padding, (p, p));
        let patch = sample_window(frame, &win);
        let map = self.rig.response(&patch);
        ResponseMap::from_window(map, self.rig.extractor.cell_stride(), &win)
    }

    /// One forward/backward/SGD pass; see [`TrainRig::train_step`].
    pub fn train_step(&mut self, patch: &Map2, label: &Map2, lr: f64, weight_decay: f64, train_extractor: bool) -> f64 {
        self.rig.train_step(patch, label, lr, weight_decay, train_extractor)
    }

    /// Gate the current confidence scores against the historical means and
    /// record them.
    pub fn gate_and_record(&mut self, pnr_t: f64, rmax_t: f64) -> bool {
        gate_and_record(&mut self.pnr_history, &mut self.rmax_history, pnr_t, rmax_t)
    }

    /// One small SGD step on the head at the current estimated position.
    pub fn model_update(&mut self, frame: &Frame) -> f64 {
        let p = self.config.patch_size;
        let win = SearchWindow::around(&self.position, self.config.padding, (p, p));
        let patch = sample_window(frame, &win);
        let label = centered_label(&self.config, &win, &self.position);
        self.rig.train_step(&patch, &label, self.config.lr_update, self.config.weight_decay_first, false)
    }

    /// Track one frame: crop at the previous position, locate the response
    /// peak, gate on PNR and Rmax, and update scale and model on accepted
    /// frames. Returns the new position estimate.
    pub fn step(&mut self, frame: &Frame) -> Rect {
        let cfg = self.config.clone();
        let p = cfg.patch_size;

        let t0 = Instant::now();
        let win = SearchWindow::around(&self.position, cfg.padding, (p, p));
        let patch = sample_window(frame, &win);
        let t1 = Instant::now();
        let feat = extract(&self.rig.extractor, &patch);
        let featw = apply_window(&feat, &self.rig.hann);
        let t2 = Instant::now();
        let map = self.rig.head.forward(&featw);
        let resp = ResponseMap::from_window(map, self.rig.extractor.cell_stride(), &win);
        let peak = locate_peak(&resp);
        let pnr_t = pnr(&resp.map, cfg.epsilon, cfg.pnr_cap);
        let t3 = Instant::now();

        // a peak outside the frame clamps the center to the frame bounds
        let cx = peak.pixel.0.clamp(0.0, (frame.width() - 1) as f64);
        let cy = peak.pixel.1.clamp(0.0, (frame.height() - 1) as f64);
        self.position = Rect::from_center(cx, cy, self.position.w, self.position.h);

        let update = self.gate_and_record(pnr_t, peak.rmax);

        let mut t_scale = 0.0;
        if cfg.scale_enabled && (update || !cfg.scale_on_update_only) {
            let ts = Instant::now();
            let center = self.position.center();
            let desc = scale_descriptors(frame, center, (self.position.w, self.position.h), &cfg.scale);
            let mult = estimate_scale(&self.scale_filter, &desc, &cfg.scale);
            let new_w = (self.position.w * mult).max(2.0);
            let new_h = (self.position.h * mult).max(2.0);
            self.position = Rect::from_center(center.0, center.1, new_w, new_h);
            if update {
                // filter updates only on accepted frames; training at the
                // estimated size every frame would teach the filter that a
                // lagging size estimate is centered
                let desc2 = scale_descriptors(frame, center, (new_w, new_h), &cfg.scale);
                scale_train(&mut self.scale_filter, &desc2, 0.0, &cfg.scale);
            }
            t_scale = ts.elapsed().as_secs_f64();
        }

        let mut t_update = 0.0;
        if update {
            let tu = Instant::now();
            self.model_update(frame);
            self.updates += 1;
            t_update = tu.elapsed().as_secs_f64();
        }

        self.times.crop += (t1 - t0).as_secs_f64();
        self.times.extract += (t2 - t1).as_secs_f64();
        self.times.head += (t3 - t2).as_secs_f64();
        self.times.scale += t_scale;
        self.times.update += t_update;
        self.times.frames += 1;
        self.frame_index += 1;
        self.position
    }
}

/// Gaussian label for a crop window, centered where the target center maps
/// into feature cells, with σ proportional to the target size in cells.
pub fn centered_label(config: &TrackerConfig, win: &SearchWindow, target: &Rect) -> Map2 {
    let stride = config.cell_stride() as f64;
    let cells = config.feature_cells();
    let (cx, cy) = target.center();
    let col = (win.patch_x(cx) + 0.5) / stride - 0.5;
    let row = (win.patch_y(cy) + 0.5) / stride - 0.5;
    let tw_cells = target.w / win.w * win.out_w as f64 / stride;
    let th_cells = target.h / win.h * win.out_h as f64 / stride;
    gaussian_label(cells, cells, (row, col), (th_cells, tw_cells), config.sigma_factor)
}

fn clip_rect_center(rect: &Rect, frame: &Frame) -> Rect {
    let (cx, cy) = rect.center();
    let cx = cx.clamp(0.0, (frame.width() - 1) as f64);
    let cy = cy.clamp(0.0, (frame.height() - 1) as f64);
    Rect::from_center(cx, cy, rect.w, rect.h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn head_composition_reduces_to_scaled_sigmoid() {
        // layer1 = 1×1 identity, layer2 = 1×1 weight w, zero biases
        let head = TrackHead {
            layer1: FilterStack::from_weights(1, 1, 1, 1, vec![1.0], vec![0.0]),
            layer2: FilterStack::from_weights(1, 1, 1, 1, vec![0.7], vec![0.0]),
        };
        let feat = Tensor3::from_vec(1, 2, 2, vec![-1.0, 0.0, 0.5, 2.0]);
        let resp = head.forward(&feat);
        for (r, &x) in resp.data().iter().zip(feat.data()) {
            assert!((r - 0.7 * conv::sigmoid(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_head_gives_zero_response() {
        let head = TrackHead {
            layer1: FilterStack::zeros(4, 2, 3, 3),
            layer2: FilterStack::zeros(1, 4, 3, 3),
        };
        let feat = Tensor3::from_vec(2, 4, 4, (0..32).map(|k| k as f64).collect());
        let resp = head.forward(&feat);
        assert!(resp.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn head_matches_chained_brute_force_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let cfg = TrackerConfig {
            hidden_channels: 3,
            head_kernel: 3,
            head_init_std: 0.5,
            head_init_std2: 0.5,
            head_init_bias: -0.5,
            ..TrackerConfig::default()
        };
        let head = TrackHead::random(4, &cfg, &mut rng);
        let feat = {
            let data = (0..4 * 6 * 6).map(|_| rng.random_range(-1.0..1.0)).collect();
            Tensor3::from_vec(4, 6, 6, data)
        };
        let resp = head.forward(&feat);
        // chained oracle: two naive same-mode convolutions + sigmoid
        let naive_same = |input: &Tensor3, f: &FilterStack| -> Tensor3 {
            let pad = (f.k_h - 1) / 2;
            let (h, w) = input.spatial_dims();
            let mut out = Tensor3::zeros(f.out_channels, h, w);
            for o in 0..f.out_channels {
                for i in 0..h {
                    for j in 0..w {
                        let mut acc = f.bias[o];
                        for l in 0..f.in_channels {
                            for u in 0..f.k_h {
                                for v in 0..f.k_w {
                                    let iy = i as isize + u as isize - pad as isize;
                                    let jx = j as isize + v as isize - pad as isize;
                                    if iy >= 0 && (iy as usize) < h && jx >= 0 && (jx as usize) < w {
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
        };
        let a = naive_same(&feat, &head.layer1);
        let mut y = a.clone();
        for v in y.data_mut() {
            *v = conv::sigmoid(*v);
        }
        let want = naive_same(&y, &head.layer2);
        for (g, w) in resp.data().iter().zip(want.data()) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn isolated_peak_maps_to_pixels() {
        let mut m = Map2::zeros(8, 8);
        m.set(2, 3, 1.5);
        let peak = locate_peak(&ResponseMap::plain(m));
        assert_eq!(peak.pixel, (3.0, 2.0));
        assert_eq!(peak.rmax, 1.5);
        assert_eq!(peak.rmin, 0.0);
        assert_eq!(peak.cell, (2, 3));
    }

    #[test]
    fn uniform_map_breaks_ties_at_origin() {
        let m = Map2::from_vec(4, 4, vec![0.3; 16]);
        let peak = locate_peak(&ResponseMap::plain(m));
        assert_eq!(peak.cell, (0, 0));
        assert_eq!(peak.rmax, peak.rmin);
    }

    #[test]
    fn parabolic_offset_matches_vertex_formula() {
        // (0.5, 1.0, 0.9): vertex at (0.5−0.9)/(2·(0.5−2+0.9)) = +1/3
        let off = parabolic_offset(0.5, 1.0, 0.9);
        assert!((off - (0.5 - 0.9) / (2.0 * (0.5 - 2.0 + 0.9))).abs() < 1e-15);
        assert!((off - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn refinement_never_exceeds_half_cell() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for _ in 0..200 {
            let m = Map2::from_vec(5, 5, (0..25).map(|_| rng.random_range(-1.0..1.0)).collect());
            let (r, c) = m.argmax();
            let peak = locate_peak(&ResponseMap::plain(m));
            assert!((peak.pixel.0 - c as f64).abs() <= 0.5 + 1e-12);
            assert!((peak.pixel.1 - r as f64).abs() <= 0.5 + 1e-12);
        }
    }

    #[test]
    fn argmax_agrees_with_brute_force_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..100 {
            let m = Map2::from_vec(6, 7, (0..42).map(|_| rng.random_range(-1.0..1.0)).collect());
            let mut best = (0usize, 0usize);
            let mut bv = f64::NEG_INFINITY;
            for i in 0..6 {
                for j in 0..7 {
                    if m.get(i, j) > bv {
                        bv = m.get(i, j);
                        best = (i, j);
                    }
                }
            }
            let peak = locate_peak(&ResponseMap::plain(m));
            assert_eq!(peak.cell, best);
        }
    }

    #[test]
    fn pnr_of_uniform_map_is_zero() {
        let m = Map2::from_vec(3, 3, vec![0.7; 9]);
        assert_eq!(pnr(&m, 1e-12, 1e6), 0.0);
    }

    #[test]
    fn pnr_zero_denominator_hits_cap() {
        let m = Map2::from_vec(2, 2, vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(pnr(&m, 1e-12, 1e6), 1e6);
    }

    #[test]
    fn pnr_matches_direct_arithmetic() {
        let m = Map2::from_vec(2, 2, vec![0.9, 0.1, 0.1, 0.3]);
        let want = (0.9 - 0.1) / ((0.1 + 0.1 + 0.3) / 3.0);
        let got = pnr(&m, 1e-12, 1e6);
        assert!((got - want).abs() < 1e-12);
        assert!((got - 4.8).abs() < 1e-12);
    }

    #[test]
    #[should_panic(expected = "at least two cells")]
    fn pnr_rejects_single_cell() {
        let m = Map2::from_vec(1, 1, vec![1.0]);
        pnr(&m, 1e-12, 1e6);
    }

    #[test]
    fn pnr_is_invariant_under_positive_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        for _ in 0..50 {
            let m = Map2::from_vec(4, 4, (0..16).map(|_| rng.random_range(0.1..1.0)).collect());
            let c: f64 = rng.random_range(0.1..10.0);
            let scaled = Map2::from_vec(4, 4, m.data().iter().map(|v| v * c).collect());
            let a = pnr(&m, 1e-12, 1e6);
            let b = pnr(&scaled, 1e-12, 1e6);
            if a > 0.0 && a < 1e6 {
                assert!((a - b).abs() < 1e-9 * a.max(1.0), "pnr {a} vs scaled {b}");
            }
        }
    }

    #[test]
    fn pnr_is_not_translation_invariant() {
        let m = Map2::from_vec(2, 2, vec![0.9, 0.1, 0.1, 0.3]);
        let shifted = Map2::from_vec(2, 2, m.data().iter().map(|v| v + 1.0).collect());
        let a = pnr(&m, 1e-12, 1e6);
        let b = pnr(&shifted, 1e-12, 1e6);
        assert!((a - b).abs() > 1e-6, "adding a constant must change pnr");
    }

    #[test]
    fn gate_passes_when_both_above_means() {
        let mut ph = vec![4.0];
        let mut rh = vec![0.5];
        assert!(gate_and_record(&mut ph, &mut rh, 5.0, 0.6));
        assert_eq!(ph, vec![4.0, 5.0]);
        assert_eq!(rh, vec![0.5, 0.6]);
    }

    #[test]
    fn gate_is_a_conjunction() {
        let mut ph = vec![4.0];
        let mut rh = vec![0.5];
        assert!(!gate_and_record(&mut ph, &mut rh, 5.0, 0.4));
        assert_eq!(ph.len(), 2);
        assert_eq!(rh.len(), 2);
    }

    #[test]
    fn gate_boundary_is_inclusive() {
        let mut ph = vec![2.0, 4.0, 6.0];
        let mut rh = vec![2.0, 4.0, 6.0];
        // mean is exactly 4.0
        assert!(gate_and_record(&mut ph, &mut rh, 4.0, 4.0));
    }

    #[test]
    fn gate_records_regardless_of_outcome() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let mut ph = vec![1.0];
        let mut rh = vec![1.0];
        for k in 0..20 {
            let before = ph.len();
            gate_and_record(&mut ph, &mut rh, rng.random_range(0.0..2.0), rng.random_range(0.0..2.0));
            assert_eq!(ph.len(), before + 1);
            assert_eq!(rh.len(), ph.len());
            assert_eq!(ph.len(), k + 2);
        }
    }
}
