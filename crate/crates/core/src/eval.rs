//! One-pass-evaluation metrics: IoU / center error, precision and success
//! curves, and the OPE driver that runs a tracker over a sequence.

use std::time::Instant;

use crate::config::TrackerConfig;
use crate::features::{Extractor, Frame, Rect};
use crate::tracker::{StageTimes, TrackerState};

/// Ordered frames with per-frame ground truth.
#[derive(Debug, Clone)]
pub struct Sequence {
    pub name: String,
    pub frames: Vec<Frame>,
    pub ground_truth: Vec<Rect>,
}

impl Sequence {
    pub fn new(name: String, frames: Vec<Frame>, ground_truth: Vec<Rect>) -> Self {
        assert_eq!(frames.len(), ground_truth.len(), "frame/ground-truth count mismatch");
        assert!(frames.len() >= 2, "a sequence needs at least two frames");
        Sequence { name, frames, ground_truth }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Per-frame predictions; frame 0 is the ground truth by OPE convention.
#[derive(Debug, Clone)]
pub struct TrackResult {
    pub rects: Vec<Rect>,
    /// Per-frame wall seconds; 0 for frame 0 (no tracking happens there).
    pub timing: Vec<f64>,
}

/// Threshold sweep with values in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub thresholds: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn iou(a: &Rect, b: &Rect) -> f64 {
    let ix = (a.x + a.w).min(b.x + b.w) - a.x.max(b.x);
    let iy = (a.y + a.h).min(b.y + b.h) - a.y.max(b.y);
    if ix <= 0.0 || iy <= 0.0 {
        return 0.0;
    }
    let inter = ix * iy;
    inter / (a.area() + b.area() - inter)
}

pub fn center_error(a: &Rect, b: &Rect) -> f64 {
    let (ax, ay) = a.center();
    let (bx, by) = b.center();
    (ax - bx).hypot(ay - by)
}

/// Fraction of frames with center error ≤ τ for τ = 0, 1, …, 50 pixels.
pub fn precision_curve(pred: &[Rect], gt: &[Rect]) -> Curve {
    assert_eq!(pred.len(), gt.len(), "prediction/ground-truth length mismatch");
    assert!(!pred.is_empty());
    let errs: Vec<f64> = pred.iter().zip(gt).map(|(p, g)| center_error(p, g)).collect();
    let thresholds: Vec<f64> = (0..=50).map(|t| t as f64).collect();
    let values = thresholds
        .iter()
        .map(|&t| errs.iter().filter(|&&e| e <= t).count() as f64 / errs.len() as f64)
        .collect();
    Curve { thresholds, values }
}

/// Curve value at the largest threshold ≤ τ.
pub fn precision_at(curve: &Curve, tau: f64) -> f64 {
    let mut v = 0.0;
    for (t, val) in curve.thresholds.iter().zip(&curve.values) {
        if *t <= tau {
            v = *val;
        }
    }
    v
}

/// Fraction of frames with overlap strictly above τ for τ = 0, 0.01, …, 1.
pub fn success_curve(pred: &[Rect], gt: &[Rect]) -> Curve {
    assert_eq!(pred.len(), gt.len(), "prediction/ground-truth length mismatch");
    assert!(!pred.is_empty());
    let ious: Vec<f64> = pred.iter().zip(gt).map(|(p, g)| iou(p, g)).collect();
    let thresholds: Vec<f64> = (0..=100).map(|t| t as f64 / 100.0).collect();
    let values = thresholds
        .iter()
        .map(|&t| ious.iter().filter(|&&o| o > t).count() as f64 / ious.len() as f64)
        .collect();
    Curve { thresholds, values }
}

/// Arithmetic mean of the success-curve values.
pub fn auc(curve: &Curve) -> f64 {
    curve.values.iter().sum::<f64>() / curve.values.len() as f64
}

#[derive(Debug, Clone)]
pub struct OpeSummary {
    pub precision20: f64,
    pub auc: f64,
    pub mean_fps: f64,
    pub frames: usize,
    pub updates: usize,
    pub stage: StageTimes,
}

/// Initialize from frame 0's ground truth and track to the end, no resets.
pub fn ope_run(config: &TrackerConfig, seq: &Sequence) -> (TrackResult, OpeSummary) {
    ope_run_with_extractor(config, seq, None)
}

/// OPE with an optional pretrained extractor replacing the fresh one.
pub fn ope_run_with_extractor(
    config: &TrackerConfig,
    seq: &Sequence,
    extractor: Option<Extractor>,
) -> (TrackResult, OpeSummary) {
    let mut state = match extractor {
        Some(ex) => TrackerState::init_with_extractor(&seq.frames[0], &seq.ground_truth[0], config, ex, config.seed),
        None => TrackerState::init_first_frame(&seq.frames[0], &seq.ground_truth[0], config, config.seed),
    };
    let mut rects = Vec::with_capacity(seq.len());
    let mut timing = Vec::with_capacity(seq.len());
    rects.push(seq.ground_truth[0]);
    timing.push(0.0);
    for frame in &seq.frames[1..] {
        let t0 = Instant::now();
        rects.push(state.step(frame));
        timing.push(t0.elapsed().as_secs_f64());
    }
    let tracked: f64 = timing[1..].iter().sum();
    let pc = precision_curve(&rects, &seq.ground_truth);
    let sc = success_curve(&rects, &seq.ground_truth);
    let summary = OpeSummary {
        precision20: precision_at(&pc, 20.0),
        auc: auc(&sc),
        mean_fps: if tracked > 0.0 { (seq.len() - 1) as f64 / tracked } else { 0.0 },
        frames: seq.len(),
        updates: state.updates,
        stage: state.times,
    };
    (TrackResult { rects, timing }, summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn iou_of_identical_rects_is_one() {
        let a = Rect::new(3.0, 4.0, 10.0, 6.0);
        assert_eq!(iou(&a, &a), 1.0);
    }

    #[test]
    fn iou_of_disjoint_rects_is_zero() {
        let a = Rect::new(0.0, 0.0, 2.0, 2.0);
        let b = Rect::new(5.0, 5.0, 2.0, 2.0);
        assert_eq!(iou(&a, &b), 0.0);
    }

    #[test]
    fn iou_matches_pixel_count_oracle() {
        // A=(0,0,2,2), B=(1,1,2,2): intersection 1, union 7.
        let a = Rect::new(0.0, 0.0, 2.0, 2.0);
        let b = Rect::new(1.0, 1.0, 2.0, 2.0);
        let got = iou(&a, &b);
        assert!((got - 1.0 / 7.0).abs() < 1e-12);
        // counting oracle on a 10×-upsampled integer grid
        assert!((got - pixel_count_iou(&a, &b)).abs() < 1e-12);
    }

    /// Counting oracle: rasterize both rects onto a 10×-upsampled grid and
    /// count cells. Exact whenever coordinates are multiples of 0.1.
    fn pixel_count_iou(a: &Rect, b: &Rect) -> f64 {
        let up = 10.0;
        let cell = |r: &Rect| {
            let x0 = (r.x * up).round() as i64;
            let y0 = (r.y * up).round() as i64;
            let x1 = ((r.x + r.w) * up).round() as i64;
            let y1 = ((r.y + r.h) * up).round() as i64;
            (x0, y0, x1, y1)
        };
        let (ax0, ay0, ax1, ay1) = cell(a);
        let (bx0, by0, bx1, by1) = cell(b);
        let mut inter = 0u64;
        let mut union = 0u64;
        let x_lo = ax0.min(bx0);
        let x_hi = ax1.max(bx1);
        let y_lo = ay0.min(by0);
        let y_hi = ay1.max(by1);
        for y in y_lo..y_hi {
            for x in x_lo..x_hi {
                let in_a = x >= ax0 && x < ax1 && y >= ay0 && y < ay1;
                let in_b = x >= bx0 && x < bx1 && y >= by0 && y < by1;
                if in_a && in_b {
                    inter += 1;
                }
                if in_a || in_b {
                    union += 1;
                }
            }
        }
        inter as f64 / union as f64
    }

    #[test]
    fn iou_randomized_against_pixel_count_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..100 {
            // coordinates snapped to 0.1 so the 10× grid count is exact
            let snap = |v: f64| (v * 10.0).round() / 10.0;
            let a = Rect::new(
                snap(rng.random_range(0.0..5.0)),
                snap(rng.random_range(0.0..5.0)),
                snap(rng.random_range(0.5..4.0)),
                snap(rng.random_range(0.5..4.0)),
            );
            let b = Rect::new(
                snap(rng.random_range(0.0..5.0)),
                snap(rng.random_range(0.0..5.0)),
                snap(rng.random_range(0.5..4.0)),
                snap(rng.random_range(0.5..4.0)),
            );
            let got = iou(&a, &b);
            if got == 0.0 {
                continue;
            }
            assert!((got - pixel_count_iou(&a, &b)).abs() < 1e-12);
        }
    }

    #[test]
    fn iou_is_symmetric_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        for _ in 0..100 {
            let a = Rect::new(rng.random_range(0.0..5.0), rng.random_range(0.0..5.0), rng.random_range(0.1..4.0), rng.random_range(0.1..4.0));
            let b = Rect::new(rng.random_range(0.0..5.0), rng.random_range(0.0..5.0), rng.random_range(0.1..4.0), rng.random_range(0.1..4.0));
            let ab = iou(&a, &b);
            assert_eq!(ab, iou(&b, &a));
            assert!((0.0..=1.0).contains(&ab));
        }
    }

    #[test]
    fn center_error_examples() {
        let a = Rect::new(0.0, 0.0, 4.0, 4.0);
        assert_eq!(center_error(&a, &a), 0.0);
        let b = Rect::new(3.0, 4.0, 4.0, 4.0);
        assert_eq!(center_error(&a, &b), 5.0);
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        for _ in 0..50 {
            let c = Rect::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), 2.0, 2.0);
            let d = Rect::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), 2.0, 2.0);
            let (cx, cy) = c.center();
            let (dx, dy) = d.center();
            let want = ((cx - dx) * (cx - dx) + (cy - dy) * (cy - dy)).sqrt();
            assert!((center_error(&c, &d) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn perfect_tracking_gives_unit_precision() {
        let gt: Vec<Rect> = (0..5).map(|k| Rect::new(k as f64, 0.0, 3.0, 3.0)).collect();
        let c = precision_curve(&gt, &gt);
        assert!(c.values.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn precision_counts_by_enumeration() {
        // center errors 0, 10, 30 → value(20) = 2/3
        let gt = vec![Rect::new(0.0, 0.0, 2.0, 2.0); 3];
        let pred = vec![
            Rect::new(0.0, 0.0, 2.0, 2.0),
            Rect::new(10.0, 0.0, 2.0, 2.0),
            Rect::new(30.0, 0.0, 2.0, 2.0),
        ];
        let c = precision_curve(&pred, &gt);
        assert!((precision_at(&c, 20.0) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn precision_curve_is_monotone_nondecreasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        let gt: Vec<Rect> = (0..20).map(|_| Rect::new(rng.random_range(0.0..50.0), rng.random_range(0.0..50.0), 4.0, 4.0)).collect();
        let pred: Vec<Rect> = (0..20).map(|_| Rect::new(rng.random_range(0.0..50.0), rng.random_range(0.0..50.0), 4.0, 4.0)).collect();
        let c = precision_curve(&pred, &gt);
        for k in 1..c.values.len() {
            assert!(c.values[k] >= c.values[k - 1]);
        }
    }

    #[test]
    fn success_auc_for_perfect_overlap_is_100_of_101() {
        let gt = vec![Rect::new(0.0, 0.0, 2.0, 2.0); 4];
        let c = success_curve(&gt, &gt);
        // strict inequality fails only at τ = 1
        assert!((auc(&c) - 100.0 / 101.0).abs() < 1e-12);
    }

    #[test]
    fn success_auc_for_zero_overlap_is_zero() {
        let gt = vec![Rect::new(0.0, 0.0, 2.0, 2.0); 4];
        let pred = vec![Rect::new(10.0, 10.0, 2.0, 2.0); 4];
        let c = success_curve(&pred, &gt);
        assert_eq!(auc(&c), 0.0);
    }

    #[test]
    fn auc_matches_double_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(65);
        for _ in 0..100 {
            let n = rng.random_range(3..12);
            let gt: Vec<Rect> = (0..n).map(|_| Rect::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0), rng.random_range(1.0..5.0), rng.random_range(1.0..5.0))).collect();
            let pred: Vec<Rect> = (0..n).map(|_| Rect::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0), rng.random_range(1.0..5.0), rng.random_range(1.0..5.0))).collect();
            let c = success_curve(&pred, &gt);
            let got = auc(&c);
            // brute-force double loop over frames × thresholds
            let mut acc = 0.0;
            for t in 0..=100 {
                let tau = t as f64 / 100.0;
                let mut cnt = 0;
                for k in 0..n {
                    if iou(&pred[k], &gt[k]) > tau {
                        cnt += 1;
                    }
                }
                acc += cnt as f64 / n as f64;
            }
            acc /= 101.0;
            assert!((got - acc).abs() < 1e-12);
        }
    }

    #[test]
    fn success_curve_is_monotone_nonincreasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(66);
        let gt: Vec<Rect> = (0..20).map(|_| Rect::new(rng.random_range(0.0..20.0), rng.random_range(0.0..20.0), 4.0, 4.0)).collect();
        let pred: Vec<Rect> = (0..20).map(|_| Rect::new(rng.random_range(0.0..20.0), rng.random_range(0.0..20.0), 4.0, 4.0)).collect();
        let c = success_curve(&pred, &gt);
        for k in 1..c.values.len() {
            assert!(c.values[k] <= c.values[k - 1]);
        }
    }
}
