//! Offline pretraining of the feature extractor: jittered ground-truth
//! crops with Gaussian labels, trained end to end through extractor and
//! head. The returned extractor seeds first-frame initialization; the head
//! is re-randomized per target as usual.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::TrackerConfig;
use crate::eval::Sequence;
use crate::features::{sample_window, Extractor, SearchWindow};
use crate::tracker::{build_extractor, TrackHead, TrainRig};
use crate::window::gaussian_label;

#[derive(Debug, Clone)]
pub struct PretrainOutcome {
    pub extractor: Extractor,
    pub head: TrackHead,
    /// Mean training loss per epoch.
    pub epoch_loss: Vec<f64>,
}

/// Loop epochs × frames over the corpus: crop around the ground truth with
/// translation jitter (±jitter_translate of the window size) and scale
/// jitter (±jitter_scale), label the true center, and take one SGD step
/// with the extractor unfrozen.
pub fn pretrain_offline(
    sequences: &[Sequence],
    config: &TrackerConfig,
    epochs: usize,
    seed: u64,
) -> PretrainOutcome {
    assert!(!sequences.is_empty(), "pretraining needs a non-empty dataset");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let extractor = build_extractor(config, seed);
    let mut head_rng = ChaCha8Rng::seed_from_u64(seed);
    let head = TrackHead::random(extractor.out_channels(), config, &mut head_rng);
    let mut rig = TrainRig::new(extractor, head, config);

    let p = config.patch_size;
    let stride = config.cell_stride() as f64;
    let cells = config.feature_cells();
    let mut epoch_loss = Vec::with_capacity(epochs);
    for _ in 0..epochs {
        let mut sum = 0.0;
        let mut count = 0usize;
        for seq in sequences {
            for (frame, gt) in seq.frames.iter().zip(&seq.ground_truth) {
                let (cx, cy) = gt.center();
                let base_w = gt.w * (1.0 + config.padding);
                let base_h = gt.h * (1.0 + config.padding);
                let jt = config.jitter_translate;
                let js = config.jitter_scale;
                let dx = rng.random_range(-jt..=jt) * base_w;
                let dy = rng.random_range(-jt..=jt) * base_h;
                let zoom = 1.0 + rng.random_range(-js..=js);
                let ww = base_w * zoom;
                let wh = base_h * zoom;
                let win = SearchWindow {
                    x0: cx + dx - ww / 2.0,
                    y0: cy + dy - wh / 2.0,
                    w: ww,
                    h: wh,
                    out_h: p,
                    out_w: p,
                };
                let patch = sample_window(frame, &win);
                // label peaks at the jittered position of the true center
                let col = (win.patch_x(cx) + 0.5) / stride - 0.5;
                let row = (win.patch_y(cy) + 0.5) / stride - 0.5;
                let tw_cells = gt.w / ww * p as f64 / stride;
                let th_cells = gt.h / wh * p as f64 / stride;
                let label =
                    gaussian_label(cells, cells, (row, col), (th_cells, tw_cells), config.sigma_factor);
                sum += rig.train_step(
                    &patch,
                    &label,
                    config.lr_pretrain,
                    config.weight_decay_pretrain,
                    true,
                );
                count += 1;
            }
        }
        epoch_loss.push(sum / count as f64);
    }
    PretrainOutcome { extractor: rig.extractor, head: rig.head, epoch_loss }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::FeatureKind;
    use crate::synth::{synth_sequence, SynthSpec};
    use crate::tracker::build_extractor;

    fn tinycnn_config() -> TrackerConfig {
        TrackerConfig {
            feature_kind: FeatureKind::TinyCnn,
            patch_size: 32,
            ..TrackerConfig::default()
        }
    }

    #[test]
    fn zero_epochs_returns_initialization_unchanged() {
        let cfg = tinycnn_config();
        let seq = synth_sequence(&SynthSpec::translate(2.0).with_frames(4), 3);
        let out = pretrain_offline(&[seq], &cfg, 0, 5);
        assert!(out.epoch_loss.is_empty());
        assert_eq!(out.extractor, build_extractor(&cfg, 5));
    }

    #[test]
    #[should_panic(expected = "non-empty dataset")]
    fn empty_dataset_is_rejected() {
        pretrain_offline(&[], &tinycnn_config(), 1, 0);
    }

    #[test]
    fn zero_jitter_puts_label_peak_at_patch_center_cell() {
        let mut cfg = tinycnn_config();
        cfg.jitter_translate = 0.0;
        cfg.jitter_scale = 0.0;
        // with no jitter the window is centered on the target, so the label
        // argmax must sit at the central cells
        let seq = synth_sequence(&SynthSpec::translate(0.5).with_frames(3), 4);
        let gt = seq.ground_truth[0];
        let (cx, cy) = gt.center();
        let p = cfg.patch_size;
        let win = SearchWindow::around(&gt, cfg.padding, (p, p));
        let stride = cfg.cell_stride() as f64;
        let col = (win.patch_x(cx) + 0.5) / stride - 0.5;
        let row = (win.patch_y(cy) + 0.5) / stride - 0.5;
        let cells = cfg.feature_cells() as f64;
        assert!((col - (cells - 1.0) / 2.0).abs() < 0.51);
        assert!((row - (cells - 1.0) / 2.0).abs() < 0.51);
    }

    #[test]
    fn loss_decreases_from_first_to_last_epoch() {
        let mut cfg = tinycnn_config();
        cfg.pretrain_epochs = 3;
        let seqs = vec![
            synth_sequence(&SynthSpec::translate(2.0).with_frames(10), 11),
            synth_sequence(&SynthSpec::zoom(1.01).with_frames(10), 12),
        ];
        let out = pretrain_offline(&seqs, &cfg, 3, 6);
        assert_eq!(out.epoch_loss.len(), 3);
        assert!(
            out.epoch_loss[2] < out.epoch_loss[0],
            "pretraining did not reduce loss: {:?}",
            out.epoch_loss
        );
    }
}
