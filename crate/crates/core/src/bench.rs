//! Throughput measurement: OPE over a generated synthetic sequence with a
//! per-stage timing breakdown. First-frame training is excluded from the
//! FPS figure.

use std::fmt;

use crate::config::TrackerConfig;
use crate::eval::ope_run;
use crate::synth::{synth_sequence, SynthSpec};

#[derive(Debug, Clone)]
pub struct BenchReport {
    /// Tracked frames (sequence length minus the init frame).
    pub frames: usize,
    pub total_seconds: f64,
    pub mean_fps: f64,
    pub median_fps: f64,
    /// Mean milliseconds per frame per stage: crop, extract, head, update, scale.
    pub stage_ms: Vec<(&'static str, f64)>,
    pub precision20: f64,
    pub auc: f64,
}

pub fn run_bench(config: &TrackerConfig, n_frames: usize) -> BenchReport {
    let spec = SynthSpec::translate(2.0).with_frames(n_frames.max(2));
    let seq = synth_sequence(&spec, config.seed);
    let (result, summary) = ope_run(config, &seq);

    let tracked = &result.timing[1..];
    let total: f64 = tracked.iter().sum();
    let mut per_frame = tracked.to_vec();
    per_frame.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = per_frame[per_frame.len() / 2];
    let n = summary.stage.frames.max(1) as f64;
    let stage_ms = vec![
        ("crop", summary.stage.crop / n * 1e3),
        ("extract", summary.stage.extract / n * 1e3),
        ("head", summary.stage.head / n * 1e3),
        ("update", summary.stage.update / n * 1e3),
        ("scale", summary.stage.scale / n * 1e3),
    ];
    BenchReport {
        frames: tracked.len(),
        total_seconds: total,
        mean_fps: tracked.len() as f64 / total,
        median_fps: 1.0 / median,
        stage_ms,
        precision20: summary.precision20,
        auc: summary.auc,
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "tracked frames : {}", self.frames)?;
        writeln!(f, "total time     : {:.3} s", self.total_seconds)?;
        writeln!(f, "mean fps       : {:.1}", self.mean_fps)?;
        writeln!(f, "median fps     : {:.1}", self.median_fps)?;
        writeln!(f, "per-stage mean ms/frame:")?;
        for (name, ms) in &self.stage_ms {
            writeln!(f, "  {name:<8} {ms:8.3}")?;
        }
        writeln!(f, "precision@20   : {:.3}", self.precision20)?;
        write!(f, "success auc    : {:.3}", self.auc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fps_is_frames_over_seconds_and_stages_fit_in_total() {
        let mut cfg = TrackerConfig::default();
        cfg.patch_size = 32;
        let report = run_bench(&cfg, 20);
        assert_eq!(report.frames, 19);
        let fps = report.frames as f64 / report.total_seconds;
        assert!((report.mean_fps - fps).abs() < 1e-9);
        let stage_total_ms: f64 = report.stage_ms.iter().map(|(_, ms)| ms).sum();
        let per_frame_ms = report.total_seconds / report.frames as f64 * 1e3;
        assert!(stage_total_ms <= per_frame_ms + 1e-6, "stage sums exceed total per-frame time");
    }
}
