//! Tracker configuration: typed defaults plus the flat `key = value` config
//! file format. Unknown keys are rejected so experiment records stay honest.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which feature extractor the tracker runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Gray,
    Grad,
    TinyCnn,
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FeatureKind::Gray => "gray",
            FeatureKind::Grad => "grad",
            FeatureKind::TinyCnn => "tinycnn",
        };
        f.write_str(s)
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gray" => Ok(FeatureKind::Gray),
            "grad" => Ok(FeatureKind::Grad),
            "tinycnn" => Ok(FeatureKind::TinyCnn),
            other => Err(Error::Config(format!(
                "unknown feature kind '{other}' (expected gray, grad or tinycnn)"
            ))),
        }
    }
}

/// Scale-branch settings: pyramid geometry, descriptor shape and its SGD.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleConfig {
    /// Number of pyramid scales S; odd so n = 0 is the center scale.
    pub count: usize,
    /// Scale factor a between adjacent pyramid levels.
    pub step: f64,
    /// Descriptor length per scale; must be a perfect square.
    pub descriptor_dim: usize,
    /// Side of the square template each pyramid crop is resampled to.
    pub template_size: usize,
    pub lr: f64,
    /// Width (in scale indices) of the 1-D Gaussian training label.
    pub sigma_cells: f64,
    pub weight_decay: f64,
    /// Passes over the synthetic-offset sweep when fitting on frame one.
    pub init_rounds: usize,
}

impl Default for ScaleConfig {
    fn default() -> Self {
        ScaleConfig {
            count: 33,
            step: 1.02,
            descriptor_dim: 16,
            template_size: 16,
            lr: 0.05,
            sigma_cells: 1.5,
            weight_decay: 1e-4,
            init_rounds: 150,
        }
    }
}

impl ScaleConfig {
    pub fn half_span(&self) -> i32 {
        ((self.count - 1) / 2) as i32
    }

    pub fn validate(&self) -> Result<()> {
        if self.count % 2 == 0 || self.count < 3 {
            return Err(Error::Config(format!("scale_count must be odd and >= 3, got {}", self.count)));
        }
        if self.step <= 1.0 {
            return Err(Error::Config(format!("scale_step must exceed 1, got {}", self.step)));
        }
        let g = (self.descriptor_dim as f64).sqrt() as usize;
        if g * g != self.descriptor_dim {
            return Err(Error::Config(format!(
                "scale_descriptor_dim must be a perfect square, got {}",
                self.descriptor_dim
            )));
        }
        if self.template_size % g != 0 {
            return Err(Error::Config(format!(
                "scale_template_size {} must divide into a {g}x{g} block grid",
                self.template_size
            )));
        }
        if self.lr <= 0.0 || self.sigma_cells <= 0.0 {
            return Err(Error::Config("scale lr and sigma must be positive".into()));
        }
        Ok(())
    }
}

/// All tunables of the tracker. Defaults follow the reference operating
/// point: padding 1.8, 50 first-frame SGD steps, momentum 0.9, first-frame
/// weight decay 0.01, 33 scales at factor 1.02. Learning rates are sized
/// for this small head; the full-size network used 5e-7 / 1e-7.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig {
    /// Side of the square patch the search window is resampled to.
    pub patch_size: usize,
    /// Context padding: window side = target side × (1 + padding).
    pub padding: f64,
    /// Gaussian label width relative to the target size (in cells).
    pub sigma_factor: f64,
    pub first_frame_steps: usize,
    pub lr_first: f64,
    pub lr_update: f64,
    pub lr_pretrain: f64,
    pub momentum: f64,
    pub weight_decay_first: f64,
    pub weight_decay_pretrain: f64,
    /// Hidden channels between the two head layers.
    pub hidden_channels: usize,
    pub head_kernel: usize,
    /// Gaussian init std of the first head layer.
    pub head_init_std: f64,
    /// Gaussian init std of the response layer; kept small so the initial
    /// response is near zero and the peak forms where the label says.
    pub head_init_std2: f64,
    /// First-layer bias init. Negative values bias the sigmoid toward its
    /// low tail, which shrinks the common-mode curvature of the ridge loss
    /// and lets 50 first-frame steps run at a much larger stable rate.
    pub head_init_bias: f64,
    pub feature_kind: FeatureKind,
    pub cnn_mid_channels: usize,
    pub cnn_out_channels: usize,
    pub cnn_kernel: usize,
    pub cnn_init_std: f64,
    pub pnr_cap: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Run the scale branch at all (off reproduces the fixed-size ablation).
    pub scale_enabled: bool,
    /// Estimate scale only on frames that pass the update gate.
    pub scale_on_update_only: bool,
    /// Record PNR/Rmax history on every frame, gated or not.
    pub record_all_frames: bool,
    /// Pretraining translation jitter, fraction of the crop window size.
    pub jitter_translate: f64,
    /// Pretraining scale jitter, fractional size perturbation.
    pub jitter_scale: f64,
    pub pretrain_epochs: usize,
    pub scale: ScaleConfig,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            patch_size: 64,
            padding: 1.8,
            sigma_factor: 0.1,
            first_frame_steps: 50,
            lr_first: 2e-5,
            lr_update: 4e-6,
            lr_pretrain: 2e-5,
            momentum: 0.9,
            weight_decay_first: 0.01,
            weight_decay_pretrain: 0.005,
            hidden_channels: 32,
            head_kernel: 7,
            head_init_std: 1.0,
            head_init_std2: 0.05,
            head_init_bias: -2.0,
            feature_kind: FeatureKind::Grad,
            cnn_mid_channels: 8,
            cnn_out_channels: 16,
            cnn_kernel: 3,
            cnn_init_std: 0.3,
            pnr_cap: 1e6,
            epsilon: 1e-12,
            seed: 42,
            scale_enabled: true,
            scale_on_update_only: true,
            record_all_frames: true,
            jitter_translate: 0.05,
            jitter_scale: 0.02,
            pretrain_epochs: 5,
            scale: ScaleConfig::default(),
        }
    }
}

impl TrackerConfig {
    /// Feature-map side for the configured patch size.
    pub fn feature_cells(&self) -> usize {
        self.patch_size / self.cell_stride()
    }

    pub fn cell_stride(&self) -> usize {
        match self.feature_kind {
            FeatureKind::Gray | FeatureKind::Grad => 1,
            FeatureKind::TinyCnn => 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.patch_size == 0 || self.patch_size % self.cell_stride() != 0 {
            return Err(Error::Config(format!(
                "patch_size {} must be positive and divisible by the feature stride {}",
                self.patch_size,
                self.cell_stride()
            )));
        }
        if self.lr_first <= 0.0 || self.lr_update <= 0.0 || self.lr_pretrain <= 0.0 {
            return Err(Error::Config("learning rates must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!("momentum must lie in [0,1), got {}", self.momentum)));
        }
        if self.padding < 0.0 {
            return Err(Error::Config("padding must be nonnegative".into()));
        }
        if self.head_kernel % 2 == 0 || self.cnn_kernel % 2 == 0 {
            return Err(Error::Config("head and cnn kernels must be odd".into()));
        }
        self.scale.validate()
    }

    /// Serialize as `key = value` lines, one per field, in a fixed order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        kv("patch_size", self.patch_size.to_string());
        kv("padding", self.padding.to_string());
        kv("sigma_factor", self.sigma_factor.to_string());
        kv("first_frame_steps", self.first_frame_steps.to_string());
        kv("lr_first", self.lr_first.to_string());
        kv("lr_update", self.lr_update.to_string());
        kv("lr_pretrain", self.lr_pretrain.to_string());
        kv("momentum", self.momentum.to_string());
        kv("weight_decay_first", self.weight_decay_first.to_string());
        kv("weight_decay_pretrain", self.weight_decay_pretrain.to_string());
        kv("hidden_channels", self.hidden_channels.to_string());
        kv("head_kernel", self.head_kernel.to_string());
        kv("head_init_std", self.head_init_std.to_string());
        kv("head_init_std2", self.head_init_std2.to_string());
        kv("head_init_bias", self.head_init_bias.to_string());
        kv("feature_kind", self.feature_kind.to_string());
        kv("cnn_mid_channels", self.cnn_mid_channels.to_string());
        kv("cnn_out_channels", self.cnn_out_channels.to_string());
        kv("cnn_kernel", self.cnn_kernel.to_string());
        kv("cnn_init_std", self.cnn_init_std.to_string());
        kv("pnr_cap", self.pnr_cap.to_string());
        kv("epsilon", self.epsilon.to_string());
        kv("seed", self.seed.to_string());
        kv("scale_enabled", self.scale_enabled.to_string());
        kv("scale_on_update_only", self.scale_on_update_only.to_string());
        kv("record_all_frames", self.record_all_frames.to_string());
        kv("jitter_translate", self.jitter_translate.to_string());
        kv("jitter_scale", self.jitter_scale.to_string());
        kv("pretrain_epochs", self.pretrain_epochs.to_string());
        kv("scale_count", self.scale.count.to_string());
        kv("scale_step", self.scale.step.to_string());
        kv("scale_descriptor_dim", self.scale.descriptor_dim.to_string());
        kv("scale_template_size", self.scale.template_size.to_string());
        kv("scale_lr", self.scale.lr.to_string());
        kv("scale_sigma_cells", self.scale.sigma_cells.to_string());
        kv("scale_weight_decay", self.scale.weight_decay.to_string());
        kv("scale_init_rounds", self.scale.init_rounds.to_string());
        s
    }

    /// Parse `key = value` lines; '#' starts a comment, absent keys keep
    /// their defaults, unknown keys are an error.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = TrackerConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value', got '{raw}'", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            cfg.set_key(key, value).map_err(|e| {
                Error::Config(format!("line {}: {e}", lineno + 1))
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set_key(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value.parse().map_err(|_| Error::Config(format!("invalid value '{value}' for key '{key}'")))
        }
        match key {
            "patch_size" => self.patch_size = num(key, value)?,
            "padding" => self.padding = num(key, value)?,
            "sigma_factor" => self.sigma_factor = num(key, value)?,
            "first_frame_steps" => self.first_frame_steps = num(key, value)?,
            "lr_first" => self.lr_first = num(key, value)?,
            "lr_update" => self.lr_update = num(key, value)?,
            "lr_pretrain" => self.lr_pretrain = num(key, value)?,
            "momentum" => self.momentum = num(key, value)?,
            "weight_decay_first" => self.weight_decay_first = num(key, value)?,
            "weight_decay_pretrain" => self.weight_decay_pretrain = num(key, value)?,
            "hidden_channels" => self.hidden_channels = num(key, value)?,
            "head_kernel" => self.head_kernel = num(key, value)?,
            "head_init_std" => self.head_init_std = num(key, value)?,
            "head_init_std2" => self.head_init_std2 = num(key, value)?,
            "head_init_bias" => self.head_init_bias = num(key, value)?,
            "feature_kind" => self.feature_kind = value.parse()?,
            "cnn_mid_channels" => self.cnn_mid_channels = num(key, value)?,
            "cnn_out_channels" => self.cnn_out_channels = num(key, value)?,
            "cnn_kernel" => self.cnn_kernel = num(key, value)?,
            "cnn_init_std" => self.cnn_init_std = num(key, value)?,
            "pnr_cap" => self.pnr_cap = num(key, value)?,
            "epsilon" => self.epsilon = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "scale_enabled" => self.scale_enabled = num(key, value)?,
            "scale_on_update_only" => self.scale_on_update_only = num(key, value)?,
            "record_all_frames" => self.record_all_frames = num(key, value)?,
            "jitter_translate" => self.jitter_translate = num(key, value)?,
            "jitter_scale" => self.jitter_scale = num(key, value)?,
            "pretrain_epochs" => self.pretrain_epochs = num(key, value)?,
            "scale_count" => self.scale.count = num(key, value)?,
            "scale_step" => self.scale.step = num(key, value)?,
            "scale_descriptor_dim" => self.scale.descriptor_dim = num(key, value)?,
            "scale_template_size" => self.scale.template_size = num(key, value)?,
            "scale_lr" => self.scale.lr = num(key, value)?,
            "scale_sigma_cells" => self.scale.sigma_cells = num(key, value)?,
            "scale_weight_decay" => self.scale.weight_decay = num(key, value)?,
            "scale_init_rounds" => self.scale.init_rounds = num(key, value)?,
            other => return Err(Error::Config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_carry_reference_constants() {
        let c = TrackerConfig::default();
        assert_eq!(c.padding, 1.8);
        assert_eq!(c.first_frame_steps, 50);
        assert_eq!(c.momentum, 0.9);
        assert_eq!(c.weight_decay_first, 0.01);
        assert_eq!(c.weight_decay_pretrain, 0.005);
        assert_eq!(c.scale.count, 33);
        assert_eq!(c.scale.step, 1.02);
        assert_eq!(c.head_kernel, 7);
        assert_eq!(c.jitter_translate, 0.05);
        assert_eq!(c.jitter_scale, 0.02);
        c.validate().unwrap();
    }

    #[test]
    fn config_round_trips() {
        let mut c = TrackerConfig::default();
        c.patch_size = 32;
        c.lr_first = 3.5e-4;
        c.feature_kind = FeatureKind::TinyCnn;
        c.scale.count = 17;
        c.scale.step = 1.05;
        let parsed = TrackerConfig::from_text(&c.to_text()).unwrap();
        assert_eq!(parsed, c);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# full line comment\n\npatch_size = 32  # trailing comment\n";
        let c = TrackerConfig::from_text(text).unwrap();
        assert_eq!(c.patch_size, 32);
        assert_eq!(c.padding, 1.8); // default retained
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = TrackerConfig::from_text("patch_sz = 32\n").unwrap_err();
        assert!(err.to_string().contains("unknown config key"));
    }

    #[test]
    fn invalid_value_is_rejected() {
        let err = TrackerConfig::from_text("patch_size = large\n").unwrap_err();
        assert!(err.to_string().contains("invalid value"));
    }

    #[test]
    fn validation_rejects_even_scale_count() {
        let err = TrackerConfig::from_text("scale_count = 32\n").unwrap_err();
        assert!(err.to_string().contains("odd"));
    }
}
