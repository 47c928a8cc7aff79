//! Command-line entry points: track, eval, synth, pretrain, bench, plot.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Parser, Subcommand};

use crate::config::TrackerConfig;
use crate::dataset::{load_results, load_sequence, load_weights, save_results, save_sequence, save_weights};
use crate::error::{Error, Result};
use crate::eval::{ope_run_with_extractor, Curve, OpeSummary, Sequence};
use crate::features::Extractor;
use crate::plot::emit_plot;
use crate::pretrain::pretrain_offline;
use crate::synth::{synth_sequence, SynthSpec};

#[derive(Parser)]
#[command(name = "convtrack", version, about = "Convolutional visual tracker and OPE benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Track one sequence directory and write a results file.
    Track {
        seq_dir: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Results file path (default: results.txt).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Pretrained weights (JSON) to initialize the feature extractor.
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// One-pass evaluation over every sequence directory in a dataset.
    Eval {
        dataset_dir: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the per-sequence report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Worker threads; the report is identical for any value.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Generate a synthetic sequence dataset directory.
    Synth {
        /// translate | zoom | occlude | translate-occlude | clutter
        kind: String,
        #[arg(long, default_value_t = 100)]
        frames: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Output directory (default: synth-<kind>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Translation speed in px/frame (translate kinds).
        #[arg(long)]
        velocity: Option<f64>,
        /// Per-frame zoom factor (zoom kind).
        #[arg(long)]
        rate: Option<f64>,
        /// First occluded frame (occlude kinds).
        #[arg(long)]
        start: Option<usize>,
        /// Occlusion length in frames (occlude kinds).
        #[arg(long)]
        duration: Option<usize>,
        /// Distractor density (clutter kind).
        #[arg(long)]
        density: Option<f64>,
    },
    /// Pretrain the feature extractor offline on a dataset directory.
    Pretrain {
        dataset_dir: PathBuf,
        #[arg(long)]
        epochs: Option<usize>,
        /// Weights output file (JSON).
        #[arg(long, default_value = "weights.json")]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Measure tracking throughput on a synthetic sequence.
    Bench {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        frames: usize,
    },
    /// Render precision/success curves from results files into an SVG.
    Plot {
        #[arg(required = true)]
        results: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parse and run; returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<TrackerConfig> {
    let mut cfg = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            TrackerConfig::from_text(&text)?
        }
        None => TrackerConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn result_metrics(summary: &OpeSummary, pc: &Curve, sc: &Curve) -> Vec<(String, Vec<f64>)> {
    vec![
        ("precision20".to_string(), vec![summary.precision20]),
        ("auc".to_string(), vec![summary.auc]),
        ("precision_curve".to_string(), pc.values.clone()),
        ("success_curve".to_string(), sc.values.clone()),
    ]
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Track { seq_dir, config, out, seed, weights } => {
            let cfg = load_config(config.as_deref(), seed)?;
            let extractor = weights.map(|p| load_weights(&p)).transpose()?.map(|(ex, _)| ex);
            let seq = load_sequence(&seq_dir)?;
            let (result, summary) = ope_run_with_extractor(&cfg, &seq, extractor);
            let pc = crate::eval::precision_curve(&result.rects, &seq.ground_truth);
            let sc = crate::eval::success_curve(&result.rects, &seq.ground_truth);
            let out = out.unwrap_or_else(|| PathBuf::from("results.txt"));
            save_results(&out, &result.rects, &result_metrics(&summary, &pc, &sc))?;
            println!(
                "{}: frames={} precision20={:.6} auc={:.6} updates={} fps={:.1}",
                seq.name, summary.frames, summary.precision20, summary.auc, summary.updates, summary.mean_fps
            );
            println!("results written to {}", out.display());
            Ok(())
        }
        Command::Eval { dataset_dir, config, report, jobs, seed, weights } => {
            let cfg = load_config(config.as_deref(), seed)?;
            let extractor = weights.map(|p| load_weights(&p)).transpose()?.map(|(ex, _)| ex);
            let sequences = load_dataset(&dataset_dir)?;
            let summaries = eval_parallel(&cfg, &sequences, extractor, jobs.max(1))?;
            let mut text = String::new();
            let mut mean_p = 0.0;
            let mut mean_a = 0.0;
            for (seq, summary) in sequences.iter().zip(&summaries) {
                text.push_str(&format!(
                    "{}: precision20={:.6} auc={:.6} frames={} updates={}\n",
                    seq.name, summary.precision20, summary.auc, summary.frames, summary.updates
                ));
                mean_p += summary.precision20;
                mean_a += summary.auc;
            }
            let n = summaries.len() as f64;
            text.push_str(&format!("mean: precision20={:.6} auc={:.6}\n", mean_p / n, mean_a / n));
            match report {
                Some(p) => {
                    fs::write(&p, &text).map_err(|e| Error::io(&p, e))?;
                    // timing stays out of the report so it is reproducible
                    for (seq, summary) in sequences.iter().zip(&summaries) {
                        println!("{}: fps={:.1}", seq.name, summary.mean_fps);
                    }
                    println!("report written to {}", p.display());
                }
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::Synth { kind, frames, seed, out, velocity, rate, start, duration, density } => {
            let mut spec = match kind.as_str() {
                "translate" => SynthSpec::translate(velocity.unwrap_or(2.0)),
                "zoom" => SynthSpec::zoom(rate.unwrap_or(1.01)),
                "occlude" => SynthSpec::occlude(start.unwrap_or(40), duration.unwrap_or(21)),
                "translate-occlude" => SynthSpec::translate_occlude(
                    velocity.unwrap_or(2.0),
                    start.unwrap_or(40),
                    duration.unwrap_or(8),
                ),
                "clutter" => SynthSpec::clutter(density.unwrap_or(0.5)),
                other => {
                    return Err(Error::Config(format!(
                        "unknown synth kind '{other}' (translate, zoom, occlude, translate-occlude, clutter)"
                    )))
                }
            };
            spec = spec.with_frames(frames);
            let seq = synth_sequence(&spec, seed);
            let out = out.unwrap_or_else(|| PathBuf::from(format!("synth-{kind}")));
            save_sequence(&seq, &out)?;
            println!("wrote {} frames to {}", seq.len(), out.display());
            Ok(())
        }
        Command::Pretrain { dataset_dir, epochs, out, config, seed } => {
            let cfg = load_config(config.as_deref(), seed)?;
            let sequences = load_dataset(&dataset_dir)?;
            let epochs = epochs.unwrap_or(cfg.pretrain_epochs);
            let outcome = pretrain_offline(&sequences, &cfg, epochs, cfg.seed);
            for (k, loss) in outcome.epoch_loss.iter().enumerate() {
                println!("epoch {:>3}: mean loss {loss:.6}", k + 1);
            }
            save_weights(&out, &outcome.extractor, &outcome.head)?;
            println!("weights written to {}", out.display());
            Ok(())
        }
        Command::Bench { config, frames } => {
            let cfg = load_config(config.as_deref(), None)?;
            let report = crate::bench::run_bench(&cfg, frames);
            println!("{report}");
            Ok(())
        }
        Command::Plot { results, out } => {
            let mut curves = Vec::new();
            let mut labels = Vec::new();
            for path in &results {
                let (_, metrics) = load_results(path)?;
                let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                let scalar = |key: &str| {
                    metrics.iter().find(|(k, _)| k == key).and_then(|(_, v)| v.first().copied())
                };
                for (key, values) in &metrics {
                    let (thresholds, tag): (Vec<f64>, &str) = match key.as_str() {
                        "precision_curve" => ((0..values.len()).map(|t| t as f64).collect(), "precision"),
                        "success_curve" => {
                            ((0..values.len()).map(|t| t as f64 / 100.0).collect(), "success")
                        }
                        _ => continue,
                    };
                    let note = match tag {
                        "precision" => scalar("precision20").map(|v| format!(" (p20={v:.3})")).unwrap_or_default(),
                        _ => scalar("auc").map(|v| format!(" (auc={v:.3})")).unwrap_or_default(),
                    };
                    curves.push(Curve { thresholds, values: values.clone() });
                    labels.push(format!("{stem} {tag}{note}"));
                }
            }
            if curves.is_empty() {
                return Err(Error::Parse(
                    "no curves found; results files need a #metrics block with curve entries".into(),
                ));
            }
            emit_plot(&curves, &labels, &out)?;
            println!("plot written to {}", out.display());
            Ok(())
        }
    }
}

/// Load every sequence subdirectory, sorted by name.
fn load_dataset(dir: &Path) -> Result<Vec<Sequence>> {
    let mut subdirs: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    subdirs.sort();
    if subdirs.is_empty() {
        return Err(Error::Dataset(format!("{}: no sequence directories found", dir.display())));
    }
    subdirs.iter().map(|p| load_sequence(p)).collect()
}

/// Run OPE over every sequence on a small worker pool. Work items are
/// claimed by index and written back by index, so the output order (and
/// therefore the report) is independent of the job count.
fn eval_parallel(
    cfg: &TrackerConfig,
    sequences: &[Sequence],
    extractor: Option<Extractor>,
    jobs: usize,
) -> Result<Vec<OpeSummary>> {
    let slots: Mutex<Vec<Option<OpeSummary>>> = Mutex::new(vec![None; sequences.len()]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..jobs.min(sequences.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= sequences.len() {
                    break;
                }
                let (_, summary) = ope_run_with_extractor(cfg, &sequences[i], extractor.clone());
                slots.lock().unwrap()[i] = Some(summary);
            });
        }
    });
    Ok(slots.into_inner().unwrap().into_iter().map(|s| s.expect("worker filled slot")).collect())
}
