// Scratch harness for tuning: first-frame convergence, gate behavior,
// zoom tracking, and translate OPE numbers. Not part of the deliverable.

use convtrack::config::TrackerConfig;
use convtrack::eval::{ope_run, center_error};
use convtrack::features::{sample_window, SearchWindow};
use convtrack::synth::{synth_sequence, SynthSpec};
use convtrack::tracker::{centered_label, locate_peak, pnr, TrackerState};

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "first".into());
    match which.as_str() {
        "first" => first_frame(),
        "translate" => translate(),
        "occlude" => occlude(),
        "zoom" => zoom(),
        "sweep" => sweep(),
        "blob" => blob(),
        "scaleinit" => scaleinit(),
        "gate" => gate_stream(),
        "pretrain" => pretrain_probe(),
        _ => eprintln!("unknown probe"),
    }
}

// Criterion-9 shape: pretrain the tinycnn extractor on a synthetic corpus,
// then compare held-out OPE AUC against the from-scratch extractor.
fn pretrain_probe() {
    use convtrack::eval::ope_run_with_extractor;
    use convtrack::pretrain::pretrain_offline;
    let mut cfg = TrackerConfig::default();
    cfg.feature_kind = convtrack::config::FeatureKind::TinyCnn;
    cfg.sigma_factor = flag("--sigma", 0.2);
    cfg.lr_pretrain = flag("--lrp", cfg.lr_pretrain);
    cfg.cnn_init_std = flag("--cstd", cfg.cnn_init_std);
    let epochs = flag("--epochs", 5.0) as usize;

    // 200-frame corpus: two translate and two zoom sequences
    let corpus = vec![
        synth_sequence(&SynthSpec::translate(2.0).with_frames(50), 101),
        synth_sequence(
            &SynthSpec { start_center: (250.0, 60.0), ..SynthSpec::translate(-1.5) }.with_frames(50),
            102,
        ),
        synth_sequence(&SynthSpec::zoom(1.01).with_frames(50), 103),
        synth_sequence(&SynthSpec::clutter(0.4).with_frames(50), 104),
    ];
    let held_out = synth_sequence(&SynthSpec::translate(2.0), 7);

    let t0 = std::time::Instant::now();
    let outcome = pretrain_offline(&corpus, &cfg, epochs, cfg.seed);
    println!(
        "pretrained {} epochs in {:.1}s; losses {:?}",
        epochs,
        t0.elapsed().as_secs_f64(),
        outcome.epoch_loss.iter().map(|l| (l * 10.0).round() / 10.0).collect::<Vec<_>>()
    );
    let (_, scratch) = ope_run_with_extractor(&cfg, &held_out, None);
    let (_, pre) = ope_run_with_extractor(&cfg, &held_out, Some(outcome.extractor));
    println!(
        "held-out AUC: scratch {:.3} vs pretrained {:.3} (delta {:+.3}); p20 {:.3} vs {:.3}",
        scratch.auc,
        pre.auc,
        pre.auc - scratch.auc,
        scratch.precision20,
        pre.precision20
    );
}

// Gate discrimination on the trained model's confidence stream at
// ground-truth crops: measures Eqs. (4)-(6) decisions without closed-loop
// position feedback.
fn gate_stream() {
    use convtrack::tracker::gate_and_record;
    let vel = flag("--vel", 0.0);
    let mut spec = if vel != 0.0 {
        SynthSpec::translate_occlude(vel, 40, 21)
    } else {
        SynthSpec::occlude(40, 21)
    };
    spec.clutter_density = flag("--density", 0.0);
    let seq = synth_sequence(&spec, 7);
    let cfg = TrackerConfig::default();
    let state = TrackerState::init_first_frame(&seq.frames[0], &seq.ground_truth[0], &cfg, cfg.seed);
    let mut pnr_h = state.pnr_history.clone();
    let mut rmax_h = state.rmax_history.clone();
    let mut occ = (0, 0);
    let mut clean = (0, 0);
    for t in 1..seq.len() {
        let mut probe_state = state.clone();
        probe_state.position = seq.ground_truth[t];
        let resp = probe_state.response_at_position(&seq.frames[t]);
        let p = pnr(&resp.map, cfg.epsilon, cfg.pnr_cap);
        let peak = locate_peak(&resp);
        let pass = gate_and_record(&mut pnr_h, &mut rmax_h, p, peak.rmax);
        let is_occ = (40..61).contains(&t);
        if is_occ {
            occ.1 += 1;
            occ.0 += pass as usize;
        } else {
            clean.1 += 1;
            clean.0 += pass as usize;
            if !pass && std::env::args().any(|a| a == "-v") {
                let n = pnr_h.len();
                println!(
                    "fail t {t}: pnr {:.4} vs mean {:.4}; rmax {:.5} vs mean {:.5}",
                    pnr_h[n - 1],
                    pnr_h[..n - 1].iter().sum::<f64>() / (n - 1) as f64,
                    rmax_h[n - 1],
                    rmax_h[..n - 1].iter().sum::<f64>() / (n - 1) as f64
                );
            }
        }
    }
    println!(
        "gt-crop stream: occluded {}/{} = {:.2}, clean {}/{} = {:.2}",
        occ.0,
        occ.1,
        occ.0 as f64 / occ.1 as f64,
        clean.0,
        clean.1,
        clean.0 as f64 / clean.1 as f64
    );
}

// Isolate the scale branch: init on frame 0, then check estimates against
// synthetic shifts (descriptors at base size a^(-s) · true size peak at s).
fn scaleinit() {
    use convtrack::scale::{estimate_scale, scale_descriptors, scale_response, ScaleFilter};
    let occ = std::env::args().any(|a| a == "--occ");
    let seq = if occ {
        synth_sequence(&SynthSpec::occlude(40, 21), 7)
    } else {
        synth_sequence(&SynthSpec::zoom(1.01), 7)
    };
    let frame = &seq.frames[0];
    let gt = seq.ground_truth[0];
    let (cx, cy) = gt.center();

    {
        let cfg = TrackerConfig::default();
        let mut filter = ScaleFilter::new(&cfg.scale, cfg.momentum);
        filter.init_on_frame(frame, (cx, cy), (gt.w, gt.h), &cfg.scale);
        let desc = scale_descriptors(frame, (cx, cy), (gt.w, gt.h), &cfg.scale);
        let scores = scale_response(&filter, &desc);
        println!("scores around center (default cfg):");
        for (k, s) in scores.iter().enumerate() {
            if (12..=20).contains(&k) {
                println!("  n {:+} score {s:+.4}", k as i32 - 16);
            }
        }
        println!("estimate at s=0: {:.4}", estimate_scale(&filter, &desc, &cfg.scale));
    }

    for &(lr, rounds, sigma) in &[
        (0.05, 50, 1.0),
        (0.05, 150, 1.0),
        (0.05, 400, 1.0),
        (0.02, 400, 1.0),
        (0.05, 400, 1.5),
        (0.08, 400, 1.0),
    ] {
        let mut cfg = TrackerConfig::default();
        cfg.scale.lr = lr;
        cfg.scale.init_rounds = rounds;
        cfg.scale.sigma_cells = sigma;
        let mut filter = ScaleFilter::new(&cfg.scale, cfg.momentum);
        filter.init_on_frame(frame, (cx, cy), (gt.w, gt.h), &cfg.scale);
        let mut line = format!("lr {lr:5.3} rounds {rounds:2} sig {sigma:3.1} → ");
        for &s in &[-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0] {
            let base = (gt.w * cfg.scale.step.powf(-s), gt.h * cfg.scale.step.powf(-s));
            let desc = scale_descriptors(frame, (cx, cy), base, &cfg.scale);
            let est = estimate_scale(&filter, &desc, &cfg.scale);
            let want = cfg.scale.step.powf(s);
            line.push_str(&format!("[s={s:+.0}: {:.4}/{want:.4}] ", est));
        }
        println!("{line}");
    }
}

// Criterion-3 style setup: a radial blob patch, default-geometry label.
fn blob() {
    use convtrack::features::Frame;
    let n = 64usize;
    let mut px = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let d2 = (i as f64 - 31.5).powi(2) + (j as f64 - 31.5).powi(2);
            px[i * n + j] = 0.25 + 0.55 * (-d2 / (2.0 * 36.0)).exp();
        }
    }
    let frame = Frame::from_pixels(n, n, px);
    let w = n as f64 / 2.8;
    let gt = convtrack::features::Rect::from_center(31.5, 31.5, w, w);

    let mut grid = Vec::new();
    for &std in &[0.8, 1.0, 1.2] {
        for &l2f in &[0.03, 0.05, 0.08] {
            for &l1bias in &[-1.5, -2.0, -2.5] {
                for &lr in &[1.5e-5, 2e-5, 2.5e-5] {
                    for &sigma in &[0.10, 0.12] {
                        grid.push((std, l2f, l1bias, lr, 0.9, sigma));
                    }
                }
            }
        }
    }
    for (std, l2f, l1bias, lr, mom, sigma) in grid {
        let mut cfg = TrackerConfig::default();
        cfg.head_init_std = std;
        cfg.head_init_std2 = std * l2f;
        cfg.head_init_bias = l1bias;
        cfg.first_frame_steps = 0;
        cfg.momentum = mom;
        cfg.sigma_factor = sigma;
        let mut state = TrackerState::init_first_frame(&frame, &gt, &cfg, cfg.seed);
        let p = cfg.patch_size;
        let win = SearchWindow::around(&gt, cfg.padding, (p, p));
        let patch = sample_window(&frame, &win);
        let label = centered_label(&cfg, &win, &gt);
        let mut first = 0.0;
        let mut last = 0.0;
        for k in 0..50 {
            let l = state.train_step(&patch, &label, lr, cfg.weight_decay_first, false);
            if k == 0 {
                first = l;
            }
            last = l;
        }
        let resp = state.response_at_position(&frame);
        let peak = locate_peak(&resp);
        let (lr_row, lr_col) = label_argmax(&label);
        let cell_err = ((peak.cell.0 as f64 - lr_row as f64).powi(2)
            + (peak.cell.1 as f64 - lr_col as f64).powi(2))
        .sqrt();
        let ratio = last / first;
        let ok = ratio < 0.5 && cell_err <= 1.0;
        println!(
            "{} std {std:4.2} l2f {l2f:4.2} b1 {l1bias:4.1} lr {lr:7.1e} mom {mom:.2} sig {sigma:.2} → ratio {ratio:6.3} cell err {cell_err:5.2} pnr {:7.2}",
            if ok { "OK " } else { "   " },
            pnr(&resp.map, cfg.epsilon, cfg.pnr_cap)
        );
    }
}

fn label_argmax(label: &convtrack::tensor::Map2) -> (usize, usize) {
    label.argmax()
}

fn flag(name: &str, default: f64) -> f64 {
    std::env::args()
        .skip_while(|a| a != name)
        .nth(1)
        .and_then(|v| v.parse().ok())
        .unwrap_or(default)
}

fn sweep() {
    let zero_l2 = std::env::args().any(|a| a == "--zero-l2");
    let patch = flag("--patch", 64.0) as usize;
    let sigma = flag("--sigma", 0.1);
    let momentum = flag("--momentum", 0.9);
    let seq = synth_sequence(&SynthSpec::translate(2.0).with_frames(3), 7);
    let frame = &seq.frames[0];
    let gt = seq.ground_truth[0];
    for &std in &[0.1, 0.3, 1.0, 3.0] {
        for &lr in &[3e-7, 1e-6, 3e-6, 1e-5, 3e-5, 1e-4] {
            let mut cfg = TrackerConfig::default();
            cfg.head_init_std = std;
            cfg.head_init_std2 = if zero_l2 { 1e-12 } else { std * flag("--l2f", 1.0) };
            cfg.head_init_bias = flag("--l1bias", 0.0);
            cfg.first_frame_steps = 0;
            cfg.patch_size = patch;
            cfg.sigma_factor = sigma;
            cfg.momentum = momentum;
            let mut state = TrackerState::init_first_frame(frame, &gt, &cfg, cfg.seed);
            let p = cfg.patch_size;
            let win = SearchWindow::around(&gt, cfg.padding, (p, p));
            let patch = sample_window(frame, &win);
            let label = centered_label(&cfg, &win, &gt);
            let mut first = 0.0;
            let mut last = 0.0;
            for k in 0..50 {
                let l = state.train_step(&patch, &label, lr, cfg.weight_decay_first, false);
                if k == 0 {
                    first = l;
                }
                last = l;
            }
            let resp = state.response_at_position(frame);
            let peak = locate_peak(&resp);
            let (cx, cy) = gt.center();
            let derr = ((peak.pixel.0 - cx).powi(2) + (peak.pixel.1 - cy).powi(2)).sqrt();
            println!(
                "std {std:5.2} lr {lr:8.1e} → loss {first:9.2} → {last:9.2} (ratio {:6.3}) peak err {derr:6.2}px pnr {:8.2}",
                last / first,
                pnr(&resp.map, cfg.epsilon, cfg.pnr_cap)
            );
        }
    }
}

fn first_frame() {
    let mut cfg = TrackerConfig::default();
    if std::env::args().any(|a| a == "--tinycnn") {
        cfg.feature_kind = convtrack::config::FeatureKind::TinyCnn;
    }
    cfg.sigma_factor = flag("--sigma", cfg.sigma_factor);
    cfg.lr_first = flag("--lrf", cfg.lr_first);
    cfg.head_init_std = flag("--std", cfg.head_init_std);
    cfg.head_init_std2 = flag("--std2", cfg.head_init_std2);
    cfg.head_init_bias = flag("--l1bias", cfg.head_init_bias);
    cfg.cnn_init_std = flag("--cstd", cfg.cnn_init_std);
    let seq = synth_sequence(&SynthSpec::translate(2.0).with_frames(3), 7);
    let frame = &seq.frames[0];
    let gt = seq.ground_truth[0];

    // replicate init loop manually to watch the loss
    let mut cfg2 = cfg.clone();
    cfg2.first_frame_steps = 0;
    let mut state = TrackerState::init_first_frame(frame, &gt, &cfg2, cfg.seed);
    let p = cfg.patch_size;
    let win = SearchWindow::around(&gt, cfg.padding, (p, p));
    let patch = sample_window(frame, &win);
    let label = centered_label(&cfg, &win, &gt);
    let mut losses = Vec::new();
    for _ in 0..50 {
        losses.push(state.train_step(&patch, &label, cfg.lr_first, cfg.weight_decay_first, false));
    }
    let resp = state.response_at_position(frame);
    let peak = locate_peak(&resp);
    let p0 = pnr(&resp.map, cfg.epsilon, cfg.pnr_cap);
    println!("loss[0] = {:.4}, loss[10] = {:.4}, loss[49] = {:.4}", losses[0], losses[10], losses[49]);
    println!("ratio last/first = {:.4}", losses[49] / losses[0]);
    println!("peak cell {:?} pixel {:?} gt center {:?}", peak.cell, peak.pixel, gt.center());
    println!("rmax {:.4} rmin {:.4} pnr {:.3}", peak.rmax, peak.rmin, p0);
}

fn translate() {
    let mut cfg = TrackerConfig::default();
    if std::env::args().any(|a| a == "--tinycnn") {
        cfg.feature_kind = convtrack::config::FeatureKind::TinyCnn;
    }
    cfg.sigma_factor = flag("--sigma", cfg.sigma_factor);
    cfg.lr_first = flag("--lrf", cfg.lr_first);
    cfg.lr_update = flag("--lru", cfg.lr_update);
    let seq = synth_sequence(&SynthSpec::translate(2.0), 7);
    let (result, summary) = ope_run(&cfg, &seq);
    let mut errs = Vec::new();
    for (r, g) in result.rects.iter().zip(&seq.ground_truth) {
        errs.push(center_error(r, g));
    }
    let maxe = errs.iter().cloned().fold(0.0, f64::max);
    println!(
        "precision20 {:.3} auc {:.3} updates {}/{} fps {:.1} max_err {:.2}",
        summary.precision20, summary.auc, summary.updates, summary.frames - 1, summary.mean_fps, maxe
    );
    for (k, e) in errs.iter().enumerate() {
        if k % 10 == 0 {
            println!("frame {k:3} err {e:6.2} w {:.1}", result.rects[k].w);
        }
    }
}

fn occlude() {
    let mut cfg = TrackerConfig::default();
    cfg.scale_enabled = !std::env::args().any(|a| a == "--no-scale");
    cfg.sigma_factor = flag("--sigma", cfg.sigma_factor);
    cfg.lr_update = flag("--lru", cfg.lr_update);
    let verbose = std::env::args().any(|a| a == "-v");
    let mut spec = if std::env::args().any(|a| a == "--moving") {
        SynthSpec::translate_occlude(flag("--vel", 2.0), 40, flag("--dur", 21.0) as usize)
    } else {
        SynthSpec::occlude(40, flag("--dur", 21.0) as usize)
    };
    spec.clutter_density = flag("--density", 0.0);
    let seq = synth_sequence(&spec, 7);
    let mut state = TrackerState::init_first_frame(&seq.frames[0], &seq.ground_truth[0], &cfg, cfg.seed);
    let mut occluded_pass = 0;
    let mut occluded_total = 0;
    let mut clean_pass = 0;
    let mut clean_total = 0;
    for t in 1..seq.len() {
        let before = state.updates;
        state.step(&seq.frames[t]);
        let passed = state.updates > before;
        if verbose && (t <= 10 || (59..=80).contains(&t)) {
            let n = state.pnr_history.len();
            println!(
                "t {t:3} pass {passed} pnr {:8.3} rmax {:7.4} | mean pnr {:8.3} rmax {:7.4} | w {:.2}",
                state.pnr_history[n - 1],
                state.rmax_history[n - 1],
                state.pnr_history[..n - 1].iter().sum::<f64>() / (n - 1) as f64,
                state.rmax_history[..n - 1].iter().sum::<f64>() / (n - 1) as f64,
                state.position.w
            );
        }
        let is_occ = t >= 40 && t < 61;
        if is_occ {
            occluded_total += 1;
            occluded_pass += passed as usize;
        } else {
            clean_total += 1;
            clean_pass += passed as usize;
        }
    }
    let mut errs = Vec::new();
    let mut st2 = TrackerState::init_first_frame(&seq.frames[0], &seq.ground_truth[0], &cfg, cfg.seed);
    for t in 1..seq.len() {
        let r = st2.step(&seq.frames[t]);
        errs.push(center_error(&r, &seq.ground_truth[t]));
    }
    let dur = flag("--dur", 21.0) as usize;
    let end = 40 + dur;
    let reacq = errs.iter().enumerate().skip(end - 1).find(|(_, e)| **e < 10.0).map(|(k, _)| k + 1);
    println!("occlusion ends at t={end}; re-acquired (err<10px) at t={reacq:?}");
    let post_err = errs[70..].iter().cloned().fold(0.0, f64::max);
    println!(
        "occluded pass {}/{} = {:.2}, clean pass {}/{} = {:.2}, max post-occ err {post_err:.1}px",
        occluded_pass,
        occluded_total,
        occluded_pass as f64 / occluded_total as f64,
        clean_pass,
        clean_total,
        clean_pass as f64 / clean_total as f64
    );
}

fn zoom() {
    let mut cfg = TrackerConfig::default();
    cfg.scale_on_update_only = !std::env::args().any(|a| a == "--every-frame");
    cfg.scale.init_rounds = flag("--rounds", cfg.scale.init_rounds as f64) as usize;
    cfg.scale.lr = flag("--slr", cfg.scale.lr);
    cfg.scale.sigma_cells = flag("--ssig", cfg.scale.sigma_cells);
    let seq = synth_sequence(&SynthSpec::zoom(1.01), 7);
    let (result, summary) = ope_run(&cfg, &seq);
    let t = seq.len() - 1;
    let est = result.rects[t].w / seq.ground_truth[0].w;
    let truth = seq.ground_truth[t].w / seq.ground_truth[0].w;
    println!(
        "est cumulative scale {:.4} vs truth {:.4} → rel err {:.3}; auc {:.3} updates {}",
        est,
        truth,
        (est / truth - 1.0).abs(),
        summary.auc,
        summary.updates
    );
    for k in (0..seq.len()).step_by(10) {
        println!("frame {k:3} w_est {:.2} w_gt {:.2}", result.rects[k].w, seq.ground_truth[k].w);
    }
}
