//! Dataset and results IO: OTB-style sequence directories (image subdir +
//! ground-truth text file), results files with an optional metrics block,
//! and JSON weight files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::Sequence;
use crate::features::{Extractor, Frame, Rect};
use crate::tracker::TrackHead;

const IMAGE_EXTENSIONS: [&str; 4] = ["png", "jpg", "jpeg", "bmp"];

/// Load one sequence directory: frames from the image subdirectory in
/// lexicographic order, rects from the ground-truth file (1-based OTB
/// coordinates, converted to 0-based).
pub fn load_sequence(dir: &Path) -> Result<Sequence> {
    let img_dir = find_image_dir(dir)?;
    let mut image_paths: Vec<PathBuf> = fs::read_dir(&img_dir)
        .map_err(|e| Error::io(&img_dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
                .unwrap_or(false)
        })
        .collect();
    image_paths.sort();

    let gt_path = find_ground_truth(dir)?;
    let gt_text = fs::read_to_string(&gt_path).map_err(|e| Error::io(&gt_path, e))?;
    let rects = parse_ground_truth(&gt_text)?;

    if image_paths.len() != rects.len() {
        return Err(Error::Dataset(format!(
            "{}: frame count {} does not match ground-truth line count {}",
            dir.display(),
            image_paths.len(),
            rects.len()
        )));
    }

    let mut frames = Vec::with_capacity(image_paths.len());
    for p in &image_paths {
        frames.push(load_frame(p)?);
    }
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sequence".to_string());
    Ok(Sequence::new(name, frames, rects))
}

fn find_image_dir(dir: &Path) -> Result<PathBuf> {
    let preferred = dir.join("img");
    if preferred.is_dir() {
        return Ok(preferred);
    }
    let mut subdirs: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    subdirs.sort();
    match subdirs.len() {
        1 => Ok(subdirs.remove(0)),
        0 => Err(Error::Dataset(format!("{}: no image subdirectory found", dir.display()))),
        _ => Err(Error::Dataset(format!(
            "{}: ambiguous layout, expected an 'img' subdirectory",
            dir.display()
        ))),
    }
}

fn find_ground_truth(dir: &Path) -> Result<PathBuf> {
    let preferred = dir.join("groundtruth_rect.txt");
    if preferred.is_file() {
        return Ok(preferred);
    }
    let mut txts: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().map(|e| e == "txt").unwrap_or(false))
        .collect();
    txts.sort();
    txts.into_iter()
        .next()
        .ok_or_else(|| Error::Dataset(format!("{}: no ground-truth text file found", dir.display())))
}

/// Accepts comma, tab or whitespace separators on each line.
pub fn parse_ground_truth(text: &str) -> Result<Vec<Rect>> {
    let mut rects = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split([',', '\t', ' '])
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("ground-truth line {}: bad number '{s}'", lineno + 1)))
            })
            .collect::<Result<_>>()?;
        if fields.len() != 4 {
            return Err(Error::Parse(format!(
                "ground-truth line {}: expected 4 fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        // OTB ground truth is 1-based
        rects.push(Rect::new(fields[0] - 1.0, fields[1] - 1.0, fields[2], fields[3]));
    }
    Ok(rects)
}

fn load_frame(path: &Path) -> Result<Frame> {
    let img = image::open(path).map_err(|e| Error::Image { path: path.to_path_buf(), source: e })?;
    let gray = match img {
        image::DynamicImage::ImageLuma8(g) => g,
        other => {
            // BT.601 luma of the RGB channels
            let rgb = other.to_rgb8();
            let (w, h) = rgb.dimensions();
            let mut buf = image::GrayImage::new(w, h);
            for (x, y, p) in rgb.enumerate_pixels() {
                let y8 = (0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64).round();
                buf.put_pixel(x, y, image::Luma([y8.clamp(0.0, 255.0) as u8]));
            }
            buf
        }
    };
    let (w, h) = gray.dimensions();
    let pixels = gray.as_raw().iter().map(|&v| v as f64 / 255.0).collect();
    Ok(Frame::from_pixels(h as usize, w as usize, pixels))
}

/// Write a sequence as a loadable dataset directory: img/NNNNN.png plus a
/// 1-based groundtruth_rect.txt.
pub fn save_sequence(seq: &Sequence, dir: &Path) -> Result<()> {
    let img_dir = dir.join("img");
    fs::create_dir_all(&img_dir).map_err(|e| Error::io(&img_dir, e))?;
    for (k, frame) in seq.frames.iter().enumerate() {
        let mut buf = image::GrayImage::new(frame.width() as u32, frame.height() as u32);
        for y in 0..frame.height() {
            for x in 0..frame.width() {
                let v = (frame.get(y, x) * 255.0).round().clamp(0.0, 255.0) as u8;
                buf.put_pixel(x as u32, y as u32, image::Luma([v]));
            }
        }
        let path = img_dir.join(format!("{:05}.png", k + 1));
        buf.save(&path).map_err(|e| Error::Image { path, source: e })?;
    }
    let gt_path = dir.join("groundtruth_rect.txt");
    let mut text = String::new();
    for r in &seq.ground_truth {
        text.push_str(&format!("{:.6},{:.6},{:.6},{:.6}\n", r.x + 1.0, r.y + 1.0, r.w, r.h));
    }
    fs::write(&gt_path, text).map_err(|e| Error::io(&gt_path, e))
}

/// Results file: one `x,y,w,h` line per frame (0-based, 6 decimals),
/// followed by an optional `#metrics` block of `key = v[,v...]` lines.
pub fn save_results(path: &Path, rects: &[Rect], metrics: &[(String, Vec<f64>)]) -> Result<()> {
    let mut out = String::new();
    for r in rects {
        out.push_str(&format!("{:.6},{:.6},{:.6},{:.6}\n", r.x, r.y, r.w, r.h));
    }
    if !metrics.is_empty() {
        out.push_str("#metrics\n");
        for (key, values) in metrics {
            let joined: Vec<String> = values.iter().map(|v| format!("{v:.6}")).collect();
            out.push_str(&format!("{key} = {}\n", joined.join(",")));
        }
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn load_results(path: &Path) -> Result<(Vec<Rect>, Vec<(String, Vec<f64>)>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rects = Vec::new();
    let mut metrics = Vec::new();
    let mut in_metrics = false;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == "#metrics" {
            in_metrics = true;
            continue;
        }
        if in_metrics {
            let (key, values) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("{}:{}: bad metrics line", path.display(), lineno + 1))
            })?;
            let parsed: Vec<f64> = values
                .trim()
                .split(',')
                .map(|v| {
                    v.trim().parse::<f64>().map_err(|_| {
                        Error::Parse(format!("{}:{}: bad metric value '{v}'", path.display(), lineno + 1))
                    })
                })
                .collect::<Result<_>>()?;
            metrics.push((key.trim().to_string(), parsed));
        } else {
            let fields: Vec<f64> = line
                .split(',')
                .map(|v| {
                    v.trim().parse::<f64>().map_err(|_| {
                        Error::Parse(format!("{}:{}: bad rect value '{v}'", path.display(), lineno + 1))
                    })
                })
                .collect::<Result<_>>()?;
            if fields.len() != 4 {
                return Err(Error::Parse(format!(
                    "{}:{}: expected 4 rect fields, got {}",
                    path.display(),
                    lineno + 1,
                    fields.len()
                )));
            }
            rects.push(Rect::new(fields[0], fields[1], fields[2], fields[3]));
        }
    }
    Ok((rects, metrics))
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    extractor: Extractor,
    head: TrackHead,
}

pub fn save_weights(path: &Path, extractor: &Extractor, head: &TrackHead) -> Result<()> {
    let file = ModelFile { extractor: extractor.clone(), head: head.clone() };
    let json = serde_json::to_string_pretty(&file)
        .map_err(|e| Error::Parse(format!("weights serialization failed: {e}")))?;
    fs::write(path, json).map_err(|e| Error::io(path, e))
}

pub fn load_weights(path: &Path) -> Result<(Extractor, TrackHead)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: ModelFile = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: bad weights file: {e}", path.display())))?;
    Ok((file.extractor, file.head))
}
