//! Window and label generators: Hann tapers and Gaussian regression targets.

use crate::tensor::Map2;

/// 1-D Hann window 0.5·(1 − cos(2πi/(n−1))); [1] for n == 1.
pub fn hann1d(n: usize) -> Vec<f64> {
    assert!(n >= 1);
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos()))
        .collect()
}

/// Outer product of 1-D Hann windows.
pub fn hann2d(h: usize, w: usize) -> Map2 {
    let wh = hann1d(h);
    let ww = hann1d(w);
    let mut out = Map2::zeros(h, w);
    for i in 0..h {
        for j in 0..w {
            out.set(i, j, wh[i] * ww[j]);
        }
    }
    out
}

/// Gaussian regression target over an h×w grid, peak 1 at `center`
/// (row, col), with axis deviations proportional to the target size:
/// σ_r = sigma_factor·th, σ_c = sigma_factor·tw.
pub fn gaussian_label(
    h: usize,
    w: usize,
    center: (f64, f64),
    target_size_cells: (f64, f64),
    sigma_factor: f64,
) -> Map2 {
    assert!(sigma_factor > 0.0, "sigma_factor must be positive");
    let (th, tw) = target_size_cells;
    assert!(th > 0.0 && tw > 0.0, "target size must be positive");
    let sr = sigma_factor * th;
    let sc = sigma_factor * tw;
    let (cr, cc) = center;
    let mut out = Map2::zeros(h, w);
    for i in 0..h {
        let dr = i as f64 - cr;
        let er = dr * dr / (2.0 * sr * sr);
        for j in 0..w {
            let dc = j as f64 - cc;
            out.set(i, j, (-(er + dc * dc / (2.0 * sc * sc))).exp());
        }
    }
    out
}

/// 1-D Gaussian with peak 1 at `center`, used as the scale-branch label.
pub fn gaussian1d(n: usize, center: f64, sigma: f64) -> Vec<f64> {
    assert!(sigma > 0.0);
    (0..n)
        .map(|i| {
            let d = i as f64 - center;
            (-(d * d) / (2.0 * sigma * sigma)).exp()
        })
        .collect()
}
