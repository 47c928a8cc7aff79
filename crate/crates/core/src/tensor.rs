//! Dense numeric containers: channel-major 3-D tensors, 2-D maps, and 4-D
//! filter banks. Everything is `f64` with a fixed memory layout so that
//! summation order (channel, then row, then column) is reproducible.

use serde::{Deserialize, Serialize};

/// Dense C×H×W array. Rows are contiguous within each channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        assert!(channels > 0 && height > 0 && width > 0, "tensor dims must be positive");
        Tensor3 { channels, height, width, data: vec![0.0; channels * height * width] }
    }

    pub fn from_vec(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Self {
        assert!(channels > 0 && height > 0 && width > 0, "tensor dims must be positive");
        assert_eq!(
            data.len(),
            channels * height * width,
            "data length {} does not match {}x{}x{}",
            data.len(),
            channels,
            height,
            width
        );
        Tensor3 { channels, height, width, data }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn spatial_dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.height * self.width;
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn row(&self, c: usize, i: usize) -> &[f64] {
        let base = (c * self.height + i) * self.width;
        &self.data[base..base + self.width]
    }

    pub fn row_mut(&mut self, c: usize, i: usize) -> &mut [f64] {
        let base = (c * self.height + i) * self.width;
        &mut self.data[base..base + self.width]
    }

    #[inline]
    pub fn get(&self, c: usize, i: usize, j: usize) -> f64 {
        self.data[(c * self.height + i) * self.width + j]
    }

    #[inline]
    pub fn set(&mut self, c: usize, i: usize, j: usize, v: f64) {
        self.data[(c * self.height + i) * self.width + j] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Single-channel view of a 2-D map.
    pub fn from_map(map: &Map2) -> Self {
        Tensor3::from_vec(1, map.height(), map.width(), map.data().to_vec())
    }

    /// Collapse a single-channel tensor into a 2-D map.
    pub fn into_map(self) -> Map2 {
        assert_eq!(self.channels, 1, "into_map needs a single-channel tensor");
        Map2::from_vec(self.height, self.width, self.data)
    }
}

/// Dense H×W array of doubles, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Map2 {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Map2 {
    pub fn zeros(height: usize, width: usize) -> Self {
        assert!(height > 0 && width > 0, "map dims must be positive");
        Map2 { height, width, data: vec![0.0; height * width] }
    }

    pub fn from_vec(height: usize, width: usize, data: Vec<f64>) -> Self {
        assert!(height > 0 && width > 0, "map dims must be positive");
        assert_eq!(data.len(), height * width, "data length does not match dims");
        Map2 { height, width, data }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.width + j] = v;
    }

    /// Row-major index of the first occurrence of the maximum.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = f64::NEG_INFINITY;
        let mut idx = 0;
        for (k, &v) in self.data.iter().enumerate() {
            if v > best {
                best = v;
                idx = k;
            }
        }
        (idx / self.width, idx % self.width)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Bank of 2-D convolution filters: out_channels × in_channels × k_h × k_w
/// weights plus one bias per output channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterStack {
    pub out_channels: usize,
    pub in_channels: usize,
    pub k_h: usize,
    pub k_w: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl FilterStack {
    pub fn zeros(out_channels: usize, in_channels: usize, k_h: usize, k_w: usize) -> Self {
        assert!(
            out_channels > 0 && in_channels > 0 && k_h > 0 && k_w > 0,
            "filter dims must be positive"
        );
        FilterStack {
            out_channels,
            in_channels,
            k_h,
            k_w,
            weights: vec![0.0; out_channels * in_channels * k_h * k_w],
            bias: vec![0.0; out_channels],
        }
    }

    pub fn from_weights(
        out_channels: usize,
        in_channels: usize,
        k_h: usize,
        k_w: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
    ) -> Self {
        assert_eq!(
            weights.len(),
            out_channels * in_channels * k_h * k_w,
            "weight length does not match filter dims"
        );
        assert_eq!(bias.len(), out_channels, "one bias per output channel");
        FilterStack { out_channels, in_channels, k_h, k_w, weights, bias }
    }

    /// Zero-mean Gaussian initialization; biases start at zero.
    pub fn randn<R: rand::Rng>(
        out_channels: usize,
        in_channels: usize,
        k_h: usize,
        k_w: usize,
        std: f64,
        rng: &mut R,
    ) -> Self {
        use rand_distr::{Distribution, Normal};
        let normal = Normal::new(0.0, std).expect("valid std");
        let n = out_channels * in_channels * k_h * k_w;
        let weights = (0..n).map(|_| normal.sample(rng)).collect();
        FilterStack::from_weights(out_channels, in_channels, k_h, k_w, weights, vec![0.0; out_channels])
    }

    #[inline]
    pub fn weight_index(&self, o: usize, l: usize, u: usize, v: usize) -> usize {
        ((o * self.in_channels + l) * self.k_h + u) * self.k_w + v
    }

    #[inline]
    pub fn weight(&self, o: usize, l: usize, u: usize, v: usize) -> f64 {
        self.weights[self.weight_index(o, l, u, v)]
    }
}
