use super::{BinaryImage, GrayImage};
use crate::{Error, Result};

/// How a grayscale image is split into ink and paper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ThresholdMode {
    /// Pixels with luminance strictly below `t` are foreground.
    Fixed(u32),
    #[default]
    Otsu,
}

/// Binarizes with the dark-ink convention: `foreground = luminance < t`.
pub fn binarize(img: &GrayImage, mode: ThresholdMode) -> Result<BinaryImage> {
    let t = match mode {
        ThresholdMode::Fixed(t) if t > 255 => return Err(Error::InvalidThreshold(t)),
        ThresholdMode::Fixed(t) => t,
        ThresholdMode::Otsu => otsu_threshold(img),
    };
    let data = img.pixels().iter().map(|&v| u32::from(v) < t).collect();
    BinaryImage::from_pixels(img.width(), img.height(), data)
}

/// Otsu's threshold over the 256-bin histogram.
///
/// Returns `t` in `1..=255` for the split `{v < t} | {v >= t}` maximizing the
/// between-class variance. When several thresholds attain the maximum (e.g. a
/// two-level image) the middle of that run is returned.
pub fn otsu_threshold(img: &GrayImage) -> u32 {
    let mut hist = [0u64; 256];
    for &v in img.pixels() {
        hist[v as usize] += 1;
    }
    let total = img.pixels().len() as f64;
    let sum_all: f64 = hist
        .iter()
        .enumerate()
        .map(|(v, &n)| v as f64 * n as f64)
        .sum();

    let mut best = -1.0f64;
    let mut first = 1u32;
    let mut last = 1u32;
    let mut count_below = 0f64;
    let mut sum_below = 0f64;
    for t in 1..=255u32 {
        let v = (t - 1) as usize;
        count_below += hist[v] as f64;
        sum_below += v as f64 * hist[v] as f64;
        let count_above = total - count_below;
        let between = if count_below == 0.0 || count_above == 0.0 {
            0.0
        } else {
            let mean_below = sum_below / count_below;
            let mean_above = (sum_all - sum_below) / count_above;
            let d = mean_below - mean_above;
            count_below * count_above * d * d
        };
        if between > best {
            best = between;
            first = t;
            last = t;
        } else if between == best && last == t - 1 {
            last = t;
        }
    }
    (first + last).div_ceil(2)
}
