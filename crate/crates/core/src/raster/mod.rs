//! Raster primitives: grayscale and binary pixel grids, thresholding and
//! connected-component labeling.

mod label;
mod threshold;

pub use label::{label_components, ConnectedComponent, Connectivity};
pub use threshold::{binarize, otsu_threshold, ThresholdMode};

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions { width, height });
    }
    Ok(())
}

/// 8-bit luminance image, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height)?;
        if data.len() != width * height {
            return Err(Error::BufferSize {
                expected: width * height,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Image with every pixel set to `value`.
    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            data: vec![value; width * height],
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.data
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.data[y * self.width + x] = value;
    }

    /// Renders a binary image as black ink (0) on white (255).
    pub fn from_binary(img: &BinaryImage) -> Self {
        Self {
            width: img.width,
            height: img.height,
            data: img.data.iter().map(|&f| if f { 0 } else { 255 }).collect(),
        }
    }

    pub fn inverted(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| 255 - v).collect(),
        }
    }
}

/// Foreground/background pixel grid, row-major. `true` is foreground (ink).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryImage {
    /// All-background image.
    pub fn new(width: usize, height: usize) -> Result<Self> {
        check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            data: vec![false; width * height],
        })
    }

    pub fn from_pixels(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        check_dims(width, height)?;
        if data.len() != width * height {
            return Err(Error::BufferSize {
                expected: width * height,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Parses rows of `#` (foreground) and `.` (background). Handy in tests.
    pub fn from_ascii(rows: &[&str]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(width * height);
        for row in rows {
            if row.len() != width {
                return Err(Error::BufferSize {
                    expected: width,
                    actual: row.len(),
                });
            }
            data.extend(row.bytes().map(|b| b == b'#'));
        }
        Self::from_pixels(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    /// Like [`get`](Self::get) but out-of-bounds coordinates read as background.
    #[inline]
    pub fn get_signed(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.data[y as usize * self.width + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.data[y * self.width + x] = value;
    }

    pub fn count_foreground(&self) -> usize {
        self.data.iter().filter(|&&f| f).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&f| f)
    }

    /// Iterator over foreground coordinates in raster order.
    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(move |(i, _)| (i % w, i / w))
    }

    /// Number of foreground pixels among the 8 neighbours of `(x, y)`.
    pub fn neighbor_count(&self, x: usize, y: usize) -> usize {
        let (x, y) = (x as isize, y as isize);
        NEIGHBORS_8
            .iter()
            .filter(|(dx, dy)| self.get_signed(x + dx, y + dy))
            .count()
    }

    /// `true` if every foreground pixel of `self` is foreground in `other`.
    pub fn is_subset_of(&self, other: &BinaryImage) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.data.iter().zip(&other.data).all(|(&a, &b)| !a || b)
    }

    /// Top-left corner of the first 2x2 all-foreground block, if any.
    pub fn find_2x2_block(&self) -> Option<(usize, usize)> {
        for y in 0..self.height.saturating_sub(1) {
            for x in 0..self.width.saturating_sub(1) {
                if self.get(x, y)
                    && self.get(x + 1, y)
                    && self.get(x, y + 1)
                    && self.get(x + 1, y + 1)
                {
                    return Some((x, y));
                }
            }
        }
        None
    }
}

/// Clockwise from east in image coordinates (y grows downward).
pub(crate) const NEIGHBORS_8: [(isize, isize); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

pub(crate) const NEIGHBORS_4: [(isize, isize); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];
