//! Edges, boundaries and radial measurements of shapes.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::raster::{BinaryImage, ConnectedComponent, GrayImage, NEIGHBORS_8};
use crate::{Error, Result};

/// Smallest component [`measure_shape`] accepts: a 3x3 blob.
pub const MIN_SHAPE_PIXELS: usize = 9;

/// Radial distances are taken to the outer edge of a boundary pixel, half a
/// pixel beyond its centre, so that a rasterized shape of half-width `r`
/// measures `r` rather than `r - 0.5`.
pub const BOUNDARY_OFFSET: f64 = 0.5;

/// Freeman code offsets `(dx, dy)` in image coordinates (y down).
/// 0 is east and codes increase counter-clockwise as seen on screen.
pub const FREEMAN: [(isize, isize); 8] = [
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

fn freeman_code(dx: isize, dy: isize) -> u8 {
    FREEMAN
        .iter()
        .position(|&d| d == (dx, dy))
        .expect("unit step") as u8
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChainCode {
    pub start: (usize, usize),
    pub moves: Vec<u8>,
}

impl ChainCode {
    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    /// Sum of all move vectors; `(0, 0)` for a closed boundary.
    pub fn displacement(&self) -> (isize, isize) {
        self.moves.iter().fold((0, 0), |(x, y), &m| {
            let (dx, dy) = FREEMAN[m as usize];
            (x + dx, y + dy)
        })
    }

    /// Pixels visited by the chain, starting with `start`. The closing move
    /// back onto `start` is not repeated.
    pub fn points(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.moves.len() + 1);
        let (mut x, mut y) = (self.start.0 as isize, self.start.1 as isize);
        out.push(self.start);
        for &m in self.moves.iter().take(self.moves.len().saturating_sub(1)) {
            let (dx, dy) = FREEMAN[m as usize];
            x += dx;
            y += dy;
            out.push((x as usize, y as usize));
        }
        out
    }
}

// Moore neighbourhood in clockwise screen order, starting west.
const CLOCKWISE: [(isize, isize); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];

/// Moore-neighbour tracing of a component's outer boundary.
///
/// Starts at the top-most, left-most pixel and walks clockwise until it is
/// back on the start pixel and about to repeat its first step, so every
/// returned chain is closed. Holes are not traced.
pub fn trace_boundary(component: &ConnectedComponent) -> ChainCode {
    let (x0, y0, x1, y1) = component.bounding_box;
    // local mask with a one-pixel margin so neighbour reads never go out of range
    let (w, h) = (x1 - x0 + 3, y1 - y0 + 3);
    let mut mask = vec![false; w * h];
    for &(x, y) in &component.pixels {
        mask[(y - y0 + 1) * w + (x - x0 + 1)] = true;
    }
    let at = |x: isize, y: isize| mask[y as usize * w + x as usize];

    let start = component.first_pixel();
    let s = ((start.0 - x0 + 1) as isize, (start.1 - y0 + 1) as isize);
    let mut moves = Vec::new();
    let mut p = s;
    // index into CLOCKWISE of the backtrack pixel, relative to p; the start is
    // left-most in the top row, so its west neighbour is background
    let mut back = 0usize;
    let mut first_step = None;
    // bound on any closed walk: each pixel is entered at most 4 times
    let limit = 4 * component.area() + 8;
    // no foreground neighbour at all means a single pixel
    while let Some(i) = (1..=8)
        .map(|k| (back + k) % 8)
        .find(|&i| at(p.0 + CLOCKWISE[i].0, p.1 + CLOCKWISE[i].1))
    {
        // stop when about to repeat the very first step from the start pixel
        if p == s && first_step == Some(i) {
            break;
        }
        if first_step.is_none() {
            first_step = Some(i);
        }
        let (dx, dy) = CLOCKWISE[i];
        let next = (p.0 + dx, p.1 + dy);
        // the pixel examined just before `next` is background; re-express it relative to `next`
        let (bx, by) = CLOCKWISE[(i + 7) % 8];
        let rel = (p.0 + bx - next.0, p.1 + by - next.1);
        back = CLOCKWISE.iter().position(|&d| d == rel).expect("adjacent");
        moves.push(freeman_code(dx, dy));
        p = next;
        if moves.len() > limit {
            break;
        }
    }
    ChainCode { start, moves }
}

/// Radial statistics of a filled shape.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShapeMeasurement {
    pub centroid: (f64, f64),
    /// Largest centroid-to-boundary distance.
    pub max_radius: f64,
    /// Smallest centroid-to-boundary distance.
    pub min_radius: f64,
    /// Pixel count of the filled shape.
    pub area: usize,
    pub boundary: ChainCode,
}

/// Centroid, max/min distance to the traced outer boundary, and area.
///
/// The centroid is the mean of all pixel centres. Each boundary distance is
/// the centre-to-centre Euclidean distance plus [`BOUNDARY_OFFSET`].
pub fn measure_shape(component: &ConnectedComponent) -> Result<ShapeMeasurement> {
    let area = component.area();
    if area < MIN_SHAPE_PIXELS {
        return Err(Error::DegenerateShape { pixels: area });
    }
    let (sx, sy) = component
        .pixels
        .iter()
        .fold((0f64, 0f64), |(sx, sy), &(x, y)| {
            (sx + x as f64, sy + y as f64)
        });
    let centroid = (sx / area as f64, sy / area as f64);
    let boundary = trace_boundary(component);
    let (mut max_r, mut min_r) = (0f64, f64::INFINITY);
    for (x, y) in boundary.points() {
        let d = libm::hypot(x as f64 - centroid.0, y as f64 - centroid.1) + BOUNDARY_OFFSET;
        max_r = max_r.max(d);
        min_r = min_r.min(d);
    }
    Ok(ShapeMeasurement {
        centroid,
        max_radius: max_r,
        min_radius: min_r,
        area,
        boundary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CannyConfig {
    pub gaussian_sigma: f64,
    /// Fraction of the maximum gradient magnitude.
    pub low_threshold: f64,
    /// Fraction of the maximum gradient magnitude.
    pub high_threshold: f64,
}

impl Default for CannyConfig {
    fn default() -> Self {
        Self {
            gaussian_sigma: 1.0,
            low_threshold: 0.1,
            high_threshold: 0.3,
        }
    }
}

impl CannyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gaussian_sigma.is_nan() || self.gaussian_sigma <= 0.0 {
            return Err(Error::InvalidConfig("gaussian_sigma must be > 0".into()));
        }
        if !(0.0 < self.low_threshold && self.low_threshold < self.high_threshold) {
            return Err(Error::InvalidConfig(
                "thresholds must satisfy 0 < low < high".into(),
            ));
        }
        Ok(())
    }
}

fn gaussian_blur(img: &GrayImage, sigma: f64) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let radius = libm::ceil(3.0 * sigma) as isize;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|i| libm::exp(-((i * i) as f64) / (2.0 * sigma * sigma)))
        .collect();
    let norm: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= norm);

    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let src: Vec<f64> = img.pixels().iter().map(|&v| v as f64).collect();
    let mut tmp = vec![0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            tmp[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, &kv)| kv * src[y * w + clamp(x as isize + k as isize - radius, w)])
                .sum();
        }
    }
    let mut out = vec![0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, &kv)| kv * tmp[clamp(y as isize + k as isize - radius, h) * w + x])
                .sum();
        }
    }
    out
}

/// Sobel gradient magnitude and direction bucket (0: horizontal gradient,
/// 1: 45 degrees, 2: vertical, 3: 135 degrees).
fn sobel(smooth: &[f64], w: usize, h: usize) -> (Vec<f64>, Vec<u8>) {
    let at = |x: isize, y: isize| {
        smooth[y.clamp(0, h as isize - 1) as usize * w + x.clamp(0, w as isize - 1) as usize]
    };
    let mut mag = vec![0f64; w * h];
    let mut dir = vec![0u8; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            let gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            let i = y as usize * w + x as usize;
            mag[i] = libm::hypot(gx, gy);
            let mut angle = libm::atan2(gy, gx).to_degrees();
            if angle < 0.0 {
                angle += 180.0;
            }
            dir[i] = match angle {
                a if !(22.5..157.5).contains(&a) => 0,
                a if a < 67.5 => 1,
                a if a < 112.5 => 2,
                _ => 3,
            };
        }
    }
    (mag, dir)
}

/// Offsets of the two neighbours compared during non-maximum suppression.
fn nms_offsets(dir: u8) -> [(isize, isize); 2] {
    match dir {
        0 => [(-1, 0), (1, 0)],
        1 => [(-1, -1), (1, 1)],
        2 => [(0, -1), (0, 1)],
        _ => [(1, -1), (-1, 1)],
    }
}

/// Canny edge detector: Gaussian smoothing, Sobel gradients, non-maximum
/// suppression along the quantized gradient direction and hysteresis with
/// 8-connected linking. Thresholds are fractions of the maximum magnitude.
pub fn canny_edges(img: &GrayImage, cfg: &CannyConfig) -> Result<BinaryImage> {
    cfg.validate()?;
    let (w, h) = (img.width(), img.height());
    let smooth = gaussian_blur(img, cfg.gaussian_sigma);
    let (mag, dir) = sobel(&smooth, w, h);
    let max = mag.iter().copied().fold(0f64, f64::max);
    let mut out = BinaryImage::new(w, h)?;
    if max <= 1e-9 {
        return Ok(out);
    }

    let get = |x: isize, y: isize| {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            mag[y as usize * w + x as usize]
        }
    };
    // Ties on a plateau keep only the pixel whose predecessor is strictly
    // smaller, so a symmetric step yields a one-pixel-wide edge.
    let mut suppressed = vec![0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let m = mag[i];
            if m <= 0.0 {
                continue;
            }
            let [a, b] = nms_offsets(dir[i]);
            let ma = get(x as isize + a.0, y as isize + a.1);
            let mb = get(x as isize + b.0, y as isize + b.1);
            if m > ma && m >= mb {
                suppressed[i] = m;
            }
        }
    }

    let (low, high) = (cfg.low_threshold * max, cfg.high_threshold * max);
    let mut queue = VecDeque::new();
    for (i, &m) in suppressed.iter().enumerate() {
        if m >= high {
            out.set(i % w, i / w, true);
            queue.push_back((i % w, i / w));
        }
    }
    while let Some((x, y)) = queue.pop_front() {
        for (dx, dy) in NEIGHBORS_8 {
            let (nx, ny) = (x as isize + dx, y as isize + dy);
            if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                continue;
            }
            let (nx, ny) = (nx as usize, ny as usize);
            if !out.get(nx, ny) && suppressed[ny * w + nx] >= low {
                out.set(nx, ny, true);
                queue.push_back((nx, ny));
            }
        }
    }
    Ok(out)
}

/// Non-maximum-suppression check used by tests: `true` if no edge pixel has
/// a strictly larger gradient neighbour along its quantized direction.
#[doc(hidden)]
pub fn edges_are_locally_maximal(img: &GrayImage, cfg: &CannyConfig, edges: &BinaryImage) -> bool {
    let (w, h) = (img.width(), img.height());
    let smooth = gaussian_blur(img, cfg.gaussian_sigma);
    let (mag, dir) = sobel(&smooth, w, h);
    edges.foreground().all(|(x, y)| {
        let i = y * w + x;
        nms_offsets(dir[i]).iter().all(|&(dx, dy)| {
            let (nx, ny) = (x as isize + dx, y as isize + dy);
            nx < 0
                || ny < 0
                || nx >= w as isize
                || ny >= h as isize
                || mag[ny as usize * w + nx as usize] <= mag[i]
        })
    })
}
