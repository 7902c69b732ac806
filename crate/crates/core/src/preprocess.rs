//! Figure clean-up before shape measurement: thinning, removal of open
//! strokes (flow lines and arrowheads) and removal of text-sized debris.
//!
//! The stage order is fixed: thin, then strokes, then text. What survives is
//! one closed 1-pixel outline per flowchart node.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::raster::{label_components, BinaryImage, Connectivity, NEIGHBORS_4, NEIGHBORS_8};
use crate::{Error, Result};

/// Enclosed background regions smaller than this are treated as thinning
/// artifacts rather than node interiors.
pub const MIN_HOLE_AREA: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PreprocessConfig {
    /// Components with fewer pixels than this are removed as text.
    pub text_area_max: usize,
    /// Upper bound on endpoint-erosion rounds.
    pub prune_iterations_max: usize,
    /// Drop every skeleton pixel that does not border an enclosed region, which
    /// removes flow lines running between two node outlines.
    pub keep_loops_only: bool,
    /// Run Zhang-Suen thinning first. Disable only for inputs that are
    /// already one pixel wide.
    pub thin: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            text_area_max: 150,
            prune_iterations_max: 10_000,
            keep_loops_only: true,
            thin: true,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.text_area_max < 1 {
            return Err(Error::InvalidConfig("text_area_max must be >= 1".into()));
        }
        if self.prune_iterations_max < 1 {
            return Err(Error::InvalidConfig(
                "prune_iterations_max must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PreprocessReport {
    pub removed_stroke_pixels: usize,
    pub removed_text_components: usize,
    pub skeleton_pixels: usize,
}

/// Intermediate images of [`preprocess_stages`], for debugging dumps.
#[derive(Debug, Clone)]
pub struct PreprocessStages {
    pub thinned: BinaryImage,
    pub strokes_removed: BinaryImage,
    pub cleaned: BinaryImage,
    pub report: PreprocessReport,
}

// Zhang-Suen neighbourhood P2..P9: N, NE, E, SE, S, SW, W, NW.
const ZS_ORDER: [(isize, isize); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];

fn zs_neighbors(img: &BinaryImage, x: usize, y: usize) -> [bool; 8] {
    let (x, y) = (x as isize, y as isize);
    ZS_ORDER.map(|(dx, dy)| img.get_signed(x + dx, y + dy))
}

/// 0 -> 1 transitions around the closed P2..P9 sequence.
fn transitions(n: &[bool; 8]) -> usize {
    (0..8).filter(|&i| !n[i] && n[(i + 1) % 8]).count()
}

fn zs_subiteration(img: &mut BinaryImage, first: bool) -> bool {
    let mut marked = Vec::new();
    for (x, y) in img.foreground() {
        let n = zs_neighbors(img, x, y);
        let b = n.iter().filter(|&&v| v).count();
        if !(2..=6).contains(&b) || transitions(&n) != 1 {
            continue;
        }
        let [p2, _, p4, _, p6, _, p8, _] = n;
        let ok = if first {
            !(p2 && p4 && p6) && !(p4 && p6 && p8)
        } else {
            !(p2 && p4 && p8) && !(p2 && p6 && p8)
        };
        if ok {
            marked.push((x, y));
        }
    }
    for &(x, y) in &marked {
        img.set(x, y, false);
    }
    !marked.is_empty()
}

/// Number of 8-connected groups formed by the foreground neighbours alone,
/// i.e. without passing through the centre pixel.
fn neighbor_components(n: &[bool; 8]) -> usize {
    // ring positions 0,2,4,6 are edge neighbours, odd ones are corners
    let mut seen = [false; 8];
    let mut count = 0;
    for start in 0..8 {
        if !n[start] || seen[start] {
            continue;
        }
        count += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            let mut adj: Vec<usize> = vec![(i + 1) % 8, (i + 7) % 8];
            if i % 2 == 0 {
                // edge neighbours also touch the next edge neighbour diagonally
                adj.push((i + 2) % 8);
                adj.push((i + 6) % 8);
            }
            for j in adj {
                if n[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    count
}

/// Removes one pixel from each remaining 2x2 block, preferring pixels whose
/// deletion keeps both the foreground and the local background topology.
fn break_blocks(img: &mut BinaryImage) -> bool {
    let mut changed = false;
    while let Some((bx, by)) = img.find_2x2_block() {
        let cells = [(bx, by), (bx + 1, by), (bx, by + 1), (bx + 1, by + 1)];
        let simple = |img: &BinaryImage, (x, y): (usize, usize)| {
            let n = zs_neighbors(img, x, y);
            neighbor_components(&n) == 1 && transitions(&n) == 1
        };
        let connected = |img: &BinaryImage, (x, y): (usize, usize)| {
            neighbor_components(&zs_neighbors(img, x, y)) == 1
        };
        let pick = cells
            .iter()
            .copied()
            .find(|&c| simple(img, c))
            .or_else(|| cells.iter().copied().find(|&c| connected(img, c)))
            .unwrap_or(cells[0]);
        img.set(pick.0, pick.1, false);
        changed = true;
    }
    changed
}

/// Zhang-Suen thinning, repeated until a full pass deletes nothing.
///
/// Zhang-Suen alone can leave 2x2 blocks where several strokes meet; those
/// are broken by deleting a topology-preserving pixel and thinning resumes,
/// so the result is 2x2-free and `thin(thin(x)) == thin(x)`.
pub fn thin(img: &BinaryImage) -> BinaryImage {
    let mut out = img.clone();
    loop {
        loop {
            let a = zs_subiteration(&mut out, true);
            let b = zs_subiteration(&mut out, false);
            if !a && !b {
                break;
            }
        }
        if !break_blocks(&mut out) {
            return out;
        }
    }
}

fn check_thinned(img: &BinaryImage) -> Result<()> {
    match img.find_2x2_block() {
        Some((x, y)) => Err(Error::NotThinned { x, y }),
        None => Ok(()),
    }
}

/// Repeatedly deletes pixels with exactly one 8-neighbour, then isolated
/// pixels. Returns the number of pixels removed.
fn erode_endpoints(img: &mut BinaryImage, max_rounds: usize) -> usize {
    let mut removed = 0;
    let mut frontier: Vec<(usize, usize)> = img.foreground().collect();
    for _ in 0..max_rounds {
        let ends: Vec<_> = frontier
            .iter()
            .copied()
            .filter(|&(x, y)| img.get(x, y) && img.neighbor_count(x, y) == 1)
            .collect();
        if ends.is_empty() {
            break;
        }
        frontier.clear();
        for &(x, y) in &ends {
            if img.get(x, y) {
                img.set(x, y, false);
                removed += 1;
            }
            for (dx, dy) in NEIGHBORS_8 {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if img.get_signed(nx, ny) {
                    frontier.push((nx as usize, ny as usize));
                }
            }
        }
        frontier.sort_unstable();
        frontier.dedup();
    }
    let isolated: Vec<_> = img
        .foreground()
        .filter(|&(x, y)| img.neighbor_count(x, y) == 0)
        .collect();
    for &(x, y) in &isolated {
        img.set(x, y, false);
    }
    removed + isolated.len()
}

/// Background pixels belonging to 4-connected regions that do not reach the
/// image border and have at least [`MIN_HOLE_AREA`] pixels.
fn enclosed_regions(img: &BinaryImage) -> Vec<bool> {
    let (w, h) = (img.width(), img.height());
    // 0 = unvisited, 1 = outside, 2 = enclosed
    let mut state = vec![0u8; w * h];
    let mut queue = VecDeque::new();
    for y in 0..h {
        for x in 0..w {
            if img.get(x, y) || state[y * w + x] != 0 {
                continue;
            }
            let mut region = Vec::new();
            let mut touches_border = false;
            state[y * w + x] = 3;
            queue.push_back((x, y));
            while let Some((cx, cy)) = queue.pop_front() {
                region.push(cy * w + cx);
                if cx == 0 || cy == 0 || cx == w - 1 || cy == h - 1 {
                    touches_border = true;
                }
                for (dx, dy) in NEIGHBORS_4 {
                    let (nx, ny) = (cx as isize + dx, cy as isize + dy);
                    if nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= h {
                        continue;
                    }
                    let i = ny as usize * w + nx as usize;
                    if !img.pixels()[i] && state[i] == 0 {
                        state[i] = 3;
                        queue.push_back((nx as usize, ny as usize));
                    }
                }
            }
            let tag = if touches_border || region.len() < MIN_HOLE_AREA {
                1
            } else {
                2
            };
            for i in region {
                state[i] = tag;
            }
        }
    }
    state.into_iter().map(|s| s == 2).collect()
}

/// Removes open strokes (flow lines, arrowheads) from a thinned image using
/// [`PreprocessConfig::default`].
pub fn remove_open_strokes(img: &BinaryImage) -> Result<BinaryImage> {
    remove_open_strokes_with(img, &PreprocessConfig::default())
}

/// Removes open strokes from a thinned image.
///
/// Endpoints are eroded until none remain and isolated pixels are dropped.
/// With `keep_loops_only`, pixels that do not touch an enclosed background
/// region are then deleted as well (a flow line joining two outlines has no
/// endpoint of its own) and the endpoint erosion runs again on what is left.
pub fn remove_open_strokes_with(img: &BinaryImage, cfg: &PreprocessConfig) -> Result<BinaryImage> {
    check_thinned(img)?;
    let mut out = img.clone();
    erode_endpoints(&mut out, cfg.prune_iterations_max);
    if cfg.keep_loops_only && !out.is_empty() {
        let holes = enclosed_regions(&out);
        let w = out.width();
        let off: Vec<_> = out
            .foreground()
            .filter(|&(x, y)| {
                !NEIGHBORS_8.iter().any(|&(dx, dy)| {
                    let (nx, ny) = (x as isize + dx, y as isize + dy);
                    nx >= 0
                        && ny >= 0
                        && (nx as usize) < w
                        && (ny as usize) < out.height()
                        && holes[ny as usize * w + nx as usize]
                })
            })
            .collect();
        for (x, y) in off {
            out.set(x, y, false);
        }
        erode_endpoints(&mut out, cfg.prune_iterations_max);
    }
    Ok(out)
}

/// Deletes 8-connected components with fewer than `cfg.text_area_max` pixels.
pub fn remove_text(img: &BinaryImage, cfg: &PreprocessConfig) -> (BinaryImage, PreprocessReport) {
    let mut out = img.clone();
    let mut report = PreprocessReport::default();
    for c in label_components(img, Connectivity::Eight) {
        if c.area() < cfg.text_area_max {
            report.removed_text_components += 1;
            for &(x, y) in &c.pixels {
                out.set(x, y, false);
            }
        }
    }
    (out, report)
}

/// Runs thin, stroke removal and text removal, keeping every intermediate.
pub fn preprocess_stages(img: &BinaryImage, cfg: &PreprocessConfig) -> Result<PreprocessStages> {
    cfg.validate()?;
    let thinned = if cfg.thin { thin(img) } else { img.clone() };
    let strokes_removed = remove_open_strokes_with(&thinned, cfg)?;
    let (cleaned, mut report) = remove_text(&strokes_removed, cfg);
    report.skeleton_pixels = thinned.count_foreground();
    report.removed_stroke_pixels = thinned.count_foreground() - strokes_removed.count_foreground();
    Ok(PreprocessStages {
        thinned,
        strokes_removed,
        cleaned,
        report,
    })
}

/// `remove_text(remove_open_strokes(thin(img)))`.
pub fn preprocess(
    img: &BinaryImage,
    cfg: &PreprocessConfig,
) -> Result<(BinaryImage, PreprocessReport)> {
    preprocess_stages(img, cfg).map(|s| (s.cleaned, s.report))
}
