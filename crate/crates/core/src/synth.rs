//! Synthetic flowchart renderer with exact ground truth.
//!
//! Layouts are rasterized by pixel-centre sampling: a pixel is inside a shape
//! when its centre is. Outlines are the pixels inside the shape but outside
//! the shape shrunk by the stroke width; rhombus outlines additionally use
//! round joins, keeping only pixels within the stroke width of the inner
//! rhombus. Flow lines are Bresenham polylines,
//! arrowheads small filled triangles and "text" small filled blobs.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::classify::{FeatureVector, FlowchartRole};
use crate::raster::GrayImage;
use crate::{Error, Result};

/// Knuth's MMIX linear-congruential generator:
/// `state = state * 6364136223846793005 + 1442695040888963407 (mod 2^64)`,
/// output = the top 31 bits of the new state (`state >> 33`).
///
/// Only integer draws are used for layouts so corpora are reproducible
/// bit-for-bit in any language.
#[derive(Debug, Clone)]
pub struct Lcg {
    state: u64,
}

impl Lcg {
    pub const MULTIPLIER: u64 = 6_364_136_223_846_793_005;
    pub const INCREMENT: u64 = 1_442_695_040_888_963_407;

    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u32(&mut self) -> u32 {
        self.state = self
            .state
            .wrapping_mul(Self::MULTIPLIER)
            .wrapping_add(Self::INCREMENT);
        (self.state >> 33) as u32
    }

    /// Uniform-ish integer in `lo..=hi` (modulo reduction).
    pub fn range(&mut self, lo: u32, hi: u32) -> u32 {
        debug_assert!(lo <= hi);
        lo + self.next_u32() % (hi - lo + 1)
    }

    pub fn coin(&mut self) -> bool {
        self.next_u32() & 1 == 1
    }
}

/// Simulated text: a small filled rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GlyphBlob {
    pub center: (f64, f64),
    pub size: (f64, f64),
}

fn default_stroke() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NodeSpec {
    pub role: FlowchartRole,
    pub center: (f64, f64),
    /// Connector: `(radius, radius)`; start/stop: ellipse semi-axes `(x, y)`;
    /// process: `(width, height)`; decision: half-diagonals `(x, y)`.
    pub size: (f64, f64),
    #[cfg_attr(feature = "serde", serde(default))]
    pub filled: bool,
    #[cfg_attr(feature = "serde", serde(default = "default_stroke"))]
    pub stroke_width: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub labels: Vec<GlyphBlob>,
}

impl NodeSpec {
    pub fn outline(role: FlowchartRole, center: (f64, f64), size: (f64, f64)) -> Self {
        Self {
            role,
            center,
            size,
            filled: false,
            stroke_width: default_stroke(),
            labels: Vec::new(),
        }
    }

    pub fn solid(role: FlowchartRole, center: (f64, f64), size: (f64, f64)) -> Self {
        Self {
            filled: true,
            ..Self::outline(role, center, size)
        }
    }

    fn geometry(&self) -> Geometry {
        let (sx, sy) = self.size;
        match self.role {
            FlowchartRole::Connector => Geometry::Circle { r: sx },
            FlowchartRole::StartStop => Geometry::Ellipse { a: sx, b: sy },
            FlowchartRole::Process => Geometry::Rect {
                hw: sx / 2.0,
                hh: sy / 2.0,
            },
            FlowchartRole::Decision => Geometry::Diamond { p: sx, q: sy },
        }
    }

    /// Inclusive pixel bounding box `(x0, y0, x1, y1)` of the shape.
    fn pixel_bounds(&self) -> (f64, f64, f64, f64) {
        let (ex, ey) = self.geometry().half_extent();
        (
            self.center.0 - ex,
            self.center.1 - ey,
            self.center.0 + ex,
            self.center.1 + ey,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EdgeSpec {
    pub from: usize,
    pub to: usize,
    #[cfg_attr(feature = "serde", serde(default))]
    pub waypoints: Vec<(f64, f64)>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub arrowhead: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Layout {
    pub width: usize,
    pub height: usize,
    pub nodes: Vec<NodeSpec>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub edges: Vec<EdgeSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PixelTag {
    Background,
    NodeOutline,
    NodeFill,
    Edge,
    Text,
}

/// Analytic measurements of one node.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NodeTruth {
    pub role: FlowchartRole,
    pub center: (f64, f64),
    /// Max centre-to-boundary distance.
    pub a: f64,
    /// Min centre-to-boundary distance.
    pub b: f64,
    /// Area of the filled shape.
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub vector: FeatureVector,
    pub nodes: Vec<NodeTruth>,
    /// One tag per pixel, row-major.
    pub provenance: Vec<PixelTag>,
}

impl GroundTruth {
    pub fn count(&self, tag: PixelTag) -> usize {
        self.provenance.iter().filter(|&&t| t == tag).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Geometry {
    Circle { r: f64 },
    Ellipse { a: f64, b: f64 },
    Rect { hw: f64, hh: f64 },
    Diamond { p: f64, q: f64 },
}

impl Geometry {
    fn valid(&self) -> bool {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        match *self {
            Geometry::Circle { r } => pos(r),
            Geometry::Ellipse { a, b } => pos(a) && pos(b),
            Geometry::Rect { hw, hh } => pos(hw) && pos(hh),
            Geometry::Diamond { p, q } => pos(p) && pos(q),
        }
    }

    fn contains(&self, dx: f64, dy: f64) -> bool {
        match *self {
            Geometry::Circle { r } => dx * dx + dy * dy <= r * r,
            Geometry::Ellipse { a, b } => (dx / a) * (dx / a) + (dy / b) * (dy / b) <= 1.0,
            Geometry::Rect { hw, hh } => -hw <= dx && dx < hw && -hh <= dy && dy < hh,
            Geometry::Diamond { p, q } => libm::fabs(dx) / p + libm::fabs(dy) / q <= 1.0,
        }
    }

    /// The shape moved inward by `s` (exact for circle, rectangle and
    /// rhombus; an inner ellipse for the ellipse).
    fn shrink(&self, s: f64) -> Option<Geometry> {
        let g = match *self {
            Geometry::Circle { r } => Geometry::Circle { r: r - s },
            Geometry::Ellipse { a, b } => Geometry::Ellipse { a: a - s, b: b - s },
            Geometry::Rect { hw, hh } => Geometry::Rect {
                hw: hw - s,
                hh: hh - s,
            },
            Geometry::Diamond { p, q } => {
                let side = libm::hypot(p, q);
                Geometry::Diamond {
                    p: p - s * side / q,
                    q: q - s * side / p,
                }
            }
        };
        g.valid().then_some(g)
    }

    /// Euclidean distance from a point outside the shape to the shape.
    /// Only needed for rhombi (round stroke joins).
    fn distance_outside(&self, dx: f64, dy: f64) -> f64 {
        match *self {
            Geometry::Diamond { p, q } => {
                let v = [(p, 0.0), (0.0, q), (-p, 0.0), (0.0, -q)];
                (0..4)
                    .map(|i| segment_distance((dx, dy), v[i], v[(i + 1) % 4]))
                    .fold(f64::INFINITY, f64::min)
            }
            _ => 0.0,
        }
    }

    fn half_extent(&self) -> (f64, f64) {
        match *self {
            Geometry::Circle { r } => (r, r),
            Geometry::Ellipse { a, b } => (a, b),
            Geometry::Rect { hw, hh } => (hw, hh),
            Geometry::Diamond { p, q } => (p, q),
        }
    }

    /// Distance from the centre to the boundary along unit direction `(ux, uy)`.
    fn ray(&self, ux: f64, uy: f64) -> f64 {
        match *self {
            Geometry::Circle { r } => r,
            Geometry::Ellipse { a, b } => {
                1.0 / libm::sqrt((ux / a) * (ux / a) + (uy / b) * (uy / b))
            }
            Geometry::Rect { hw, hh } => {
                let tx = if ux == 0.0 {
                    f64::INFINITY
                } else {
                    hw / libm::fabs(ux)
                };
                let ty = if uy == 0.0 {
                    f64::INFINITY
                } else {
                    hh / libm::fabs(uy)
                };
                tx.min(ty)
            }
            Geometry::Diamond { p, q } => 1.0 / (libm::fabs(ux) / p + libm::fabs(uy) / q),
        }
    }

    fn truth(&self) -> (f64, f64, f64) {
        let pi = core::f64::consts::PI;
        match *self {
            Geometry::Circle { r } => (r, r, pi * r * r),
            Geometry::Ellipse { a, b } => (a.max(b), a.min(b), pi * a * b),
            Geometry::Rect { hw, hh } => (libm::hypot(hw, hh), hw.min(hh), 4.0 * hw * hh),
            Geometry::Diamond { p, q } => (p.max(q), p * q / libm::hypot(p, q), 2.0 * p * q),
        }
    }
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (vx, vy) = (b.0 - a.0, b.1 - a.1);
    let t = (((p.0 - a.0) * vx + (p.1 - a.1) * vy) / (vx * vx + vy * vy)).clamp(0.0, 1.0);
    libm::hypot(p.0 - a.0 - t * vx, p.1 - a.1 - t * vy)
}

struct Canvas {
    width: usize,
    height: usize,
    tags: Vec<PixelTag>,
}

impl Canvas {
    fn paint(&mut self, x: isize, y: isize, tag: PixelTag) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.tags[y as usize * self.width + x as usize] = tag;
        }
    }

    /// Calls `f` for every pixel whose centre lies in the box.
    fn for_each_in(
        &self,
        x0: f64,
        y0: f64,
        x1: f64,
        y1: f64,
        mut f: impl FnMut(usize, usize, f64, f64),
    ) {
        let xa = libm::floor(x0).max(0.0) as usize;
        let ya = libm::floor(y0).max(0.0) as usize;
        let xb = (libm::ceil(x1) as usize).min(self.width);
        let yb = (libm::ceil(y1) as usize).min(self.height);
        for y in ya..yb {
            for x in xa..xb {
                f(x, y, x as f64 + 0.5, y as f64 + 0.5);
            }
        }
    }

    fn line(&mut self, from: (f64, f64), to: (f64, f64), tag: PixelTag) {
        let (mut x0, mut y0) = (libm::floor(from.0) as isize, libm::floor(from.1) as isize);
        let (x1, y1) = (libm::floor(to.0) as isize, libm::floor(to.1) as isize);
        let dx = (x1 - x0).abs();
        let dy = -(y1 - y0).abs();
        let sx = if x0 < x1 { 1 } else { -1 };
        let sy = if y0 < y1 { 1 } else { -1 };
        let mut err = dx + dy;
        loop {
            self.paint(x0, y0, tag);
            if x0 == x1 && y0 == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x0 += sx;
            }
            if e2 <= dx {
                err += dx;
                y0 += sy;
            }
        }
    }

    fn triangle(&mut self, v: [(f64, f64); 3], tag: PixelTag) {
        let edge = |a: (f64, f64), b: (f64, f64), p: (f64, f64)| {
            (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0)
        };
        let area = edge(v[0], v[1], v[2]);
        if area == 0.0 {
            return;
        }
        let x0 = v.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let y0 = v.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let x1 = v.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let y1 = v.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let mut hits = Vec::new();
        self.for_each_in(x0, y0, x1, y1, |x, y, px, py| {
            let p = (px, py);
            let w = [
                edge(v[1], v[2], p),
                edge(v[2], v[0], p),
                edge(v[0], v[1], p),
            ];
            if w.iter().all(|&e| e * area >= 0.0) {
                hits.push((x, y));
            }
        });
        for (x, y) in hits {
            self.paint(x as isize, y as isize, tag);
        }
    }
}

/// Arrowhead length and half-width, pixels.
const ARROW_LENGTH: f64 = 9.0;
const ARROW_HALF_WIDTH: f64 = 4.0;
/// Minimum gap between shapes and between shapes and the canvas border.
const MARGIN: f64 = 2.0;

fn validate(layout: &Layout) -> Result<()> {
    if layout.width == 0 || layout.height == 0 {
        return Err(Error::LayoutInvalid("empty canvas".into()));
    }
    let (w, h) = (layout.width as f64, layout.height as f64);
    for (i, n) in layout.nodes.iter().enumerate() {
        if !n.geometry().valid() || n.stroke_width.is_nan() || n.stroke_width <= 0.0 {
            return Err(Error::LayoutInvalid(format!(
                "node {i} has a non-positive size"
            )));
        }
        let (x0, y0, x1, y1) = n.pixel_bounds();
        if x0 < MARGIN || y0 < MARGIN || x1 > w - MARGIN || y1 > h - MARGIN {
            return Err(Error::LayoutInvalid(format!(
                "node {i} leaves the canvas margin"
            )));
        }
    }
    for i in 0..layout.nodes.len() {
        for j in i + 1..layout.nodes.len() {
            let a = layout.nodes[i].pixel_bounds();
            let b = layout.nodes[j].pixel_bounds();
            let apart = a.2 + MARGIN <= b.0
                || b.2 + MARGIN <= a.0
                || a.3 + MARGIN <= b.1
                || b.3 + MARGIN <= a.1;
            if !apart {
                return Err(Error::LayoutInvalid(format!("nodes {i} and {j} overlap")));
            }
        }
    }
    for (k, e) in layout.edges.iter().enumerate() {
        if e.from >= layout.nodes.len() || e.to >= layout.nodes.len() || e.from == e.to {
            return Err(Error::LayoutInvalid(format!(
                "edge {k} has invalid endpoints"
            )));
        }
    }
    Ok(())
}

fn unit(from: (f64, f64), to: (f64, f64)) -> (f64, f64) {
    let (dx, dy) = (to.0 - from.0, to.1 - from.1);
    let len = libm::hypot(dx, dy);
    if len == 0.0 {
        (1.0, 0.0)
    } else {
        (dx / len, dy / len)
    }
}

/// Distance from the centre to the painted outer edge of the node. Differs
/// from the geometric boundary only near rounded rhombus corners.
fn ink_ray(node: &NodeSpec, ux: f64, uy: f64) -> f64 {
    let g = node.geometry();
    let outer = g.ray(ux, uy);
    match g {
        Geometry::Diamond { .. } if !node.filled => match g.shrink(node.stroke_width) {
            Some(inner) => outer.min(inner.ray(ux, uy) + node.stroke_width),
            None => outer,
        },
        _ => outer,
    }
}

/// Compass port of `node` facing `toward`: the axis direction closest to it.
fn port(node: &NodeSpec, toward: (f64, f64)) -> (f64, f64) {
    let (ux, uy) = unit(node.center, toward);
    if libm::fabs(ux) >= libm::fabs(uy) {
        (libm::copysign(1.0, ux), 0.0)
    } else {
        (0.0, libm::copysign(1.0, uy))
    }
}

/// Point where a line leaving `node` through its port facing `toward`
/// crosses into the middle of the node's stroke, so drawn edges touch the
/// outline.
fn attach_point(node: &NodeSpec, toward: (f64, f64)) -> (f64, f64) {
    let (ux, uy) = port(node, toward);
    let inset = if node.filled {
        1.0
    } else {
        node.stroke_width / 2.0
    };
    let t = ink_ray(node, ux, uy) - inset;
    (node.center.0 + t * ux, node.center.1 + t * uy)
}

/// Rasterizes a layout: black ink (0) on white (255) plus ground truth.
///
/// Paint order is node shapes, edges, arrowheads, text; later layers win in
/// the provenance map where they overlap.
pub fn render(layout: &Layout) -> Result<(GrayImage, GroundTruth)> {
    validate(layout)?;
    let mut canvas = Canvas {
        width: layout.width,
        height: layout.height,
        tags: vec![PixelTag::Background; layout.width * layout.height],
    };

    let mut nodes = Vec::with_capacity(layout.nodes.len());
    for n in &layout.nodes {
        let g = n.geometry();
        let inner = if n.filled {
            None
        } else {
            g.shrink(n.stroke_width)
        };
        let (x0, y0, x1, y1) = n.pixel_bounds();
        let (cx, cy) = n.center;
        let mut hits = Vec::new();
        canvas.for_each_in(x0, y0, x1, y1, |x, y, px, py| {
            let (dx, dy) = (px - cx, py - cy);
            if g.contains(dx, dy) {
                let tag = match inner {
                    _ if n.filled => PixelTag::NodeFill,
                    Some(inner) if inner.contains(dx, dy) => return,
                    // rhombus strokes use round joins: a mitred acute corner is a
                    // solid wedge that thins into a spur
                    Some(inner @ Geometry::Diamond { .. })
                        if inner.distance_outside(dx, dy) > n.stroke_width =>
                    {
                        return
                    }
                    _ => PixelTag::NodeOutline,
                };
                hits.push((x, y, tag));
            }
        });
        for (x, y, tag) in hits {
            canvas.paint(x as isize, y as isize, tag);
        }
        let (a, b, c) = g.truth();
        nodes.push(NodeTruth {
            role: n.role,
            center: n.center,
            a,
            b,
            c,
        });
    }

    for e in &layout.edges {
        let (src, dst) = (&layout.nodes[e.from], &layout.nodes[e.to]);
        let first_target = e.waypoints.first().copied().unwrap_or(dst.center);
        let last_source = e.waypoints.last().copied().unwrap_or(src.center);
        let mut points = vec![attach_point(src, first_target)];
        points.extend(e.waypoints.iter().copied());
        points.push(attach_point(dst, last_source));
        for pair in points.windows(2) {
            canvas.line(pair[0], pair[1], PixelTag::Edge);
        }
        if e.arrowhead {
            // tip on the target's port, body pointing back along the last segment
            let (px, py) = port(dst, last_source);
            let t = ink_ray(dst, px, py);
            let tip = (dst.center.0 + t * px, dst.center.1 + t * py);
            let (ux, uy) = unit(points[points.len() - 2], tip);
            let base = (tip.0 - ARROW_LENGTH * ux, tip.1 - ARROW_LENGTH * uy);
            let (nx, ny) = (-uy * ARROW_HALF_WIDTH, ux * ARROW_HALF_WIDTH);
            canvas.triangle(
                [tip, (base.0 + nx, base.1 + ny), (base.0 - nx, base.1 - ny)],
                PixelTag::Edge,
            );
        }
    }

    for n in &layout.nodes {
        for blob in &n.labels {
            let (hx, hy) = (blob.size.0 / 2.0, blob.size.1 / 2.0);
            let (cx, cy) = blob.center;
            let mut hits = Vec::new();
            canvas.for_each_in(cx - hx, cy - hy, cx + hx, cy + hy, |x, y, px, py| {
                if cx - hx <= px && px < cx + hx && cy - hy <= py && py < cy + hy {
                    hits.push((x, y));
                }
            });
            for (x, y) in hits {
                canvas.paint(x as isize, y as isize, PixelTag::Text);
            }
        }
    }

    let pixels = canvas
        .tags
        .iter()
        .map(|&t| if t == PixelTag::Background { 255 } else { 0 })
        .collect();
    let image = GrayImage::new(layout.width, layout.height, pixels)?;
    let vector = layout.nodes.iter().map(|n| n.role).collect();
    Ok((
        image,
        GroundTruth {
            vector,
            nodes,
            provenance: canvas.tags,
        },
    ))
}

/// Knobs for [`generate_corpus`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CorpusConfig {
    pub min_nodes: u32,
    pub max_nodes: u32,
    /// Keep every shape inside the parameter ranges the classifier cascade
    /// separates: rectangles avoid the near-3:4 aspect band that scores as
    /// an ellipse, rhombi avoid the square-like band that scores as a
    /// rectangle.
    pub safe_shapes: bool,
    pub with_text: bool,
    pub with_edges: bool,
    pub stroke_width: f64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            min_nodes: 3,
            max_nodes: 15,
            safe_shapes: true,
            with_text: true,
            with_edges: true,
            stroke_width: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthFigure {
    pub layout: Layout,
    pub image: GrayImage,
    pub truth: GroundTruth,
}

/// Grid cell holding one node, pixels.
pub const CELL: (u32, u32) = (170, 140);
const COLUMNS: u32 = 4;

/// Random node size for `role`, drawn from the ranges the corpus uses.
///
/// All ranges keep the smaller dimension at or above 40 px.
pub fn random_size(rng: &mut Lcg, role: FlowchartRole, safe: bool) -> (f64, f64) {
    let (x, y) = match role {
        FlowchartRole::Connector => {
            let r = rng.range(32, 45);
            (r, r)
        }
        FlowchartRole::StartStop => {
            let major = rng.range(45, 60);
            let minor = rng.range(22, 35.min(major - 15));
            (major, minor)
        }
        FlowchartRole::Process => {
            let h = rng.range(40, 58);
            // aspect in tenths; the collision band is roughly 1.12..1.46
            let aspect = if safe {
                rng.range(16, 24)
            } else {
                rng.range(11, 24)
            };
            (h * aspect / 10, h)
        }
        FlowchartRole::Decision => {
            let p = rng.range(45, 60);
            // q/p in hundredths; near 1 a rhombus is a square and reads as a rectangle
            let t = if safe {
                rng.range(55, 80)
            } else {
                rng.range(55, 95)
            };
            (p, p * t / 100)
        }
    };
    let (x, y) = (x as f64, y as f64);
    // ellipses and rhombi are sometimes stood upright; process boxes stay landscape
    if matches!(role, FlowchartRole::StartStop | FlowchartRole::Decision) && rng.range(0, 3) == 0 {
        (y, x)
    } else {
        (x, y)
    }
}

fn random_role(rng: &mut Lcg) -> FlowchartRole {
    FlowchartRole::ALL[rng.range(0, 3) as usize]
}

/// Up to three text blobs in a row at the node centre, kept well inside
/// the outline.
fn place_labels(rng: &mut Lcg, node: &NodeSpec) -> Vec<GlyphBlob> {
    let count = rng.range(1, 3);
    let sizes: Vec<(f64, f64)> = (0..count)
        .map(|_| (rng.range(3, 8) as f64, rng.range(3, 8) as f64))
        .collect();
    let gap = 3.0;
    let total: f64 = sizes.iter().map(|s| s.0).sum::<f64>() + gap * (count as f64 - 1.0);
    let Some(safe) = node.geometry().shrink(node.stroke_width + 4.0) else {
        return Vec::new();
    };
    let mut x = node.center.0 - total / 2.0;
    let mut out = Vec::new();
    for (w, h) in sizes {
        let c = (x + w / 2.0, node.center.1);
        let corners = [
            (-w / 2.0, -h / 2.0),
            (w / 2.0, -h / 2.0),
            (-w / 2.0, h / 2.0),
            (w / 2.0, h / 2.0),
        ];
        if corners
            .iter()
            .all(|&(dx, dy)| safe.contains(c.0 + dx - node.center.0, c.1 + dy - node.center.1))
        {
            out.push(GlyphBlob {
                center: c,
                size: (w, h),
            });
        }
        x += w + gap;
    }
    out
}

/// One random flowchart layout. Nodes sit in a grid visited row by row in
/// alternating direction; each node links to the next, so every flow line
/// joins neighbouring cells and never crosses a third node.
pub fn random_layout(rng: &mut Lcg, cfg: &CorpusConfig) -> Layout {
    let n = rng.range(cfg.min_nodes, cfg.max_nodes.max(cfg.min_nodes));
    let cols = n.min(COLUMNS);
    let rows = n.div_ceil(cols);
    let width = (cols * CELL.0) as usize;
    let height = (rows * CELL.1) as usize;

    let mut nodes = Vec::with_capacity(n as usize);
    for i in 0..n {
        let row = i / cols;
        let col = if row.is_multiple_of(2) {
            i % cols
        } else {
            cols - 1 - i % cols
        };
        let role = random_role(rng);
        let size = random_size(rng, role, cfg.safe_shapes);
        let probe = NodeSpec::outline(role, (0.0, 0.0), size);
        let (ex, ey) = probe.geometry().half_extent();
        let slack_x = ((CELL.0 as f64 / 2.0 - ex - 6.0).max(0.0) as u32).min(8);
        let slack_y = ((CELL.1 as f64 / 2.0 - ey - 6.0).max(0.0) as u32).min(8);
        let jx = rng.range(0, 2 * slack_x) as f64 - slack_x as f64;
        let jy = rng.range(0, 2 * slack_y) as f64 - slack_y as f64;
        let center = (
            (col * CELL.0 + CELL.0 / 2) as f64 + jx + 0.5,
            (row * CELL.1 + CELL.1 / 2) as f64 + jy + 0.5,
        );
        let mut node = NodeSpec {
            stroke_width: cfg.stroke_width,
            ..NodeSpec::outline(role, center, size)
        };
        if cfg.with_text {
            node.labels = place_labels(rng, &node);
        }
        nodes.push(node);
    }
    let edges = if cfg.with_edges {
        (0..nodes.len().saturating_sub(1))
            .map(|i| EdgeSpec {
                from: i,
                to: i + 1,
                waypoints: Vec::new(),
                arrowhead: true,
            })
            .collect()
    } else {
        Vec::new()
    };
    Layout {
        width,
        height,
        nodes,
        edges,
    }
}

/// `n` random flowcharts, fully determined by `seed`.
pub fn generate_corpus(seed: u64, n: usize, cfg: &CorpusConfig) -> Result<Vec<SynthFigure>> {
    let mut rng = Lcg::new(seed);
    (0..n)
        .map(|_| {
            let layout = random_layout(&mut rng, cfg);
            let (image, truth) = render(&layout)?;
            Ok(SynthFigure {
                layout,
                image,
                truth,
            })
        })
        .collect()
}

/// A single-node layout on a canvas with a 10 px border around the shape.
pub fn single_shape(role: FlowchartRole, size: (f64, f64), filled: bool) -> Layout {
    let probe = NodeSpec::outline(role, (0.0, 0.0), size);
    let (ex, ey) = probe.geometry().half_extent();
    let width = (2.0 * libm::ceil(ex) + 20.0) as usize;
    let height = (2.0 * libm::ceil(ey) + 20.0) as usize;
    let center = ((width / 2) as f64 + 0.5, (height / 2) as f64 + 0.5);
    let node = if filled {
        NodeSpec::solid(role, center, size)
    } else {
        NodeSpec::outline(role, center, size)
    };
    Layout {
        width,
        height,
        nodes: vec![node],
        edges: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn lcg_reference_values() {
        let mut rng = Lcg::new(0);
        // state_1 = INCREMENT; output = INCREMENT >> 33
        assert_eq!(rng.next_u32(), (Lcg::INCREMENT >> 33) as u32);
        let s2 = Lcg::INCREMENT
            .wrapping_mul(Lcg::MULTIPLIER)
            .wrapping_add(Lcg::INCREMENT);
        assert_eq!(rng.next_u32(), (s2 >> 33) as u32);
    }

    #[test]
    fn filled_rectangle_is_exact() {
        let layout = single_shape(FlowchartRole::Process, (80.0, 40.0), true);
        let (img, truth) = render(&layout).unwrap();
        let ink = img.pixels().iter().filter(|&&v| v == 0).count();
        assert_eq!(ink, 3200);
        assert_eq!(truth.nodes[0].c, 3200.0);
        assert_eq!(truth.count(PixelTag::NodeFill), 3200);
    }

    #[test]
    fn filled_circle_area() {
        let layout = single_shape(FlowchartRole::Connector, (50.0, 50.0), true);
        let (img, truth) = render(&layout).unwrap();
        let ink = img.pixels().iter().filter(|&&v| v == 0).count() as f64;
        let analytic = PI * 2500.0;
        assert!((ink - analytic).abs() / analytic < 0.02);
        assert_eq!((truth.nodes[0].a, truth.nodes[0].b), (50.0, 50.0));
    }

    #[test]
    fn analytic_truth() {
        let rect = single_shape(FlowchartRole::Process, (80.0, 40.0), true);
        let t = render(&rect).unwrap().1.nodes[0];
        assert!((t.a - libm::sqrt(2000.0)).abs() < 1e-12);
        assert_eq!(t.b, 20.0);
        let dia = single_shape(FlowchartRole::Decision, (50.0, 30.0), true);
        let t = render(&dia).unwrap().1.nodes[0];
        assert_eq!(t.a, 50.0);
        assert!((t.b - 1500.0 / libm::sqrt(3400.0)).abs() < 1e-12);
        assert_eq!(t.c, 3000.0);
    }

    #[test]
    fn outlines_have_stroke_width() {
        let layout = single_shape(FlowchartRole::Process, (80.0, 40.0), false);
        let (_, truth) = render(&layout).unwrap();
        // 80x40 minus 76x36
        assert_eq!(truth.count(PixelTag::NodeOutline), 3200 - 76 * 36);
    }

    #[test]
    fn small_flowchart_truth_and_provenance() {
        let mut a = NodeSpec::outline(FlowchartRole::StartStop, (60.5, 50.5), (45.0, 25.0));
        a.labels.push(GlyphBlob {
            center: (60.5, 50.5),
            size: (6.0, 4.0),
        });
        let b = NodeSpec::outline(FlowchartRole::Process, (200.5, 50.5), (90.0, 50.0));
        let c = NodeSpec::outline(FlowchartRole::Decision, (200.5, 170.5), (50.0, 30.0));
        let d = NodeSpec::outline(FlowchartRole::Connector, (60.5, 170.5), (35.0, 35.0));
        let edges = (0..3)
            .map(|i| EdgeSpec {
                from: i,
                to: i + 1,
                waypoints: Vec::new(),
                arrowhead: true,
            })
            .collect();
        let layout = Layout {
            width: 280,
            height: 220,
            nodes: vec![a, b, c, d],
            edges,
        };
        let (img, truth) = render(&layout).unwrap();
        assert_eq!(truth.vector, FeatureVector::new(1, 1, 1, 1));
        assert_eq!(truth.provenance.len(), img.pixels().len());
        for (tag, &v) in truth.provenance.iter().zip(img.pixels()) {
            assert_eq!(*tag == PixelTag::Background, v == 255);
        }
        assert!(truth.count(PixelTag::Edge) > 100);
        assert_eq!(truth.count(PixelTag::Text), 24);
    }

    #[test]
    fn invalid_layouts() {
        let mut layout = single_shape(FlowchartRole::Connector, (20.0, 20.0), false);
        layout.width = 30;
        assert!(matches!(render(&layout), Err(Error::LayoutInvalid(_))));

        let a = NodeSpec::outline(FlowchartRole::Connector, (50.5, 50.5), (20.0, 20.0));
        let b = NodeSpec::outline(FlowchartRole::Connector, (70.5, 50.5), (20.0, 20.0));
        let overlap = Layout {
            width: 200,
            height: 200,
            nodes: vec![a.clone(), b],
            edges: Vec::new(),
        };
        assert!(matches!(render(&overlap), Err(Error::LayoutInvalid(_))));

        let dangling = Layout {
            width: 200,
            height: 200,
            nodes: vec![a],
            edges: vec![EdgeSpec {
                from: 0,
                to: 3,
                waypoints: Vec::new(),
                arrowhead: false,
            }],
        };
        assert!(matches!(render(&dangling), Err(Error::LayoutInvalid(_))));
    }

    #[test]
    fn corpus_is_deterministic_and_non_empty() {
        let cfg = CorpusConfig::default();
        let a = generate_corpus(7, 20, &cfg).unwrap();
        let b = generate_corpus(7, 20, &cfg).unwrap();
        assert_eq!(a.len(), 20);
        assert_eq!(a, b);
        for f in &a {
            assert!(!f.truth.vector.is_zero());
            let n = f.layout.nodes.len() as u32;
            assert!((3..=15).contains(&n));
            assert_eq!(f.truth.vector.total(), n);
        }
        let c = generate_corpus(8, 20, &cfg).unwrap();
        assert_ne!(a, c);
    }
}
