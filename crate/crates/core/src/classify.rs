//! Radial-ratio shape classification and the per-figure feature vector.
//!
//! Each closed outline is filled, measured (centroid, max radius `A`, min
//! radius `B`, area `C`) and scored with four ratios, each equal to 1 (or 0
//! for the circle score) on the ideal continuous shape:
//!
//! | score      | formula                    |
//! |------------|----------------------------|
//! | circle     | `A - B`                    |
//! | ellipse    | `C / (pi A B)`             |
//! | rectangle  | `C / (4 B sqrt(A^2 - B^2))` |
//! | diamond    | `C sqrt(A^2 - B^2) / (2 A^2 B)` |
//!
//! The cascade tests circle, ellipse, rectangle, diamond in that order and
//! takes the first hit.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::contour::{measure_shape, ShapeMeasurement};
use crate::raster::{label_components, BinaryImage, ConnectedComponent, Connectivity, NEIGHBORS_4};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ShapeClass {
    Circle,
    Ellipse,
    Rectangle,
    Diamond,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FlowchartRole {
    Connector,
    StartStop,
    Decision,
    Process,
}

impl FlowchartRole {
    pub const ALL: [FlowchartRole; 4] = [
        FlowchartRole::Connector,
        FlowchartRole::StartStop,
        FlowchartRole::Decision,
        FlowchartRole::Process,
    ];

    /// Geometric class conventionally drawn for this role.
    pub fn shape(self) -> ShapeClass {
        match self {
            FlowchartRole::Connector => ShapeClass::Circle,
            FlowchartRole::StartStop => ShapeClass::Ellipse,
            FlowchartRole::Decision => ShapeClass::Diamond,
            FlowchartRole::Process => ShapeClass::Rectangle,
        }
    }
}

impl fmt::Display for FlowchartRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlowchartRole::Connector => "connector",
            FlowchartRole::StartStop => "start_stop",
            FlowchartRole::Decision => "decision",
            FlowchartRole::Process => "process",
        })
    }
}

/// Counts of each flowchart role in one figure.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureVector {
    pub connector: u32,
    pub start_stop: u32,
    pub decision: u32,
    pub process: u32,
}

impl FeatureVector {
    pub const fn new(connector: u32, start_stop: u32, decision: u32, process: u32) -> Self {
        Self {
            connector,
            start_stop,
            decision,
            process,
        }
    }

    /// `[connector, start_stop, decision, process]`
    pub fn to_array(self) -> [u32; 4] {
        [self.connector, self.start_stop, self.decision, self.process]
    }

    pub fn from_array([connector, start_stop, decision, process]: [u32; 4]) -> Self {
        Self::new(connector, start_stop, decision, process)
    }

    pub fn get(&self, role: FlowchartRole) -> u32 {
        match role {
            FlowchartRole::Connector => self.connector,
            FlowchartRole::StartStop => self.start_stop,
            FlowchartRole::Decision => self.decision,
            FlowchartRole::Process => self.process,
        }
    }

    pub fn increment(&mut self, role: FlowchartRole) {
        match role {
            FlowchartRole::Connector => self.connector += 1,
            FlowchartRole::StartStop => self.start_stop += 1,
            FlowchartRole::Decision => self.decision += 1,
            FlowchartRole::Process => self.process += 1,
        }
    }

    /// Total number of recognized nodes.
    pub fn total(&self) -> u32 {
        self.to_array().iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.total() == 0
    }
}

impl FromIterator<FlowchartRole> for FeatureVector {
    fn from_iter<I: IntoIterator<Item = FlowchartRole>>(iter: I) -> Self {
        let mut v = FeatureVector::default();
        for role in iter {
            v.increment(role);
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassifierConfig {
    /// Absolute `A - B` bound (pixels) below which a shape is a circle.
    pub circle_tolerance: f64,
    pub ratio_low: f64,
    pub ratio_high: f64,
    /// Evaluate the cascade in its fixed order. When `false`, the ratio
    /// closest to 1 among those inside the interval wins instead.
    pub strict_order: bool,
    /// Test `(A - B) / A < 0.1` instead of the absolute circle bound.
    pub relative_circle: bool,
}

/// Relative circle bound used when [`ClassifierConfig::relative_circle`] is set.
pub const RELATIVE_CIRCLE_TOLERANCE: f64 = 0.1;

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            circle_tolerance: 10.0,
            ratio_low: 0.95,
            ratio_high: 1.05,
            strict_order: true,
            relative_circle: false,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.ratio_low && self.ratio_low < 1.0 && 1.0 < self.ratio_high) {
            return Err(Error::InvalidConfig(
                "ratio bounds must satisfy 0 < low < 1 < high".into(),
            ));
        }
        if self.circle_tolerance.is_nan() || self.circle_tolerance < 0.0 {
            return Err(Error::InvalidConfig("circle_tolerance must be >= 0".into()));
        }
        Ok(())
    }

    fn in_band(&self, r: f64) -> bool {
        self.ratio_low < r && r < self.ratio_high
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShapeRatios {
    pub circle_score: f64,
    /// `(A - B) / A`, used only by the relative circle test.
    pub relative_circle_score: f64,
    pub ellipse_ratio: f64,
    /// `None` when `A == B`, where the formula divides by zero.
    pub rectangle_ratio: Option<f64>,
    /// `None` when `A == B`.
    pub diamond_ratio: Option<f64>,
}

/// Evaluates the four shape scores from `A`, `B` and `C`.
pub fn ratios_from(a: f64, b: f64, c: f64) -> Result<ShapeRatios> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::DegenerateMeasurement { a, b });
    }
    let pi = core::f64::consts::PI;
    let spread = a * a - b * b;
    let (rectangle_ratio, diamond_ratio) = if spread > 0.0 {
        let half_side = libm::sqrt(spread);
        (
            Some(c / (4.0 * b * half_side)),
            Some(c * half_side / (2.0 * a * a * b)),
        )
    } else {
        (None, None)
    };
    Ok(ShapeRatios {
        circle_score: a - b,
        relative_circle_score: (a - b) / a,
        ellipse_ratio: c / (pi * a * b),
        rectangle_ratio,
        diamond_ratio,
    })
}

pub fn compute_ratios(m: &ShapeMeasurement) -> Result<ShapeRatios> {
    ratios_from(m.max_radius, m.min_radius, m.area as f64)
}

pub fn classify(r: &ShapeRatios, cfg: &ClassifierConfig) -> ShapeClass {
    let is_circle = if cfg.relative_circle {
        r.relative_circle_score < RELATIVE_CIRCLE_TOLERANCE
    } else {
        r.circle_score < cfg.circle_tolerance
    };
    if is_circle {
        return ShapeClass::Circle;
    }
    let candidates = [
        (ShapeClass::Ellipse, Some(r.ellipse_ratio)),
        (ShapeClass::Rectangle, r.rectangle_ratio),
        (ShapeClass::Diamond, r.diamond_ratio),
    ];
    let hits = candidates
        .iter()
        .filter_map(|&(class, ratio)| ratio.filter(|&v| cfg.in_band(v)).map(|v| (class, v)));
    if cfg.strict_order {
        hits.map(|(class, _)| class)
            .next()
            .unwrap_or(ShapeClass::Unknown)
    } else {
        hits.min_by(|x, y| libm::fabs(x.1 - 1.0).total_cmp(&libm::fabs(y.1 - 1.0)))
            .map_or(ShapeClass::Unknown, |(class, _)| class)
    }
}

/// Circle -> Connector, Ellipse -> StartStop, Rectangle -> Process,
/// Diamond -> Decision.
pub fn role_of(class: ShapeClass) -> Result<FlowchartRole> {
    match class {
        ShapeClass::Circle => Ok(FlowchartRole::Connector),
        ShapeClass::Ellipse => Ok(FlowchartRole::StartStop),
        ShapeClass::Rectangle => Ok(FlowchartRole::Process),
        ShapeClass::Diamond => Ok(FlowchartRole::Decision),
        ShapeClass::Unknown => Err(Error::UnclassifiedShape),
    }
}

/// Fills the interior of a closed outline.
///
/// Interior pixels are the background pixels of the component's bounding box
/// that a 4-connected flood from outside the box cannot reach. Only the
/// component's own pixels act as walls, so other components (e.g. text left
/// inside the node) do not matter.
pub fn fill_outline(outline: &ConnectedComponent) -> Result<ConnectedComponent> {
    let (x0, y0, x1, y1) = outline.bounding_box;
    let (w, h) = (x1 - x0 + 3, y1 - y0 + 3);
    // 0 = unknown background, 1 = wall, 2 = outside
    let mut grid = vec![0u8; w * h];
    for &(x, y) in &outline.pixels {
        grid[(y - y0 + 1) * w + (x - x0 + 1)] = 1;
    }
    let mut queue = VecDeque::from([(0usize, 0usize)]);
    grid[0] = 2;
    while let Some((x, y)) = queue.pop_front() {
        for (dx, dy) in NEIGHBORS_4 {
            let (nx, ny) = (x as isize + dx, y as isize + dy);
            if nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= h {
                continue;
            }
            let i = ny as usize * w + nx as usize;
            if grid[i] == 0 {
                grid[i] = 2;
                queue.push_back((nx as usize, ny as usize));
            }
        }
    }
    if !grid.contains(&0) {
        return Err(Error::NotClosed {
            label: outline.label,
        });
    }
    let pixels = grid
        .iter()
        .enumerate()
        .filter(|(_, &g)| g != 2)
        .map(|(i, _)| (i % w + x0 - 1, i / w + y0 - 1))
        .collect();
    Ok(ConnectedComponent::from_pixels(outline.label, pixels))
}

/// Per-component result of [`extract_feature_vector`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShapeRecord {
    pub label: u32,
    /// `None` when the outline could not be filled or was too small.
    pub measurement: Option<ShapeMeasurement>,
    pub ratios: Option<ShapeRatios>,
    pub class: ShapeClass,
}

/// Classifies one outline: fill, measure, score, classify.
pub fn classify_outline(outline: &ConnectedComponent, cfg: &ClassifierConfig) -> ShapeRecord {
    let measured = fill_outline(outline).and_then(|filled| measure_shape(&filled));
    let (measurement, ratios) = match measured {
        Ok(m) => {
            let r = compute_ratios(&m).ok();
            (Some(m), r)
        }
        Err(_) => (None, None),
    };
    let class = ratios
        .as_ref()
        .map_or(ShapeClass::Unknown, |r| classify(r, cfg));
    ShapeRecord {
        label: outline.label,
        measurement,
        ratios,
        class,
    }
}

/// Builds the feature vector of a preprocessed (outlines only) image.
///
/// Every 8-connected component is filled, measured and classified; shapes
/// that end up `Unknown` appear in the listing but not in the vector. The
/// listing is ordered by component label.
pub fn extract_feature_vector(
    img: &BinaryImage,
    cfg: &ClassifierConfig,
) -> (FeatureVector, Vec<ShapeRecord>) {
    let records: Vec<ShapeRecord> = label_components(img, Connectivity::Eight)
        .iter()
        .map(|c| classify_outline(c, cfg))
        .collect();
    let vector = records
        .iter()
        .filter_map(|r| role_of(r.class).ok())
        .collect();
    (vector, records)
}

/// Same as [`extract_feature_vector`] for images of filled (solid) shapes,
/// which are measured directly without outline filling.
pub fn extract_filled(
    img: &BinaryImage,
    cfg: &ClassifierConfig,
) -> (FeatureVector, Vec<ShapeRecord>) {
    let records: Vec<ShapeRecord> = label_components(img, Connectivity::Eight)
        .iter()
        .map(|c| {
            let measurement = measure_shape(c).ok();
            let ratios = measurement.as_ref().and_then(|m| compute_ratios(m).ok());
            let class = ratios
                .as_ref()
                .map_or(ShapeClass::Unknown, |r| classify(r, cfg));
            ShapeRecord {
                label: c.label,
                measurement,
                ratios,
                class,
            }
        })
        .collect();
    let vector = records
        .iter()
        .filter_map(|r| role_of(r.class).ok())
        .collect();
    (vector, records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    const CFG: ClassifierConfig = ClassifierConfig {
        circle_tolerance: 10.0,
        ratio_low: 0.95,
        ratio_high: 1.05,
        strict_order: true,
        relative_circle: false,
    };

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn ideal_ellipse_ratio_is_one() {
        let r = ratios_from(60.0, 30.0, PI * 1800.0).unwrap();
        assert!(close(r.ellipse_ratio, 1.0));
    }

    #[test]
    fn ideal_rectangle_ratio_is_one() {
        let r = ratios_from(libm::sqrt(2000.0), 20.0, 3200.0).unwrap();
        assert!(close(r.rectangle_ratio.unwrap(), 1.0));
    }

    #[test]
    fn ideal_diamond_ratio_is_one() {
        let b = 1500.0 / libm::sqrt(3400.0);
        let r = ratios_from(50.0, b, 3000.0).unwrap();
        assert!(close(r.diamond_ratio.unwrap(), 1.0));
    }

    #[test]
    fn degenerate_and_equal_radii() {
        assert!(matches!(
            ratios_from(0.0, 0.0, 5.0),
            Err(Error::DegenerateMeasurement { .. })
        ));
        let r = ratios_from(5.0, 5.0, 78.0).unwrap();
        assert_eq!(r.rectangle_ratio, None);
        assert_eq!(r.diamond_ratio, None);
        assert_eq!(r.circle_score, 0.0);
    }

    #[test]
    fn cascade_examples() {
        let circle = ratios_from(50.3, 49.7, 1.0).unwrap();
        assert!((circle.circle_score - 0.6).abs() < 1e-9);
        assert_eq!(classify(&circle, &CFG), ShapeClass::Circle);

        let rect = ratios_from(libm::sqrt(2000.0), 20.0, 3200.0).unwrap();
        assert!((rect.ellipse_ratio - 1.13882).abs() < 1e-4);
        assert_eq!(classify(&rect, &CFG), ShapeClass::Rectangle);

        let b = 1500.0 / libm::sqrt(3400.0);
        assert_eq!(
            classify(&ratios_from(50.0, b, 3000.0).unwrap(), &CFG),
            ShapeClass::Diamond
        );
        assert_eq!(
            classify(&ratios_from(60.0, 30.0, PI * 1800.0).unwrap(), &CFG),
            ShapeClass::Ellipse
        );
        assert_eq!(
            classify(&ratios_from(60.0, 30.0, 100.0).unwrap(), &CFG),
            ShapeClass::Unknown
        );
    }

    #[test]
    fn three_by_four_rectangle_reads_as_ellipse() {
        let r = ratios_from(50.0, 30.0, 4800.0).unwrap();
        assert!((r.ellipse_ratio - 4800.0 / (PI * 1500.0)).abs() < 1e-12);
        assert!((r.ellipse_ratio - 1.0186).abs() < 1e-4);
        assert!(close(r.rectangle_ratio.unwrap(), 1.0));
        assert_eq!(classify(&r, &CFG), ShapeClass::Ellipse);
        // the closest-ratio extension resolves it as a rectangle
        let loose = ClassifierConfig {
            strict_order: false,
            ..CFG
        };
        assert_eq!(classify(&r, &loose), ShapeClass::Rectangle);
    }

    #[test]
    fn interval_bounds_are_open() {
        // ellipse ratio exactly at the upper bound is not an ellipse
        let a: f64 = 60.0;
        let b: f64 = 30.0;
        let r = ratios_from(a, b, 1.05 * PI * a * b).unwrap();
        assert!(!CFG.in_band(1.05));
        assert!(!CFG.in_band(0.95));
        assert_ne!(classify(&r, &CFG), ShapeClass::Ellipse);
    }

    #[test]
    fn relative_circle_mode() {
        // a large near-circle fails the absolute bound but passes the relative one
        let r = ratios_from(200.0, 185.0, PI * 200.0 * 185.0).unwrap();
        assert_eq!(classify(&r, &CFG), ShapeClass::Ellipse);
        let rel = ClassifierConfig {
            relative_circle: true,
            ..CFG
        };
        assert_eq!(classify(&r, &rel), ShapeClass::Circle);
    }

    #[test]
    fn role_mapping() {
        assert_eq!(role_of(ShapeClass::Diamond), Ok(FlowchartRole::Decision));
        assert_eq!(role_of(ShapeClass::Rectangle), Ok(FlowchartRole::Process));
        assert_eq!(role_of(ShapeClass::Circle), Ok(FlowchartRole::Connector));
        assert_eq!(role_of(ShapeClass::Ellipse), Ok(FlowchartRole::StartStop));
        assert_eq!(role_of(ShapeClass::Unknown), Err(Error::UnclassifiedShape));
        for role in FlowchartRole::ALL {
            assert_eq!(role_of(role.shape()), Ok(role));
        }
    }

    fn outline(rows: &[&str]) -> ConnectedComponent {
        let img = BinaryImage::from_ascii(rows).unwrap();
        label_components(&img, Connectivity::Eight).remove(0)
    }

    #[test]
    fn fill_rectangle_outline() {
        let rows = [
            "##########",
            "#........#",
            "#........#",
            "#........#",
            "#........#",
            "##########",
        ];
        let filled = fill_outline(&outline(&rows)).unwrap();
        assert_eq!(filled.area(), 60);
        assert_eq!(filled.bounding_box, (0, 0, 9, 5));
    }

    #[test]
    fn fill_rejects_open_shapes() {
        assert_eq!(
            fill_outline(&outline(&["#"])),
            Err(Error::NotClosed { label: 1 })
        );
        assert!(fill_outline(&outline(&["####", "#..#", "#..."])).is_err());
    }

    #[test]
    fn extract_empty() {
        let img = BinaryImage::new(10, 10).unwrap();
        let (v, shapes) = extract_feature_vector(&img, &CFG);
        assert_eq!(v, FeatureVector::default());
        assert!(shapes.is_empty());
    }

    proptest! {
        #[test]
        fn ideal_ellipses_score_one(a in 10.0f64..200.0, k in 0.1f64..0.99) {
            let b = a * k;
            let r = ratios_from(a, b, PI * a * b).unwrap();
            prop_assert!((r.ellipse_ratio - 1.0).abs() < 1e-12);
        }

        #[test]
        fn ideal_rectangles_score_one(w in 10.0f64..200.0, h in 10.0f64..200.0) {
            prop_assume!((w - h).abs() > 1e-6);
            let a = libm::hypot(w, h) / 2.0;
            let b = w.min(h) / 2.0;
            let r = ratios_from(a, b, w * h).unwrap();
            prop_assert!((r.rectangle_ratio.unwrap() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn ideal_rhombi_score_one(p in 10.0f64..200.0, q in 10.0f64..200.0) {
            prop_assume!((p - q).abs() > 1e-3);
            let a = p.max(q);
            let b = p * q / libm::hypot(p, q);
            let r = ratios_from(a, b, 2.0 * p * q).unwrap();
            prop_assert!((r.diamond_ratio.unwrap() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn ratios_are_scale_invariant(a in 10.0f64..100.0, k in 0.2f64..0.9, c in 100.0f64..10000.0, s in 1.5f64..4.0) {
            let r1 = ratios_from(a, a * k, c).unwrap();
            let r2 = ratios_from(a * s, a * k * s, c * s * s).unwrap();
            prop_assert!((r1.ellipse_ratio - r2.ellipse_ratio).abs() < 1e-9);
            prop_assert!((r1.rectangle_ratio.unwrap() - r2.rectangle_ratio.unwrap()).abs() < 1e-9);
            prop_assert!((r1.diamond_ratio.unwrap() - r2.diamond_ratio.unwrap()).abs() < 1e-9);
        }

        #[test]
        fn exactly_one_class(a in 1.0f64..100.0, k in 0.01f64..1.0, c in 1.0f64..40000.0, strict in any::<bool>()) {
            let r = ratios_from(a, a * k, c).unwrap();
            let cfg = ClassifierConfig { strict_order: strict, ..CFG };
            let class = classify(&r, &cfg);
            let n = [ShapeClass::Circle, ShapeClass::Ellipse, ShapeClass::Rectangle, ShapeClass::Diamond, ShapeClass::Unknown]
                .iter().filter(|&&x| x == class).count();
            prop_assert_eq!(n, 1);
        }
    }
}
