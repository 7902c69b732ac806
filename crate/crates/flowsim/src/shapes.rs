//! Per-shape debug output for one figure.

use std::fs;
use std::path::{Path, PathBuf};

use flowsim_core::classify::role_of;
use flowsim_core::pipeline::FigureAnalysis;
use flowsim_core::{FeatureVector, FlowchartRole, GrayImage, ShapeClass};
use serde::Serialize;

use crate::codec::write_pgm;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct ShapeEntry {
    pub label: u32,
    pub centroid: Option<(f64, f64)>,
    #[serde(rename = "A")]
    pub a: Option<f64>,
    #[serde(rename = "B")]
    pub b: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<usize>,
    pub chain_length: Option<usize>,
    pub class: ShapeClass,
    pub role: Option<FlowchartRole>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShapesReport {
    pub shapes: Vec<ShapeEntry>,
    pub vector: FeatureVector,
    pub activity_count: u32,
}

impl ShapesReport {
    pub fn from_analysis(a: &FigureAnalysis) -> Self {
        let shapes = a
            .shapes
            .iter()
            .map(|s| {
                let m = s.measurement.as_ref();
                ShapeEntry {
                    label: s.label,
                    centroid: m.map(|m| m.centroid),
                    a: m.map(|m| m.max_radius),
                    b: m.map(|m| m.min_radius),
                    c: m.map(|m| m.area),
                    chain_length: m.map(|m| m.boundary.len()),
                    class: s.class,
                    role: role_of(s.class).ok(),
                }
            })
            .collect();
        Self {
            shapes,
            vector: a.vector,
            activity_count: a.vector.total(),
        }
    }
}

/// Writes every intermediate image of the pipeline as PGM.
pub fn dump_stages(a: &FigureAnalysis, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let stages = [
        ("binary", &a.binary),
        ("thinned", &a.stages.thinned),
        ("strokes_removed", &a.stages.strokes_removed),
        ("cleaned", &a.stages.cleaned),
    ];
    let mut written = Vec::new();
    for (name, img) in stages {
        let path = dir.join(format!("{name}.pgm"));
        write_pgm(&path, &GrayImage::from_binary(img))?;
        written.push(path);
    }
    Ok(written)
}
