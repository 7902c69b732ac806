//! The full figure pipeline shared by indexing and querying, so a query and
//! the database entries are always processed identically.

use alloc::vec::Vec;

use crate::classify::{extract_feature_vector, ClassifierConfig, FeatureVector, ShapeRecord};
use crate::contour::{canny_edges, CannyConfig};
use crate::preprocess::{preprocess_stages, PreprocessConfig, PreprocessStages};
use crate::raster::{binarize, BinaryImage, GrayImage, ThresholdMode};
use crate::search::QueryVector;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PipelineConfig {
    pub threshold: ThresholdMode,
    /// Treat light ink on a dark background by inverting first.
    pub invert: bool,
    /// Build the binary image from Canny edges of the grayscale input
    /// instead of thresholding it.
    pub from_edges: bool,
    pub canny: CannyConfig,
    pub preprocess: PreprocessConfig,
    pub classifier: ClassifierConfig,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.preprocess.validate()?;
        self.classifier.validate()?;
        if self.from_edges {
            self.canny.validate()?;
        }
        Ok(())
    }
}

/// Everything the pipeline produced for one figure.
#[derive(Debug, Clone)]
pub struct FigureAnalysis {
    pub binary: BinaryImage,
    pub stages: PreprocessStages,
    pub vector: FeatureVector,
    pub shapes: Vec<ShapeRecord>,
}

impl FigureAnalysis {
    /// The cleaned, outlines-only image.
    pub fn preprocessed(&self) -> &BinaryImage {
        &self.stages.cleaned
    }
}

/// Grayscale to binary, by threshold or by edge detection.
pub fn to_binary(img: &GrayImage, cfg: &PipelineConfig) -> Result<BinaryImage> {
    let inverted;
    let img = if cfg.invert {
        inverted = img.inverted();
        &inverted
    } else {
        img
    };
    if cfg.from_edges {
        canny_edges(img, &cfg.canny)
    } else {
        binarize(img, cfg.threshold)
    }
}

/// binarize -> preprocess -> extract_feature_vector.
pub fn analyze(img: &GrayImage, cfg: &PipelineConfig) -> Result<FigureAnalysis> {
    cfg.validate()?;
    let binary = to_binary(img, cfg)?;
    let stages = preprocess_stages(&binary, &cfg.preprocess)?;
    let (vector, shapes) = extract_feature_vector(&stages.cleaned, &cfg.classifier);
    Ok(FigureAnalysis {
        binary,
        stages,
        vector,
        shapes,
    })
}

/// Query vector of a figure image. A blank figure yields an empty vector,
/// which callers report but need not treat as an error.
pub fn build_query_vector(img: &GrayImage, cfg: &PipelineConfig) -> Result<QueryVector> {
    analyze(img, cfg).map(|a| QueryVector::new(a.vector))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blank_image_gives_empty_query() {
        let img = GrayImage::filled(50, 40, 255).unwrap();
        let q = build_query_vector(&img, &PipelineConfig::default()).unwrap();
        assert!(q.is_empty());
        assert_eq!(q.activity_count, 0);
    }

    #[test]
    fn inversion() {
        let img = GrayImage::filled(5, 5, 0).unwrap();
        let cfg = PipelineConfig {
            invert: true,
            threshold: ThresholdMode::Fixed(128),
            ..Default::default()
        };
        assert!(to_binary(&img, &cfg).unwrap().is_empty());
    }
}
