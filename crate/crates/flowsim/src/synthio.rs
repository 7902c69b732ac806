//! Synthetic corpus files: `<id>.pgm` images with `<id>.truth.json` beside
//! them, and single figures rendered from a layout JSON file.

use std::fs;
use std::path::{Path, PathBuf};

use flowsim_core::synth::{
    generate_corpus, render, CorpusConfig, GroundTruth, Layout, NodeTruth, PixelTag,
};
use flowsim_core::{FeatureVector, GrayImage};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::write_pgm;
use crate::error::{Error, Result};
use crate::store::figure_file_name;

/// Foreground pixel counts by origin.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceSummary {
    pub node_outline: usize,
    pub node_fill: usize,
    pub edge: usize,
    pub text: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthFile {
    pub vector: FeatureVector,
    pub activity_count: u32,
    pub nodes: Vec<NodeTruth>,
    pub provenance: ProvenanceSummary,
}

impl From<&GroundTruth> for TruthFile {
    fn from(t: &GroundTruth) -> Self {
        let mut p = ProvenanceSummary::default();
        for tag in &t.provenance {
            match tag {
                PixelTag::Background => {}
                PixelTag::NodeOutline => p.node_outline += 1,
                PixelTag::NodeFill => p.node_fill += 1,
                PixelTag::Edge => p.edge += 1,
                PixelTag::Text => p.text += 1,
            }
        }
        Self {
            vector: t.vector,
            activity_count: t.vector.total(),
            nodes: t.nodes.clone(),
            provenance: p,
        }
    }
}

/// `fig.pgm` -> `fig.truth.json`.
pub fn truth_path(image_path: &Path) -> PathBuf {
    image_path.with_extension("truth.json")
}

fn write_figure(path: &Path, image: &GrayImage, truth: &GroundTruth) -> Result<()> {
    write_pgm(path, image)?;
    let json = serde_json::to_string_pretty(&TruthFile::from(truth)).expect("truth serializes");
    let tp = truth_path(path);
    fs::write(&tp, json + "\n").map_err(|e| Error::io(tp, e))
}

/// Writes `count` figures numbered from 1 and returns the image paths.
pub fn write_corpus(
    seed: u64,
    count: usize,
    cfg: &CorpusConfig,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let corpus = generate_corpus(seed, count, cfg)?;
    corpus
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            let path = out.join(figure_file_name(i as u32 + 1));
            write_figure(&path, &f.image, &f.truth)?;
            Ok(path)
        })
        .collect()
}

pub fn read_layout(path: &Path) -> Result<Layout> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::MalformedLayout(format!("{}: {e}", path.display())))
}

/// Renders a layout file to `out` (PGM) plus its truth file.
pub fn render_layout_file(spec: &Path, out: &Path) -> Result<TruthFile> {
    let layout = read_layout(spec)?;
    let (image, truth) = render(&layout)?;
    write_figure(out, &image, &truth)?;
    Ok(TruthFile::from(&truth))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_json_schema() {
        let json = r#"{
            "width": 200, "height": 120,
            "nodes": [
                {"role": "process", "center": [50.5, 60.5], "size": [60, 40]},
                {"role": "decision", "center": [150.5, 60.5], "size": [40, 30], "filled": true,
                 "labels": [{"center": [150.5, 60.5], "size": [6, 4]}]}
            ],
            "edges": [{"from": 0, "to": 1, "arrowhead": true}]
        }"#;
        let layout: Layout = serde_json::from_str(json).unwrap();
        assert_eq!(layout.nodes[0].stroke_width, 2.0);
        assert!(!layout.nodes[0].filled);
        assert!(layout.edges[0].waypoints.is_empty());
        let (_, truth) = render(&layout).unwrap();
        let t = TruthFile::from(&truth);
        assert_eq!(t.activity_count, 2);
        assert!(t.provenance.node_fill > 0 && t.provenance.edge > 0 && t.provenance.text > 0);
    }

    #[test]
    fn truth_path_extension() {
        assert_eq!(
            truth_path(Path::new("out/0001.pgm")),
            Path::new("out/0001.truth.json")
        );
    }
}
