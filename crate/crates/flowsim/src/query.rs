//! Query-by-example reports and their JSON/CSV forms.

use flowsim_core::pipeline::build_query_vector;
use flowsim_core::search::{plagiarism_percentage, rank};
use flowsim_core::{
    FeatureVector, GrayImage, MetadataDatabase, PipelineConfig, QueryVector, SearchConfig,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchEntry {
    pub figure_id: u32,
    pub similarity: f64,
    pub source_path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryReport {
    pub query_vector: FeatureVector,
    pub activity_count: u32,
    pub matches: Vec<MatchEntry>,
    pub plagiarism_percentage: f64,
}

impl QueryReport {
    /// Query vector built from a figure with no recognisable shapes.
    pub fn is_empty_query(&self) -> bool {
        self.activity_count == 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// `rank,similarity,figure_id,source_path`, one row per match.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(["rank", "similarity", "figure_id", "source_path"])
            .expect("in-memory write");
        for (i, m) in self.matches.iter().enumerate() {
            w.write_record([
                (i + 1).to_string(),
                m.similarity.to_string(),
                m.figure_id.to_string(),
                m.source_path.clone(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

/// Ranks the database against an already built query vector. The images
/// behind the database are never read.
pub fn search(db: &MetadataDatabase, q: &QueryVector, cfg: &SearchConfig) -> Result<QueryReport> {
    cfg.validate()?;
    let ranked = rank(db, q, cfg);
    let matches = ranked
        .iter()
        .map(|m| {
            Ok(MatchEntry {
                figure_id: m.figure_id,
                similarity: m.similarity,
                source_path: db.get(m.figure_id)?.source_path.clone(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(QueryReport {
        query_vector: q.vector,
        activity_count: q.activity_count,
        matches,
        plagiarism_percentage: plagiarism_percentage(&ranked),
    })
}

pub fn query(
    db: &MetadataDatabase,
    image: &GrayImage,
    pipeline: &PipelineConfig,
    cfg: &SearchConfig,
) -> Result<QueryReport> {
    let q = build_query_vector(image, pipeline)?;
    search(db, &q, cfg)
}

#[derive(Deserialize)]
struct ReportMatch {
    similarity: f64,
}

#[derive(Deserialize)]
struct ReportIn {
    matches: Vec<ReportMatch>,
}

/// Turns a JSON query report into plot data: a `rank,similarity` CSV.
pub fn rank_curve_csv(report_json: &str) -> Result<String> {
    let report: ReportIn =
        serde_json::from_str(report_json).map_err(|e| Error::MalformedReport(e.to_string()))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| Error::MalformedReport(e.to_string());
    w.write_record(["rank", "similarity"]).map_err(io)?;
    for (i, m) in report.matches.iter().enumerate() {
        if !(0.0..=1.0).contains(&m.similarity) {
            return Err(Error::MalformedReport(format!(
                "similarity {} outside [0, 1]",
                m.similarity
            )));
        }
        w.write_record([(i + 1).to_string(), m.similarity.to_string()])
            .map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::MalformedReport(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii output"))
}
