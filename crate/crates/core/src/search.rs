//! Cosine-similarity retrieval over the metadata database.

use alloc::vec::Vec;

use crate::classify::FeatureVector;
use crate::index::MetadataDatabase;
use crate::{Error, Result};

/// A query figure's feature vector with its node count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QueryVector {
    pub vector: FeatureVector,
    pub activity_count: u32,
}

impl QueryVector {
    pub fn new(vector: FeatureVector) -> Self {
        Self {
            vector,
            activity_count: vector.total(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.activity_count == 0
    }
}

impl From<FeatureVector> for QueryVector {
    fn from(v: FeatureVector) -> Self {
        Self::new(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RankedMatch {
    pub figure_id: u32,
    /// In `[0, 1]`.
    pub similarity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SearchConfig {
    /// Matches must score strictly above this.
    pub threshold: f64,
    pub top_k: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            threshold: 0.3,
            top_k: None,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::InvalidConfig("threshold must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// `q . d / (|q| |d|)` over the four role counts, 0 if either vector is zero.
///
/// The norm product is taken as `sqrt(|q|^2 |d|^2)` on exact integers, so
/// parallel vectors score exactly 1.
pub fn cosine_similarity(q: &FeatureVector, d: &FeatureVector) -> f64 {
    let (q, d) = (q.to_array(), d.to_array());
    let dot: u64 = q.iter().zip(&d).map(|(&a, &b)| a as u64 * b as u64).sum();
    let nq: u64 = q.iter().map(|&a| a as u64 * a as u64).sum();
    let nd: u64 = d.iter().map(|&b| b as u64 * b as u64).sum();
    if nq == 0 || nd == 0 {
        return 0.0;
    }
    let norm = libm::sqrt(nq as f64 * nd as f64);
    (dot as f64 / norm).clamp(0.0, 1.0)
}

/// Scores every record, keeps those above the threshold and sorts them by
/// similarity (descending), then figure id (ascending).
pub fn rank(db: &MetadataDatabase, q: &QueryVector, cfg: &SearchConfig) -> Vec<RankedMatch> {
    let mut matches: Vec<RankedMatch> = db
        .records()
        .iter()
        .map(|r| RankedMatch {
            figure_id: r.figure_id,
            similarity: cosine_similarity(&q.vector, &r.vector),
        })
        .filter(|m| m.similarity > cfg.threshold)
        .collect();
    matches.sort_by(|a, b| {
        b.similarity
            .total_cmp(&a.similarity)
            .then(a.figure_id.cmp(&b.figure_id))
    });
    if let Some(k) = cfg.top_k {
        matches.truncate(k);
    }
    matches
}

/// 100 times the best similarity, or 0 when nothing matched.
pub fn plagiarism_percentage(matches: &[RankedMatch]) -> f64 {
    matches.iter().map(|m| m.similarity).fold(0.0, f64::max) * 100.0
}
