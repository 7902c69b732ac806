//! In-memory metadata database: one feature vector per indexed figure.
//!
//! Persistence and the on-disk figure store are provided by the `flowsim`
//! crate; this module only owns the records and their invariants.

use alloc::string::String;
use alloc::vec::Vec;

use crate::classify::FeatureVector;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FigureRecord {
    /// Unique, starting at 1.
    pub figure_id: u32,
    pub source_path: String,
    pub preprocessed_path: Option<String>,
    pub vector: FeatureVector,
}

/// Records kept in strictly ascending `figure_id` order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MetadataDatabase {
    records: Vec<FigureRecord>,
}

impl MetadataDatabase {
    pub fn new() -> Self {
        Self::default()
    }

    /// Validates that ids are positive and strictly ascending.
    pub fn from_records(records: Vec<FigureRecord>) -> Result<Self> {
        let mut db = Self::new();
        for r in records {
            db.push(r)?;
        }
        Ok(db)
    }

    pub fn records(&self) -> &[FigureRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Id the next inserted figure receives: max id + 1, or 1 when empty.
    pub fn next_id(&self) -> u32 {
        self.records.last().map_or(1, |r| r.figure_id + 1)
    }

    /// Appends a record whose id must exceed every existing id.
    pub fn push(&mut self, record: FigureRecord) -> Result<()> {
        if record.figure_id == 0 {
            return Err(Error::InvalidConfig("figure ids start at 1".into()));
        }
        if let Some(last) = self.records.last() {
            if record.figure_id <= last.figure_id {
                return Err(Error::DuplicateId(record.figure_id));
            }
        }
        self.records.push(record);
        Ok(())
    }

    /// Adds a figure under the next free id and returns its record.
    pub fn insert(
        &mut self,
        source_path: String,
        preprocessed_path: Option<String>,
        vector: FeatureVector,
    ) -> &FigureRecord {
        let figure_id = self.next_id();
        self.records.push(FigureRecord {
            figure_id,
            source_path,
            preprocessed_path,
            vector,
        });
        self.records.last().expect("just pushed")
    }

    pub fn get(&self, id: u32) -> Result<&FigureRecord> {
        self.records
            .binary_search_by_key(&id, |r| r.figure_id)
            .map(|i| &self.records[i])
            .map_err(|_| Error::NotFound(id))
    }

    pub fn contains_source(&self, source_path: &str) -> bool {
        self.records.iter().any(|r| r.source_path == source_path)
    }
}

/// Looks up a figure by id.
pub fn get_figure(db: &MetadataDatabase, id: u32) -> Result<&FigureRecord> {
    db.get(id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn ids_are_assigned_in_insertion_order() {
        let mut db = MetadataDatabase::new();
        assert_eq!(db.next_id(), 1);
        let id1 = db
            .insert("a.pgm".into(), None, FeatureVector::new(1, 0, 0, 0))
            .figure_id;
        let id2 = db
            .insert("b.pgm".into(), None, FeatureVector::new(0, 1, 0, 0))
            .figure_id;
        assert_eq!((id1, id2), (1, 2));
        assert!(db.contains_source("a.pgm"));
    }

    #[test]
    fn lookup() {
        let mut db = MetadataDatabase::new();
        db.insert(
            "a.pgm".into(),
            Some("p/1.pgm".into()),
            FeatureVector::new(1, 2, 0, 4),
        );
        assert_eq!(get_figure(&db, 1).unwrap().source_path, "a.pgm");
        assert_eq!(get_figure(&db, 2), Err(Error::NotFound(2)));
        assert_eq!(get_figure(&db, 0), Err(Error::NotFound(0)));
    }

    #[test]
    fn from_records_rejects_duplicates_and_disorder() {
        let rec = |id: u32| FigureRecord {
            figure_id: id,
            source_path: id.to_string(),
            preprocessed_path: None,
            vector: FeatureVector::default(),
        };
        assert!(MetadataDatabase::from_records(alloc::vec![rec(1), rec(3)]).is_ok());
        assert_eq!(
            MetadataDatabase::from_records(alloc::vec![rec(1), rec(1)]),
            Err(Error::DuplicateId(1))
        );
        assert!(MetadataDatabase::from_records(alloc::vec![rec(2), rec(1)]).is_err());
        assert!(MetadataDatabase::from_records(alloc::vec![rec(0)]).is_err());
    }
}
