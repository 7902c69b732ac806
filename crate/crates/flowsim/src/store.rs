//! The figure store and the on-disk metadata index.
//!
//! The index is JSON lines, one record per line in ascending id order:
//!
//! ```text
//! {"figure_id":1,"connector":1,"start_stop":2,"decision":0,"process":4,"source_path":"figures/0001.pgm","preprocessed_path":null}
//! ```
//!
//! Preprocessed figures are written as `<id>.pgm` (ids zero-padded to four
//! digits) into a separate directory.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use flowsim_core::pipeline::{analyze, FigureAnalysis};
use flowsim_core::{FeatureVector, FigureRecord, GrayImage, MetadataDatabase, PipelineConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{read_image, write_pgm};
use crate::error::{Error, Result};

#[derive(Serialize)]
struct LineOut<'a> {
    figure_id: u32,
    connector: u32,
    start_stop: u32,
    decision: u32,
    process: u32,
    source_path: &'a str,
    preprocessed_path: Option<&'a str>,
}

// Wide signed fields so negative or oversized counts get a precise message.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LineIn {
    figure_id: i64,
    connector: i64,
    start_stop: i64,
    decision: i64,
    process: i64,
    source_path: String,
    preprocessed_path: Option<String>,
}

pub fn write_index<W: Write>(db: &MetadataDatabase, mut out: W) -> io::Result<()> {
    for r in db.records() {
        let v = &r.vector;
        let line = LineOut {
            figure_id: r.figure_id,
            connector: v.connector,
            start_stop: v.start_stop,
            decision: v.decision,
            process: v.process,
            source_path: &r.source_path,
            preprocessed_path: r.preprocessed_path.as_deref(),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn save_index(db: &MetadataDatabase, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_index(db, &mut buf).map_err(|e| Error::io(path, e))?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Parses index text. Blank lines are ignored; line numbers in errors are
/// 1-based.
pub fn parse_index(text: &str) -> Result<MetadataDatabase> {
    let mut db = MetadataDatabase::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let bad = |message: String| Error::MalformedIndex { line, message };
        if raw.trim().is_empty() {
            continue;
        }
        let rec: LineIn = serde_json::from_str(raw).map_err(|e| bad(e.to_string()))?;
        let count = |name: &str, v: i64| {
            u32::try_from(v).map_err(|_| {
                if v < 0 {
                    bad(format!("negative count {v} for {name}"))
                } else {
                    bad(format!("count {v} for {name} is too large"))
                }
            })
        };
        let vector = FeatureVector::new(
            count("connector", rec.connector)?,
            count("start_stop", rec.start_stop)?,
            count("decision", rec.decision)?,
            count("process", rec.process)?,
        );
        let figure_id = u32::try_from(rec.figure_id)
            .ok()
            .filter(|&id| id > 0)
            .ok_or_else(|| {
                bad(format!(
                    "figure_id {} is not a positive integer",
                    rec.figure_id
                ))
            })?;
        if db.get(figure_id).is_ok() {
            return Err(bad(format!("duplicate figure_id {figure_id}")));
        }
        let previous = db.records().last().map(|r| r.figure_id);
        db.push(FigureRecord {
            figure_id,
            source_path: rec.source_path,
            preprocessed_path: rec.preprocessed_path,
            vector,
        })
        .map_err(|_| {
            bad(format!(
                "figure_id {figure_id} is out of order (previous {})",
                previous.unwrap_or_default()
            ))
        })?;
    }
    Ok(db)
}

pub fn load_index(path: &Path) -> Result<MetadataDatabase> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_index(&text)
}

pub fn figure_file_name(id: u32) -> String {
    format!("{id:04}.pgm")
}

#[derive(Debug, Clone, Default)]
pub struct IndexOptions {
    pub pipeline: PipelineConfig,
    /// Where preprocessed figures are stored; not stored when `None`.
    pub preprocessed_dir: Option<PathBuf>,
}

/// Image files (`.pgm`, `.png`) directly inside `dir`, sorted by file name.
pub fn list_figures(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("pgm") || e.eq_ignore_ascii_case("png"));
        if is_image && path.is_file() {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

pub fn analyze_file(path: &Path, cfg: &PipelineConfig) -> Result<FigureAnalysis> {
    let img = read_image(path)?;
    Ok(analyze(&img, cfg)?)
}

fn store_preprocessed(dir: &Path, id: u32, analysis: &FigureAnalysis) -> Result<String> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(figure_file_name(id));
    write_pgm(&path, &GrayImage::from_binary(analysis.preprocessed()))?;
    Ok(path.to_string_lossy().into_owned())
}

fn commit(
    db: &mut MetadataDatabase,
    source: &Path,
    analysis: &FigureAnalysis,
    opts: &IndexOptions,
) -> Result<FigureRecord> {
    let id = db.next_id();
    let preprocessed_path = match &opts.preprocessed_dir {
        Some(dir) => Some(store_preprocessed(dir, id, analysis)?),
        None => None,
    };
    let rec = db.insert(
        source.to_string_lossy().into_owned(),
        preprocessed_path,
        analysis.vector,
    );
    Ok(rec.clone())
}

/// Runs the pipeline on one figure and appends it under the next free id.
pub fn add_figure(
    db: &mut MetadataDatabase,
    source: &Path,
    opts: &IndexOptions,
) -> Result<FigureRecord> {
    let key = source.to_string_lossy();
    if db.contains_source(&key) {
        return Err(Error::DuplicatePath(key.into_owned()));
    }
    let analysis = analyze_file(source, &opts.pipeline)?;
    commit(db, source, &analysis, opts)
}

/// Indexes every figure in `dir`. Figures are analysed in parallel; ids are
/// assigned in file-name order so the result does not depend on scheduling.
pub fn index_directory(dir: &Path, opts: &IndexOptions) -> Result<MetadataDatabase> {
    opts.pipeline.validate()?;
    let files = list_figures(dir)?;
    let analyses: Vec<FigureAnalysis> = files
        .par_iter()
        .map(|f| analyze_file(f, &opts.pipeline))
        .collect::<Result<_>>()?;
    let mut db = MetadataDatabase::new();
    for (file, analysis) in files.iter().zip(&analyses) {
        commit(&mut db, file, analysis, opts)?;
    }
    Ok(db)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: u32, v: [u32; 4]) -> FigureRecord {
        FigureRecord {
            figure_id: id,
            source_path: format!("figures/{}", figure_file_name(id)),
            preprocessed_path: None,
            vector: FeatureVector::from_array(v),
        }
    }

    fn text(db: &MetadataDatabase) -> String {
        let mut buf = Vec::new();
        write_index(db, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_db_is_empty_file() {
        assert_eq!(text(&MetadataDatabase::new()), "");
        assert!(parse_index("").unwrap().is_empty());
    }

    #[test]
    fn line_format() {
        let mut r = rec(1, [1, 2, 0, 4]);
        r.source_path = "a.pgm".into();
        r.preprocessed_path = Some("pre/0001.pgm".into());
        let db = MetadataDatabase::from_records(vec![r]).unwrap();
        assert_eq!(
            text(&db),
            "{\"figure_id\":1,\"connector\":1,\"start_stop\":2,\"decision\":0,\"process\":4,\
             \"source_path\":\"a.pgm\",\"preprocessed_path\":\"pre/0001.pgm\"}\n"
        );
    }

    #[test]
    fn null_preprocessed_path_is_written() {
        let db = MetadataDatabase::from_records(vec![rec(3, [0, 0, 0, 0])]).unwrap();
        assert!(text(&db).ends_with(",\"preprocessed_path\":null}\n"));
    }

    #[test]
    fn round_trip() {
        let db = MetadataDatabase::from_records(vec![
            rec(1, [1, 2, 3, 4]),
            rec(2, [0, 0, 0, 1]),
            rec(7, [5, 0, 0, 0]),
        ])
        .unwrap();
        let t = text(&db);
        let back = parse_index(&t).unwrap();
        assert_eq!(back, db);
        assert_eq!(text(&back), t);
    }

    fn line_of(err: Error) -> usize {
        match err {
            Error::MalformedIndex { line, .. } => line,
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_id_names_the_line() {
        let db = MetadataDatabase::from_records(vec![rec(1, [1, 0, 0, 0]), rec(2, [0, 1, 0, 0])])
            .unwrap();
        let mut t = text(&db);
        t.push_str(t.clone().lines().next().unwrap());
        t.push('\n');
        assert_eq!(line_of(parse_index(&t).unwrap_err()), 3);
    }

    #[test]
    fn negative_count() {
        let t = "{\"figure_id\":1,\"connector\":-1,\"start_stop\":0,\"decision\":0,\"process\":0,\
                 \"source_path\":\"x\",\"preprocessed_path\":null}\n";
        let err = parse_index(t).unwrap_err();
        assert!(err.to_string().contains("negative"), "{err}");
        assert_eq!(line_of(err), 1);
    }

    #[test]
    fn other_malformations() {
        let good = "{\"figure_id\":1,\"connector\":0,\"start_stop\":0,\"decision\":0,\"process\":0,\"source_path\":\"x\",\"preprocessed_path\":null}";
        assert_eq!(
            line_of(parse_index(&format!("{good}\nnot json\n")).unwrap_err()),
            2
        );
        assert_eq!(
            line_of(parse_index(&good.replace("\"figure_id\":1", "\"figure_id\":0")).unwrap_err()),
            1
        );
        assert_eq!(
            line_of(parse_index(&good.replace(",\"process\":0", "")).unwrap_err()),
            1
        );
        assert_eq!(
            line_of(parse_index(&good.replace("null}", "null,\"extra\":1}")).unwrap_err()),
            1
        );
        let second = good.replace("\"figure_id\":1", "\"figure_id\":5");
        let first = good.replace("\"figure_id\":1", "\"figure_id\":9");
        assert_eq!(
            line_of(parse_index(&format!("{first}\n{second}\n")).unwrap_err()),
            2
        );
    }

    #[test]
    fn blank_lines_and_crlf_tolerated() {
        let good = "{\"figure_id\":1,\"connector\":0,\"start_stop\":0,\"decision\":0,\"process\":2,\"source_path\":\"x\",\"preprocessed_path\":null}";
        let db = parse_index(&format!("\n{good}\r\n\n")).unwrap();
        assert_eq!(db.get(1).unwrap().vector.process, 2);
    }

    #[test]
    fn file_names_sort_numerically() {
        assert_eq!(figure_file_name(7), "0007.pgm");
        assert!(figure_file_name(10) > figure_file_name(9));
    }
}
