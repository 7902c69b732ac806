//! The `flowsim` command line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use flowsim_core::synth::CorpusConfig;
use flowsim_core::{
    ClassifierConfig, PipelineConfig, PreprocessConfig, SearchConfig, ThresholdMode,
};
use serde_json::json;

use crate::codec::read_image;
use crate::error::{exit, Error, Result};
use crate::query::{query, rank_curve_csv};
use crate::shapes::{dump_stages, ShapesReport};
use crate::store::{analyze_file, index_directory, load_index, save_index, IndexOptions};
use crate::synthio::{render_layout_file, write_corpus};

#[derive(Debug, Parser)]
#[command(
    name = "flowsim",
    version,
    about = "Find copied flowchart figures by their shape counts"
)]
pub struct Cli {
    /// Timing and progress on standard error.
    #[arg(long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a metadata index from a directory of figures.
    Index(IndexArgs),
    /// Rank indexed figures against a query figure.
    Query(QueryArgs),
    /// Show the shapes found in one figure.
    Shapes(ShapesArgs),
    /// Render synthetic flowcharts with ground truth.
    Synth(SynthArgs),
    /// Turn a JSON query report into rank,similarity plot data.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct PipelineArgs {
    /// Otsu binarization (the default).
    #[arg(long, conflicts_with = "fixed_threshold")]
    pub otsu: bool,
    /// Pixels darker than T are ink.
    #[arg(long, value_name = "T", value_parser = clap::value_parser!(u32).range(0..=255))]
    pub fixed_threshold: Option<u32>,
    /// Components up to this many pixels are treated as text.
    #[arg(long, value_name = "N", default_value_t = PreprocessConfig::default().text_area_max)]
    pub text_area_max: usize,
    /// Input is light ink on a dark background.
    #[arg(long)]
    pub invert: bool,
    /// Skip thinning (input is already a skeleton).
    #[arg(long)]
    pub no_thin: bool,
    /// Binarize with Canny edge detection instead of a threshold.
    #[arg(long)]
    pub from_edges: bool,
    /// Classify with the first matching test of the cascade; `false` picks
    /// the ratio closest to 1 instead.
    #[arg(long, value_name = "BOOL", action = ArgAction::Set, default_value_t = ClassifierConfig::default().strict_order)]
    pub strict_order: bool,
}

impl PipelineArgs {
    pub fn config(&self) -> PipelineConfig {
        let d = PipelineConfig::default();
        PipelineConfig {
            threshold: self
                .fixed_threshold
                .map_or(ThresholdMode::Otsu, ThresholdMode::Fixed),
            invert: self.invert,
            from_edges: self.from_edges,
            preprocess: PreprocessConfig {
                text_area_max: self.text_area_max,
                thin: !self.no_thin,
                ..d.preprocess
            },
            classifier: ClassifierConfig {
                strict_order: self.strict_order,
                ..d.classifier
            },
            ..d
        }
    }
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[arg(long, value_name = "DIR")]
    pub figures: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Also store each preprocessed figure here as `<id>.pgm`.
    #[arg(long, value_name = "DIR")]
    pub preprocessed_dir: Option<PathBuf>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long, value_name = "FILE")]
    pub index: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub image: PathBuf,
    #[arg(long, value_name = "N")]
    pub top_k: Option<usize>,
    /// Only matches strictly above this similarity are reported.
    #[arg(long, value_name = "X", default_value_t = SearchConfig::default().threshold)]
    pub threshold: f64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Debug, Args)]
pub struct ShapesArgs {
    #[arg(long, value_name = "FILE")]
    pub image: PathBuf,
    /// Write binary, thinned, strokes_removed and cleaned stage images here.
    #[arg(long, value_name = "DIR")]
    pub dump_stages: Option<PathBuf>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, required_unless_present = "spec", conflicts_with = "spec")]
    pub seed: Option<u64>,
    #[arg(long, required_unless_present = "spec", conflicts_with = "spec")]
    pub count: Option<usize>,
    /// Render one layout JSON file; `--out` is then the image file.
    #[arg(long, value_name = "FILE")]
    pub spec: Option<PathBuf>,
    /// Output directory, or output image with `--spec`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = CorpusConfig::default().min_nodes)]
    pub min_nodes: u32,
    #[arg(long, default_value_t = CorpusConfig::default().max_nodes)]
    pub max_nodes: u32,
    #[arg(long, default_value_t = CorpusConfig::default().stroke_width)]
    pub stroke_width: f64,
    /// Allow rectangle and rhombus proportions the classifier confuses.
    #[arg(long)]
    pub unsafe_shapes: bool,
    #[arg(long)]
    pub no_text: bool,
    #[arg(long)]
    pub no_edges: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// JSON written by `query --format json`.
    #[arg(long, value_name = "FILE")]
    pub results: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

/// Parses `args` (including the program name) and runs the command.
/// Machine output goes to `out`, diagnostics to `err`; returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().ansi().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                exit::USAGE
            } else {
                let _ = write!(out, "{text}");
                exit::SUCCESS
            };
        }
    };
    let started = Instant::now();
    let status = match dispatch(&cli, out, err) {
        Ok(()) => exit::SUCCESS,
        Err(e) => {
            let _ = writeln!(err, "flowsim: error: {e}");
            e.exit_code()
        }
    };
    if cli.verbose {
        let _ = writeln!(
            err,
            "flowsim: finished in {:.3} s",
            started.elapsed().as_secs_f64()
        );
    }
    status
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .and_then(|()| out.flush())
        .map_err(|e| Error::io("<stdout>", e))
}

fn emit_json(out: &mut dyn Write, value: &impl serde::Serialize) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    emit(out, &s)
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Index(a) => {
            let opts = IndexOptions {
                pipeline: a.pipeline.config(),
                preprocessed_dir: a.preprocessed_dir.clone(),
            };
            let db = index_directory(&a.figures, &opts)?;
            save_index(&db, &a.out)?;
            let empty = db.records().iter().filter(|r| r.vector.is_zero()).count();
            if empty > 0 {
                let _ = writeln!(
                    err,
                    "flowsim: warning: {empty} figure(s) have no recognised shapes"
                );
            }
            emit_json(out, &json!({ "figures": db.len(), "index": a.out }))
        }
        Command::Query(a) => {
            let cfg = SearchConfig {
                threshold: a.threshold,
                top_k: a.top_k,
            };
            cfg.validate()?;
            let pipeline = a.pipeline.config();
            pipeline.validate()?;
            let db = load_index(&a.index)?;
            let image = read_image(&a.image)?;
            let report = query(&db, &image, &pipeline, &cfg)?;
            if report.is_empty_query() {
                let _ = writeln!(
                    err,
                    "flowsim: warning: empty query, no shapes recognised in {}",
                    a.image.display()
                );
            }
            match a.format {
                OutputFormat::Json => emit(out, &report.to_json()),
                OutputFormat::Csv => emit(out, &report.to_csv()),
            }
        }
        Command::Shapes(a) => {
            let pipeline = a.pipeline.config();
            pipeline.validate()?;
            let analysis = analyze_file(&a.image, &pipeline)?;
            if let Some(dir) = &a.dump_stages {
                for p in dump_stages(&analysis, dir)? {
                    if cli.verbose {
                        let _ = writeln!(err, "flowsim: wrote {}", p.display());
                    }
                }
            }
            emit_json(out, &ShapesReport::from_analysis(&analysis))
        }
        Command::Synth(a) => {
            if let Some(spec) = &a.spec {
                #[derive(serde::Serialize)]
                struct Rendered<'a> {
                    image: &'a std::path::Path,
                    vector: flowsim_core::FeatureVector,
                    activity_count: u32,
                }
                let truth = render_layout_file(spec, &a.out)?;
                return emit_json(
                    out,
                    &Rendered {
                        image: &a.out,
                        vector: truth.vector,
                        activity_count: truth.activity_count,
                    },
                );
            }
            let (seed, count) = (
                a.seed.expect("required by clap"),
                a.count.expect("required by clap"),
            );
            if count == 0 || a.min_nodes == 0 || a.min_nodes > a.max_nodes {
                return Err(flowsim_core::Error::InvalidConfig(
                    "need count >= 1 and 1 <= min-nodes <= max-nodes".into(),
                )
                .into());
            }
            let cfg = CorpusConfig {
                min_nodes: a.min_nodes,
                max_nodes: a.max_nodes,
                safe_shapes: !a.unsafe_shapes,
                with_text: !a.no_text,
                with_edges: !a.no_edges,
                stroke_width: a.stroke_width,
            };
            let written = write_corpus(seed, count, &cfg, &a.out)?;
            emit_json(out, &json!({ "figures": written.len(), "out": a.out }))
        }
        Command::Report(a) => {
            let text = fs::read_to_string(&a.results).map_err(|e| Error::io(&a.results, e))?;
            let csv = rank_curve_csv(&text)?;
            fs::write(&a.out, csv).map_err(|e| Error::io(&a.out, e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn defaults_match_library_defaults() {
        let cli = Cli::try_parse_from(["flowsim", "shapes", "--image", "x.pgm"]).unwrap();
        let Command::Shapes(a) = cli.command else {
            panic!()
        };
        assert_eq!(a.pipeline.config(), PipelineConfig::default());

        let cli =
            Cli::try_parse_from(["flowsim", "query", "--index", "i", "--image", "q"]).unwrap();
        let Command::Query(a) = cli.command else {
            panic!()
        };
        assert_eq!(a.threshold, SearchConfig::default().threshold);
        assert_eq!(a.top_k, None);
        assert_eq!(a.format, OutputFormat::Json);
    }

    #[test]
    fn threshold_flags() {
        let parse = |extra: &[&str]| {
            let mut args = vec!["flowsim", "shapes", "--image", "x"];
            args.extend_from_slice(extra);
            Cli::try_parse_from(args)
        };
        let Command::Shapes(a) = parse(&["--fixed-threshold", "100"]).unwrap().command else {
            panic!()
        };
        assert_eq!(a.pipeline.config().threshold, ThresholdMode::Fixed(100));
        assert!(parse(&["--otsu", "--fixed-threshold", "100"]).is_err());
        assert!(parse(&["--fixed-threshold", "256"]).is_err());
        let Command::Shapes(a) = parse(&["--strict-order", "false", "--no-thin"])
            .unwrap()
            .command
        else {
            panic!()
        };
        let cfg = a.pipeline.config();
        assert!(!cfg.classifier.strict_order);
        assert!(!cfg.preprocess.thin);
    }

    #[test]
    fn usage_errors_exit_1() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(
            run(
                ["flowsim", "query", "--index", "i.jsonl"],
                &mut out,
                &mut err
            ),
            exit::USAGE
        );
        assert!(String::from_utf8(err).unwrap().contains("--image"));
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(
            run(["flowsim", "--help"], &mut out, &mut err),
            exit::SUCCESS
        );
        assert!(!out.is_empty());
    }
}
