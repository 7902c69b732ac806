//! Flowchart figure recognition and retrieval.
//!
//! The crate turns a binarized flowchart figure into a four-count feature
//! vector (connector, start/stop, decision, process) and ranks a metadata
//! database of such vectors against a query with cosine similarity.
//!
//! Everything here is a pure function over in-memory images and vectors, so
//! the crate is `no_std` and only needs `alloc`. Image codecs, the on-disk
//! index format and the command-line tool live in the `flowsim` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod classify;
pub mod contour;
mod error;
pub mod index;
pub mod pipeline;
pub mod preprocess;
pub mod raster;
pub mod search;
pub mod synth;

pub use classify::{ClassifierConfig, FeatureVector, FlowchartRole, ShapeClass, ShapeRatios};
pub use contour::{CannyConfig, ChainCode, ShapeMeasurement};
pub use error::Error;
pub use index::{FigureRecord, MetadataDatabase};
pub use pipeline::PipelineConfig;
pub use preprocess::{PreprocessConfig, PreprocessReport};
pub use raster::{BinaryImage, ConnectedComponent, Connectivity, GrayImage, ThresholdMode};
pub use search::{QueryVector, RankedMatch, SearchConfig};

pub type Result<T, E = Error> = core::result::Result<T, E>;
