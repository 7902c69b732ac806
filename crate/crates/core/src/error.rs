use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid image dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },
    #[error("pixel buffer has {actual} entries, expected {expected}")]
    BufferSize { expected: usize, actual: usize },
    #[error("invalid threshold {0}, expected 0..=255")]
    InvalidThreshold(u32),
    #[error("input is not thinned: 2x2 foreground block at ({x}, {y})")]
    NotThinned { x: usize, y: usize },
    #[error("shape with {pixels} pixels is too small to measure")]
    DegenerateShape { pixels: usize },
    #[error("degenerate measurement: A = {a}, B = {b}")]
    DegenerateMeasurement { a: f64, b: f64 },
    #[error("outline of component {label} is not closed")]
    NotClosed { label: u32 },
    #[error("shape has no flowchart role")]
    UnclassifiedShape,
    #[error("figure {0} not found")]
    NotFound(u32),
    #[error("figure id {0} already present")]
    DuplicateId(u32),
    #[error("invalid layout: {0}")]
    LayoutInvalid(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
