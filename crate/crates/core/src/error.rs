use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Top-level error for the whole pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Segment(#[from] SegmentError),
    #[error(transparent)]
    Morphology(#[from] MorphologyError),
    #[error(transparent)]
    Pca(#[from] PcaError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

impl Error {
    /// True when the error signals a broken internal invariant rather than
    /// bad input.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            Error::Pca(PcaError::NoConvergence { .. })
                | Error::Classify(ClassifyError::Pca(PcaError::NoConvergence { .. }))
        )
    }
}

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("unsupported image format: {}", .0.display())]
    UnsupportedFormat(PathBuf),
    #[error("corrupt image {}: {reason}", path.display())]
    CorruptImage { path: PathBuf, reason: String },
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid image dimensions {width}x{height} for {len} samples")]
    BadDimensions { width: usize, height: usize, len: usize },
    #[error("median window {window} must be odd, non-zero and at most {limit}")]
    BadWindow { window: usize, limit: usize },
}

#[derive(Debug, Error)]
pub enum SegmentError {
    #[error("image has a single intensity level ({0}); no threshold separates it")]
    NoContrast(u8),
    #[error("mask length {len} does not match {width}x{height}")]
    BadDimensions { width: usize, height: usize, len: usize },
}

#[derive(Debug, Error)]
pub enum MorphologyError {
    #[error("region has no pixels")]
    EmptyRegion,
    #[error("degenerate ellipse axes: major {major}, minor {minor}")]
    DegenerateAxes { major: f64, minor: f64 },
    #[error("region {label} does not match the label map")]
    LabelMismatch { label: u32 },
}

#[derive(Debug, Error)]
pub enum PcaError {
    #[error("data matrix must be at least 1x1, got {rows}x{cols}")]
    Empty { rows: usize, cols: usize },
    #[error("data matrix contains a non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("matrix is not symmetric: |C[{row},{col}] - C[{col},{row}]| = {gap:e}")]
    NotSymmetric { row: usize, col: usize, gap: f64 },
    #[error("Jacobi iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("cannot retain {k} components out of {dims}")]
    BadK { k: usize, dims: usize },
    #[error("variance ratio {0} must lie in (0, 1]")]
    BadVarianceRatio(f64),
    #[error("need at least 2 observations, got {0}")]
    TooFewObservations(usize),
    #[error("invalid model document: {0}")]
    InvalidModel(String),
}

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("need at least 2 varieties, got {0}")]
    TooFewVarieties(usize),
    #[error("need at least {needed} grains, got {available}")]
    TooFewGrains { needed: usize, available: usize },
    #[error("k_neighbors must be a positive odd integer, got {0}")]
    BadNeighbors(usize),
    #[error("sample {0} has no grains")]
    EmptySample(String),
    #[error("test set is empty")]
    EmptyTestSet,
    #[error("invalid reference model: {0}")]
    InvalidModel(String),
    #[error(transparent)]
    Pca(#[from] PcaError),
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("grain {index} does not fit inside the {width}x{height} scene")]
    GrainOutOfBounds { index: usize, width: usize, height: usize },
    #[error("grains {first} and {second} overlap or touch")]
    GrainsOverlap { first: usize, second: usize },
    #[error("invalid grain {index}: {reason}")]
    BadGrain { index: usize, reason: String },
    #[error("noise density {0} must lie in [0, 1)")]
    BadDensity(f64),
    #[error("could not place {requested} grains without overlap (placed {placed})")]
    Crowded { requested: usize, placed: usize },
}
