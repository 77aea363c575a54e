//! Rice-grain variety classification from images.
//!
//! The pipeline runs in five stages, each in its own module:
//!
//! 1. [`raster`]: decode an image to 8-bit intensities and remove impulse
//!    noise with a median filter.
//! 2. [`segment`]: pick a global Otsu threshold, binarize, and label the
//!    8-connected grains.
//! 3. [`morphology`]: measure area, equivalent-ellipse axes, eccentricity and
//!    contour perimeter of every grain.
//! 4. [`pca`]: reduce the five features with an explicit covariance
//!    eigendecomposition.
//! 5. [`classify`]: K-NN in principal-component space, with per-sample
//!    majority voting and accuracy tables.
//!
//! [`synth`] renders grain scenes with analytic ground truth for testing.

pub mod classify;
pub mod error;
pub mod linalg;
pub mod morphology;
pub mod pca;
pub mod pipeline;
pub mod raster;
pub mod segment;
pub mod synth;

pub use classify::{AccuracyTable, ReferenceModel, Sample, SampleReport};
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use morphology::{CentralMoments, GrainFeatures};
pub use pca::{ComponentSelection, DataMatrix, PcaModel};
pub use pipeline::{PipelineConfig, SegmentedImage};
pub use raster::GrayImage;
pub use segment::{BinaryImage, LabelMap, Region};
pub use synth::{GrainSpec, SceneSpec};
