//! Image-to-features composition: denoise, threshold, label, measure.

use crate::error::Result;
use crate::error::SegmentError;
use crate::morphology::{extract_features, GrainFeatures};
use crate::raster::{median_filter, GrayImage};
use crate::segment::{
    binarize, label_components_with, otsu_threshold, LabelMap, LabelOptions, Region, DEFAULT_MIN_AREA,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineConfig {
    pub median_window: usize,
    pub min_area: usize,
    pub exclude_border: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            median_window: 3,
            min_area: DEFAULT_MIN_AREA,
            exclude_border: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SegmentedImage {
    /// `None` when the filtered image has a single intensity level.
    pub threshold: Option<u8>,
    pub labels: LabelMap,
    pub regions: Vec<Region>,
}

/// Median filter, Otsu threshold and component labeling. A featureless
/// image (one intensity level after filtering) segments to zero grains.
pub fn segment_image(img: &GrayImage, cfg: &PipelineConfig) -> Result<SegmentedImage> {
    let smoothed = median_filter(img, cfg.median_window)?;
    let threshold = match otsu_threshold(&smoothed) {
        Ok(t) => Some(t),
        Err(SegmentError::NoContrast(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let mask = binarize(&smoothed, threshold.unwrap_or(u8::MAX));
    let (labels, regions) = label_components_with(
        &mask,
        LabelOptions {
            min_area: cfg.min_area,
            exclude_border: cfg.exclude_border,
        },
    );
    Ok(SegmentedImage {
        threshold,
        labels,
        regions,
    })
}

impl SegmentedImage {
    /// One feature row per region, in label order.
    pub fn features(&self) -> Result<Vec<GrainFeatures>> {
        self.regions
            .iter()
            .map(|r| extract_features(r, &self.labels).map_err(Into::into))
            .collect()
    }
}

pub fn image_features(img: &GrayImage, cfg: &PipelineConfig) -> Result<Vec<GrainFeatures>> {
    segment_image(img, cfg)?.features()
}
