//! Per-grain shape features: area, equivalent-ellipse axes, eccentricity
//! and traced contour perimeter.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::MorphologyError;
use crate::segment::{LabelMap, Region};

/// Column names of the feature CSV, in order.
pub const CSV_HEADER: [&str; 6] = ["sno", "area", "major_axis", "minor_axis", "eccentricity", "perimeter"];

/// Names of the five feature dimensions in [`GrainFeatures::to_array`] order.
pub const FEATURE_NAMES: [&str; 5] = ["area", "major_axis", "minor_axis", "eccentricity", "perimeter"];

/// Variance of a unit-width uniform distribution; models a pixel as a square.
const PIXEL_VARIANCE: f64 = 1.0 / 12.0;

/// Normalized second central moments of a region. `x` is the column axis and
/// `y` the row axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentralMoments {
    pub area: usize,
    /// (row, col)
    pub centroid: (f64, f64),
    pub mu_xx: f64,
    pub mu_yy: f64,
    pub mu_xy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrainFeatures {
    pub area: f64,
    pub major_axis: f64,
    pub minor_axis: f64,
    pub eccentricity: f64,
    pub perimeter: f64,
}

impl GrainFeatures {
    pub fn to_array(&self) -> [f64; 5] {
        [
            self.area,
            self.major_axis,
            self.minor_axis,
            self.eccentricity,
            self.perimeter,
        ]
    }

    pub fn from_array(v: [f64; 5]) -> Self {
        Self {
            area: v[0],
            major_axis: v[1],
            minor_axis: v[2],
            eccentricity: v[3],
            perimeter: v[4],
        }
    }
}

pub fn central_moments(region: &Region) -> Result<CentralMoments, MorphologyError> {
    let n = region.pixels.len();
    if n == 0 {
        return Err(MorphologyError::EmptyRegion);
    }
    let nf = n as f64;
    let (sum_r, sum_c) = region
        .pixels
        .iter()
        .fold((0.0, 0.0), |(sr, sc), &(r, c)| (sr + r as f64, sc + c as f64));
    let (row_bar, col_bar) = (sum_r / nf, sum_c / nf);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &(r, c) in &region.pixels {
        let dx = c as f64 - col_bar;
        let dy = r as f64 - row_bar;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    Ok(CentralMoments {
        area: n,
        centroid: (row_bar, col_bar),
        mu_xx: sxx / nf + PIXEL_VARIANCE,
        mu_yy: syy / nf + PIXEL_VARIANCE,
        mu_xy: sxy / nf,
    })
}

/// Full axis lengths of the ellipse with the same second moments:
/// `4·sqrt(λ)` for each eigenvalue `λ` of the 2×2 moment matrix.
pub fn ellipse_axes(m: &CentralMoments) -> (f64, f64) {
    let common = ((m.mu_xx - m.mu_yy).powi(2) + 4.0 * m.mu_xy * m.mu_xy).sqrt();
    let sum = m.mu_xx + m.mu_yy;
    let major = 2.0 * SQRT_2 * (sum + common).sqrt();
    // roundoff can push the smaller eigenvalue a hair below zero
    let minor = 2.0 * SQRT_2 * (sum - common).max(0.0).sqrt();
    (major, minor)
}

/// Ratio of focal distance to major axis: `sqrt(1 − (minor/major)²)`.
pub fn eccentricity_of(major: f64, minor: f64) -> Result<f64, MorphologyError> {
    if !(minor > 0.0 && major >= minor && major.is_finite()) {
        return Err(MorphologyError::DegenerateAxes { major, minor });
    }
    let ratio = minor / major;
    Ok((1.0 - ratio * ratio).max(0.0).sqrt())
}

/// Moore-neighbor directions, clockwise on screen (rows grow downward),
/// starting east.
const MOORE: [(isize, isize); 8] = [(0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1)];
const WEST: usize = 4;

fn direction_of(dr: isize, dc: isize) -> usize {
    MOORE
        .iter()
        .position(|&d| d == (dr, dc))
        .expect("offset is a Moore neighbor")
}

/// Length of the outer contour traced clockwise through the 8-neighborhood,
/// counting 1 per axial step and √2 per diagonal step. A lone pixel has
/// perimeter 4.
pub fn trace_perimeter(region: &Region, parent: &LabelMap) -> Result<f64, MorphologyError> {
    let &(r0, c0) = region.pixels.first().ok_or(MorphologyError::EmptyRegion)?;
    let label = region.label;
    // pixels are kept in raster order, so the first is the topmost-leftmost
    let start = region.pixels.iter().copied().min().unwrap_or((r0, c0));
    if parent.get(start.0, start.1) != label {
        return Err(MorphologyError::LabelMismatch { label });
    }
    let inside = |r: isize, c: isize| parent.get_signed(r, c) == label;
    let start = (start.0 as isize, start.1 as isize);

    // Clockwise scan of the neighbors of `at`, beginning just after the
    // background pixel we arrived from.
    let next_step = |at: (isize, isize), backtrack: usize| -> Option<(usize, usize)> {
        (1..8).map(|i| (backtrack + i) % 8).find_map(|d| {
            let (dr, dc) = MOORE[d];
            inside(at.0 + dr, at.1 + dc).then(|| {
                // the neighbor checked just before `d` is background; re-express
                // it relative to the pixel we move to
                let (pr, pc) = MOORE[(d + 7) % 8];
                (d, direction_of(pr - dr, pc - dc))
            })
        })
    };

    // The start pixel is raster-first, so its west neighbor is background.
    let Some((first_dir, mut backtrack)) = next_step(start, WEST) else {
        return Ok(4.0);
    };
    let step_len = |d: usize| if d.is_multiple_of(2) { 1.0 } else { SQRT_2 };
    let mut length = step_len(first_dir);
    let mut at = (start.0 + MOORE[first_dir].0, start.1 + MOORE[first_dir].1);

    // Each boundary pixel is entered at most once per incoming direction.
    let limit = 8 * region.pixels.len() + 8;
    for _ in 0..limit {
        let (dir, bt) = next_step(at, backtrack).expect("a traced pixel always has its predecessor as a neighbor");
        // Jacob's criterion: back at the start, about to repeat the first move
        if at == start && dir == first_dir {
            return Ok(length);
        }
        length += step_len(dir);
        at = (at.0 + MOORE[dir].0, at.1 + MOORE[dir].1);
        backtrack = bt;
    }
    unreachable!("Moore trace exceeded {limit} steps")
}

/// Area, axes, eccentricity and perimeter of one grain.
pub fn extract_features(region: &Region, parent: &LabelMap) -> Result<GrainFeatures, MorphologyError> {
    let moments = central_moments(region)?;
    let (major, minor) = ellipse_axes(&moments);
    let eccentricity = eccentricity_of(major, minor)?;
    let perimeter = trace_perimeter(region, parent)?;
    Ok(GrainFeatures {
        area: moments.area as f64,
        major_axis: major,
        minor_axis: minor,
        eccentricity,
        perimeter,
    })
}
