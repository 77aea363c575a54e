//! Synthetic grain scenes with analytic ground truth.
//!
//! Grains are filled rotated ellipses on a dark background. A pixel belongs
//! to a grain when its center lies inside the ellipse.

use std::f64::consts::PI;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::SynthError;
use crate::raster::GrayImage;

/// One elliptical grain. `center` is `(row, col)` in pixel units; `angle`
/// rotates the major axis from the column axis toward the row axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrainSpec {
    pub center: (f64, f64),
    pub semi_major: f64,
    pub semi_minor: f64,
    #[serde(default)]
    pub angle: f64,
    pub intensity: u8,
}

impl GrainSpec {
    pub fn analytic_area(&self) -> f64 {
        PI * self.semi_major * self.semi_minor
    }

    pub fn analytic_eccentricity(&self) -> f64 {
        (1.0 - (self.semi_minor / self.semi_major).powi(2)).sqrt()
    }

    /// Half extents `(rows, cols)` of the axis-aligned bounding box.
    fn half_extents(&self) -> (f64, f64) {
        let (s, c) = self.angle.sin_cos();
        let (a, b) = (self.semi_major, self.semi_minor);
        let rows = (a * a * s * s + b * b * c * c).sqrt();
        let cols = (a * a * c * c + b * b * s * s).sqrt();
        (rows, cols)
    }

    #[inline]
    fn contains(&self, row: f64, col: f64) -> bool {
        let (s, c) = self.angle.sin_cos();
        let (dy, dx) = (row - self.center.0, col - self.center.1);
        let u = dx * c + dy * s;
        let v = -dx * s + dy * c;
        (u / self.semi_major).powi(2) + (v / self.semi_minor).powi(2) <= 1.0
    }

    /// Pixels whose centers fall inside the ellipse, clipped to the frame.
    pub fn pixels(&self, width: usize, height: usize) -> Vec<(usize, usize)> {
        let (hr, hc) = self.half_extents();
        let clip = |v: f64, n: usize| v.clamp(0.0, n as f64 - 1.0) as usize;
        let (r0, r1) = (
            clip((self.center.0 - hr).floor(), height),
            clip((self.center.0 + hr).ceil(), height),
        );
        let (c0, c1) = (
            clip((self.center.1 - hc).floor(), width),
            clip((self.center.1 + hc).ceil(), width),
        );
        let mut out = Vec::new();
        for r in r0..=r1 {
            for c in c0..=c1 {
                if self.contains(r as f64, c as f64) {
                    out.push((r, c));
                }
            }
        }
        out
    }
}

fn black() -> u8 {
    0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    #[serde(default = "black")]
    pub background: u8,
    #[serde(default)]
    pub grains: Vec<GrainSpec>,
    #[serde(default)]
    pub noise_density: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SceneSpec {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            background: 0,
            grains: Vec::new(),
            noise_density: 0.0,
            seed: 0,
        }
    }
}

/// Ground truth for one rendered grain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrainTruth {
    pub grain: GrainSpec,
    pub area: f64,
    pub eccentricity: f64,
}

/// Rasterizes the scene and, when `noise_density > 0`, applies seeded
/// salt-and-pepper noise.
pub fn render_scene(spec: &SceneSpec) -> Result<(GrayImage, Vec<GrainTruth>), SynthError> {
    let (w, h) = (spec.width, spec.height);
    if w == 0 || h == 0 {
        return Err(SynthError::BadGrain {
            index: 0,
            reason: format!("scene dimensions {w}x{h} must be non-zero"),
        });
    }
    if !(0.0..1.0).contains(&spec.noise_density) {
        return Err(SynthError::BadDensity(spec.noise_density));
    }
    let mut owner = vec![0u32; w * h];
    let mut img = GrayImage::filled(w, h, spec.background);
    for (index, g) in spec.grains.iter().enumerate() {
        validate_grain(index, g, spec)?;
        for (r, c) in g.pixels(w, h) {
            let slot = &mut owner[r * w + c];
            if *slot != 0 {
                return Err(SynthError::GrainsOverlap {
                    first: *slot as usize - 1,
                    second: index,
                });
            }
            *slot = index as u32 + 1;
            img.set(r, c, g.intensity);
        }
    }
    // grains that touch diagonally or side by side would merge into one component
    for r in 0..h {
        for c in 0..w {
            let a = owner[r * w + c];
            if a == 0 {
                continue;
            }
            for (dr, dc) in [(0isize, 1isize), (1, -1), (1, 0), (1, 1)] {
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                if nr < 0 || nc < 0 || nr as usize >= h || nc as usize >= w {
                    continue;
                }
                let b = owner[nr as usize * w + nc as usize];
                if b != 0 && b != a {
                    return Err(SynthError::GrainsOverlap {
                        first: a.min(b) as usize - 1,
                        second: a.max(b) as usize - 1,
                    });
                }
            }
        }
    }
    if spec.noise_density > 0.0 {
        img = add_salt_pepper(&img, spec.noise_density, spec.seed)?;
    }
    let truth = spec
        .grains
        .iter()
        .map(|g| GrainTruth {
            grain: *g,
            area: g.analytic_area(),
            eccentricity: g.analytic_eccentricity(),
        })
        .collect();
    Ok((img, truth))
}

fn validate_grain(index: usize, g: &GrainSpec, spec: &SceneSpec) -> Result<(), SynthError> {
    let bad = |reason: &str| {
        Err(SynthError::BadGrain {
            index,
            reason: reason.to_string(),
        })
    };
    let finite = [g.center.0, g.center.1, g.semi_major, g.semi_minor, g.angle]
        .iter()
        .all(|v| v.is_finite());
    if !finite {
        return bad("non-finite geometry");
    }
    if !(g.semi_minor > 0.0 && g.semi_major >= g.semi_minor) {
        return bad("need semi_major >= semi_minor > 0");
    }
    if g.intensity <= spec.background {
        return bad("intensity must exceed the background");
    }
    let (hr, hc) = g.half_extents();
    let inside = g.center.0 - hr >= 0.0
        && g.center.1 - hc >= 0.0
        && g.center.0 + hr <= (spec.height - 1) as f64
        && g.center.1 + hc <= (spec.width - 1) as f64;
    if !inside {
        return Err(SynthError::GrainOutOfBounds {
            index,
            width: spec.width,
            height: spec.height,
        });
    }
    Ok(())
}

/// Forces exactly `round(density · pixels)` distinct pixels to 0 or 255.
pub fn add_salt_pepper(img: &GrayImage, density: f64, seed: u64) -> Result<GrayImage, SynthError> {
    if !(0.0..1.0).contains(&density) {
        return Err(SynthError::BadDensity(density));
    }
    let n = img.len();
    let count = (density * n as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = img.clone();
    let data = out.as_mut_slice();
    for i in index::sample(&mut rng, n, count) {
        data[i] = if rng.random_bool(0.5) { 255 } else { 0 };
    }
    Ok(out)
}

/// Grain-shape population used to build test varieties.
#[derive(Debug, Clone, PartialEq)]
pub struct Archetype {
    pub name: String,
    pub semi_major: f64,
    pub semi_minor: f64,
    /// Each axis is scaled by a uniform factor in `[1 − jitter, 1 + jitter]`.
    pub jitter: f64,
}

impl Archetype {
    /// Long slender grain; axes are the means of the reference feature table.
    pub fn classic() -> Self {
        Self {
            name: "Classic".into(),
            semi_major: 89.0,
            semi_minor: 21.3,
            jitter: 0.06,
        }
    }

    pub fn rozana() -> Self {
        Self::classic().scaled("Rozana", 1.15)
    }

    pub fn mini() -> Self {
        Self::classic().scaled("Mini", 0.85)
    }

    pub fn scaled(&self, name: &str, factor: f64) -> Self {
        Self {
            name: name.into(),
            semi_major: self.semi_major * factor,
            semi_minor: self.semi_minor * factor,
            jitter: self.jitter,
        }
    }

    /// Draws `(semi_major, semi_minor)`.
    pub fn sample_axes<R: Rng>(&self, rng: &mut R) -> (f64, f64) {
        let mut draw = |base: f64| base * (1.0 + self.jitter * rng.random_range(-1.0..=1.0));
        let a = draw(self.semi_major);
        let b = draw(self.semi_minor);
        (a.max(b), a.min(b))
    }
}

/// Places grains with the given axes at random positions and angles,
/// keeping at least `gap` pixels between any two. Intensities are drawn
/// from `intensity`.
pub fn scatter_grains<R: Rng>(
    width: usize,
    height: usize,
    axes: &[(f64, f64)],
    gap: f64,
    intensity: (u8, u8),
    rng: &mut R,
) -> Result<Vec<GrainSpec>, SynthError> {
    const ATTEMPTS: usize = 2000;
    let mut occupied = vec![false; width * height];
    let mut placed = Vec::with_capacity(axes.len());
    for &(a, b) in axes {
        let mut ok = false;
        for _ in 0..ATTEMPTS {
            let angle = rng.random_range(0.0..PI);
            let probe = GrainSpec {
                center: (0.0, 0.0),
                semi_major: a + gap / 2.0,
                semi_minor: b + gap / 2.0,
                angle,
                intensity: 255,
            };
            let (hr, hc) = probe.half_extents();
            if 2.0 * hr + 2.0 >= height as f64 || 2.0 * hc + 2.0 >= width as f64 {
                break;
            }
            let center = (
                rng.random_range(hr + 1.0..height as f64 - 1.0 - hr),
                rng.random_range(hc + 1.0..width as f64 - 1.0 - hc),
            );
            let probe = GrainSpec { center, ..probe };
            let footprint = probe.pixels(width, height);
            if footprint.iter().any(|&(r, c)| occupied[r * width + c]) {
                continue;
            }
            for (r, c) in footprint {
                occupied[r * width + c] = true;
            }
            placed.push(GrainSpec {
                center,
                semi_major: a,
                semi_minor: b,
                angle,
                intensity: rng.random_range(intensity.0..=intensity.1),
            });
            ok = true;
            break;
        }
        if !ok {
            return Err(SynthError::Crowded {
                requested: axes.len(),
                placed: placed.len(),
            });
        }
    }
    Ok(placed)
}
