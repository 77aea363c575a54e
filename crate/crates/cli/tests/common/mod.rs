//! Synthetic variety dataset shared by the integration tests.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use grainscope_core::synth::{render_scene, scatter_grains, Archetype};
use grainscope_core::{GrayImage, SceneSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const TRAINING_GRAINS: usize = 30;
pub const GRAINS_PER_IMAGE: usize = 16;
pub const IMAGE_SIDE: usize = 1000;
pub const NOISE_DENSITY: f64 = 0.02;

/// Test samples as (variety, sample id, grain count).
pub const TEST_SAMPLES: [(&str, &str, usize); 14] = [
    ("Classic", "CTs1", 29),
    ("Classic", "CTs2", 82),
    ("Classic", "CTs3", 49),
    ("Classic", "CTs4", 28),
    ("Classic", "CTs5", 72),
    ("Rozana", "RTs1", 22),
    ("Rozana", "RTs2", 37),
    ("Rozana", "RTs3", 67),
    ("Rozana", "RTs4", 61),
    ("Mini", "MTs1", 16),
    ("Mini", "MTs2", 62),
    ("Mini", "MTs3", 68),
    ("Mini", "MTs4", 124),
    ("Mini", "MTs5", 69),
];

pub fn archetypes() -> [Archetype; 3] {
    [Archetype::classic(), Archetype::rozana(), Archetype::mini()]
}

pub fn archetype(name: &str) -> Archetype {
    archetypes()
        .into_iter()
        .find(|a| a.name == name)
        .expect("known archetype")
}

/// Renders `count` grains of one archetype over as many noisy images as needed.
pub fn render_sample(archetype: &Archetype, count: usize, seed: u64) -> Vec<GrayImage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut images = Vec::new();
    let mut left = count;
    while left > 0 {
        let n = left.min(GRAINS_PER_IMAGE);
        left -= n;
        let axes: Vec<_> = (0..n).map(|_| archetype.sample_axes(&mut rng)).collect();
        let mut spec = SceneSpec::new(IMAGE_SIDE, IMAGE_SIDE);
        spec.grains = scatter_grains(IMAGE_SIDE, IMAGE_SIDE, &axes, 6.0, (160, 235), &mut rng).expect("grains fit");
        spec.noise_density = NOISE_DENSITY;
        spec.seed = seed.wrapping_mul(1000).wrapping_add(images.len() as u64);
        images.push(render_scene(&spec).expect("valid scene").0);
    }
    images
}

/// Writes a sample as a directory of PGM images.
pub fn write_sample(dir: &Path, archetype: &Archetype, count: usize, seed: u64) -> PathBuf {
    fs::create_dir_all(dir).unwrap();
    for (i, img) in render_sample(archetype, count, seed).iter().enumerate() {
        fs::write(dir.join(format!("img{i:02}.pgm")), img.to_pgm()).unwrap();
    }
    dir.to_path_buf()
}

pub struct Dataset {
    /// (variety, directory of training images)
    pub training: Vec<(String, PathBuf)>,
    /// (variety, directory of sample images)
    pub test: Vec<(String, PathBuf)>,
}

/// Writes training and test images for all three archetypes under `root`.
pub fn write_dataset(root: &Path, seed: u64) -> Dataset {
    let training = archetypes()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let dir = write_sample(&root.join("train").join(&a.name), a, TRAINING_GRAINS, seed + i as u64);
            (a.name.clone(), dir)
        })
        .collect();
    let test = TEST_SAMPLES
        .iter()
        .enumerate()
        .map(|(i, &(variety, id, count))| {
            let dir = write_sample(
                &root.join("test").join(id),
                &archetype(variety),
                count,
                seed + 100 + i as u64,
            );
            (variety.to_string(), dir)
        })
        .collect();
    Dataset { training, test }
}
