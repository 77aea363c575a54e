//! Shared fixtures for the criterion benches.

use grainscope_core::synth::{render_scene, scatter_grains, Archetype, SceneSpec};
use grainscope_core::{GrainFeatures, GrayImage};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A noisy scene of `grains` classic-shaped grains.
pub fn noisy_scene(width: usize, height: usize, grains: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let archetype = Archetype::classic();
    let axes: Vec<_> = (0..grains).map(|_| archetype.sample_axes(&mut rng)).collect();
    let mut spec = SceneSpec::new(width, height);
    spec.grains = scatter_grains(width, height, &axes, 4.0, (170, 230), &mut rng).expect("scene fits");
    spec.noise_density = 0.05;
    spec.seed = seed;
    render_scene(&spec).expect("valid scene").0
}

/// Feature rows drawn straight from an archetype, skipping rendering.
pub fn archetype_features(archetype: &Archetype, count: usize, seed: u64) -> Vec<GrainFeatures> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let (a, b) = archetype.sample_axes(&mut rng);
            let area = std::f64::consts::PI * a * b;
            let perimeter = std::f64::consts::PI * (3.0 * (a + b) - ((3.0 * a + b) * (a + 3.0 * b)).sqrt());
            GrainFeatures {
                area,
                major_axis: 2.0 * a,
                minor_axis: 2.0 * b,
                eccentricity: (1.0 - (b / a).powi(2)).sqrt(),
                perimeter,
            }
        })
        .collect()
}
