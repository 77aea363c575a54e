use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use grainscope_core::classify::ReferenceOptions;
use grainscope_core::pipeline::{segment_image, SegmentedImage};
use grainscope_core::raster::load_grayscale;
use grainscope_core::synth::render_scene;
use grainscope_core::{ComponentSelection, GrainFeatures, PipelineConfig, ReferenceModel, Sample, SceneSpec};
use rayon::prelude::*;

use crate::io::{self, LabeledInput, Source};
use crate::Options;

/// Environment variable capping worker threads.
pub const THREADS_VAR: &str = "GRAINSCOPE_THREADS";

pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var(THREADS_VAR) {
        let n: usize = value
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| anyhow!("{THREADS_VAR} must be a positive integer, got {value:?}"))?;
        builder = builder.num_threads(n);
    }
    Ok(builder.build()?)
}

pub fn is_internal(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        e.downcast_ref::<grainscope_core::Error>()
            .is_some_and(|e| e.is_internal())
    })
}

fn pipeline(opts: &Options) -> PipelineConfig {
    PipelineConfig {
        median_window: opts.median_window,
        min_area: opts.min_area,
        exclude_border: opts.exclude_border,
    }
}

fn segment(path: &Path, cfg: &PipelineConfig) -> Result<SegmentedImage> {
    let img = load_grayscale(path).map_err(grainscope_core::Error::from)?;
    segment_image(&img, cfg).with_context(|| format!("{}", path.display()))
}

fn image_features(path: &Path, cfg: &PipelineConfig) -> Result<Vec<GrainFeatures>> {
    segment(path, cfg)?
        .features()
        .with_context(|| format!("{}", path.display()))
}

/// Features of every image, in input order; images are processed in parallel.
fn features_of_images(paths: &[PathBuf], cfg: &PipelineConfig) -> Result<Vec<GrainFeatures>> {
    let per_image = paths
        .par_iter()
        .map(|p| image_features(p, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(per_image.into_iter().flatten().collect())
}

fn load_source(path: &Path, cfg: &PipelineConfig) -> Result<Vec<GrainFeatures>> {
    match io::resolve_source(path)? {
        Source::Csv(p) => Ok(io::read_features_csv(&p)?.into_iter().map(|(f, _)| f).collect()),
        Source::Images(paths) => features_of_images(&paths, cfg),
    }
}

fn load_model(path: &Path) -> Result<ReferenceModel> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read model {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{}: invalid model", path.display()))
}

pub fn features(opts: &Options, inputs: &[PathBuf], labels_dir: Option<&Path>) -> Result<()> {
    let cfg = pipeline(opts);
    let mut images = Vec::new();
    for input in inputs {
        match io::resolve_source(input)? {
            Source::Images(paths) => images.extend(paths),
            Source::Csv(p) => bail!("{}: expected an image, not a CSV", p.display()),
        }
    }
    let segmented = images
        .par_iter()
        .map(|p| {
            let seg = segment(p, &cfg)?;
            let features = seg.features().with_context(|| format!("{}", p.display()))?;
            Ok((seg, features))
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(dir) = labels_dir {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for (path, (seg, _)) in images.iter().zip(&segmented) {
            let out = dir.join(format!("{}.labels.pgm", io::stem(path)));
            io::write_atomic(&out, &seg.labels.to_gray().to_pgm())?;
        }
    }
    let all: Vec<GrainFeatures> = segmented.into_iter().flat_map(|(_, f)| f).collect();
    io::emit(opts.output.as_deref(), &io::features_csv(&all)?)
}

pub fn fit(opts: &Options, inputs: &[String]) -> Result<()> {
    let cfg = pipeline(opts);
    let mut labeled: Vec<(GrainFeatures, String)> = Vec::new();
    for arg in inputs {
        let input = LabeledInput::parse(arg);
        match &input.label {
            Some(variety) => {
                let features = load_source(&input.path, &cfg)?;
                labeled.extend(features.into_iter().map(|f| (f, variety.clone())));
            }
            None => {
                if !io::is_csv(&input.path) {
                    bail!("{arg}: expected VARIETY=PATH or a CSV with a variety column");
                }
                for (i, (f, variety)) in io::read_features_csv(&input.path)?.into_iter().enumerate() {
                    let variety =
                        variety.ok_or_else(|| anyhow!("{}: row {}: missing variety", input.path.display(), i + 1))?;
                    labeled.push((f, variety));
                }
            }
        }
    }
    let model = ReferenceModel::build(
        &labeled,
        &ReferenceOptions {
            components: match opts.k_components {
                Some(k) => ComponentSelection::Count(k),
                None => ComponentSelection::default(),
            },
            k_neighbors: opts.k_neighbors,
            standardize: opts.standardize,
        },
    )
    .map_err(grainscope_core::Error::from)?;

    let pca = model.pca();
    let mut report = String::from("component,eigenvalue,explained_ratio\n");
    let ratios = pca.explained_variance_ratio();
    for (i, (l, r)) in pca.eigenvalues().iter().zip(&ratios).enumerate() {
        report += &format!("{},{l},{r}\n", i + 1);
    }
    report += &format!(
        "retained {} of {} components from {} grains\n",
        pca.retained(),
        pca.eigenvalues().len(),
        labeled.len()
    );
    if opts.output.is_some() {
        print!("{report}");
    } else {
        eprint!("{report}");
    }
    let json = serde_json::to_string_pretty(&model)? + "\n";
    io::emit(opts.output.as_deref(), json.as_bytes())
}

/// Loads each sample's grains in parallel. Samples without grains are an
/// input error.
fn load_samples(inputs: &[LabeledInput], cfg: &PipelineConfig) -> Result<Vec<Sample>> {
    inputs
        .par_iter()
        .map(|input| {
            let grains = load_source(&input.path, cfg)?;
            if grains.is_empty() {
                bail!("{}: no grains found", input.path.display());
            }
            Ok(Sample {
                id: io::stem(&input.path),
                grains,
            })
        })
        .collect()
}

pub fn classify(opts: &Options, model: &Path, samples: &[String]) -> Result<()> {
    let model = load_model(model)?;
    let inputs: Vec<LabeledInput> = samples.iter().map(|s| LabeledInput::parse(s)).collect();
    let loaded = load_samples(&inputs, &pipeline(opts))?;
    let reports = inputs
        .iter()
        .zip(&loaded)
        .map(|(input, sample)| {
            let report = model
                .classify_sample(&sample.grains, &input.name())
                .map_err(grainscope_core::Error::from)?;
            Ok((report, None))
        })
        .collect::<Result<Vec<_>>>()?;
    io::emit(opts.output.as_deref(), &io::samples_csv(&reports, opts.deterministic)?)
}

pub fn evaluate(opts: &Options, model: &Path, samples: &[String], samples_csv: Option<&Path>) -> Result<()> {
    let model = load_model(model)?;
    let inputs: Vec<LabeledInput> = samples.iter().map(|s| LabeledInput::parse(s)).collect();
    if let Some(bad) = inputs.iter().find(|i| i.label.is_none()) {
        bail!("{}: evaluate expects VARIETY=PATH", bad.path.display());
    }
    let loaded = load_samples(&inputs, &pipeline(opts))?;
    let test: Vec<(Sample, String)> = loaded
        .into_iter()
        .zip(&inputs)
        .map(|(s, i)| (s, i.label.clone().unwrap_or_default()))
        .collect();
    let evaluation = model.evaluate_detailed(&test).map_err(grainscope_core::Error::from)?;
    if let Some(path) = samples_csv {
        let rows: Vec<_> = evaluation
            .reports
            .iter()
            .map(|(r, t)| (r.clone(), Some(t.clone())))
            .collect();
        io::write_atomic(path, &io::samples_csv(&rows, opts.deterministic)?)?;
    }
    let csv = io::accuracy_csv(&evaluation.table)?;
    match &opts.output {
        Some(path) => {
            io::write_atomic(path, &csv)?;
            print!("{}", io::accuracy_text(&evaluation.table));
            Ok(())
        }
        None => io::emit(None, &csv),
    }
}

pub fn synth(opts: &Options, scene: &Path, truth: Option<&Path>) -> Result<()> {
    let text = fs::read_to_string(scene).with_context(|| format!("cannot read {}", scene.display()))?;
    let mut spec: SceneSpec =
        serde_json::from_str(&text).with_context(|| format!("{}: invalid scene description", scene.display()))?;
    if let Some(seed) = opts.seed {
        spec.seed = seed;
    }
    let output = opts
        .output
        .as_deref()
        .ok_or_else(|| anyhow!("synth needs --output for the image"))?;
    let (img, grains) = render_scene(&spec)
        .map_err(grainscope_core::Error::from)
        .with_context(|| format!("{}", scene.display()))?;
    let truth_path = match truth {
        Some(p) => p.to_path_buf(),
        None => output.with_extension("truth.csv"),
    };
    io::write_atomic(output, &img.to_pgm())?;
    io::write_atomic(&truth_path, &io::truth_csv(&grains)?)
}
