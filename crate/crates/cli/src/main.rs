mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Rice grain variety classification from images.
#[derive(Debug, Parser)]
#[command(name = "grainscope", version, about)]
struct Cli {
    #[command(flatten)]
    opts: Options,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Median filter window (odd).
    #[arg(long, global = true, default_value_t = 3)]
    pub median_window: usize,
    /// Smallest component, in pixels, kept as a grain.
    #[arg(long, global = true, default_value_t = grainscope_core::segment::DEFAULT_MIN_AREA)]
    pub min_area: usize,
    /// Drop components touching the image border.
    #[arg(long, global = true)]
    pub exclude_border: bool,
    /// Retained principal components; defaults to 95% explained variance.
    #[arg(long, global = true)]
    pub k_components: Option<usize>,
    /// Neighbors consulted per grain (odd).
    #[arg(long, global = true, default_value_t = grainscope_core::classify::DEFAULT_K_NEIGHBORS)]
    pub k_neighbors: usize,
    /// Scale features to unit variance before PCA.
    #[arg(long, global = true)]
    pub standardize: bool,
    /// Seed overriding the one in a scene file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Zero all timing columns so output is byte-reproducible.
    #[arg(long, global = true)]
    pub deterministic: bool,
    /// Output file; standard output when omitted.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract per-grain features from images into a CSV.
    Features {
        /// Image files or directories of images.
        #[arg(required = true)]
        images: Vec<PathBuf>,
        /// Write each image's label map as a PGM into this directory.
        #[arg(long)]
        labels_dir: Option<PathBuf>,
    },
    /// Fit a reference model from labeled training data.
    Fit {
        /// VARIETY=PATH, where PATH is a feature CSV, an image or a
        /// directory of images; or a CSV carrying a `variety` column.
        #[arg(required = true)]
        inputs: Vec<String>,
    },
    /// Classify samples against a reference model.
    Classify {
        /// Reference model JSON written by `fit`.
        #[arg(long)]
        model: PathBuf,
        /// ID=PATH or PATH; PATH is a feature CSV, an image or a directory.
        #[arg(required = true)]
        samples: Vec<String>,
    },
    /// Classify samples of known variety and report accuracy.
    Evaluate {
        /// Reference model JSON written by `fit`.
        #[arg(long)]
        model: PathBuf,
        /// Also write the per-sample CSV here.
        #[arg(long)]
        samples_csv: Option<PathBuf>,
        /// VARIETY=PATH for each test sample.
        #[arg(required = true)]
        samples: Vec<String>,
    },
    /// Render a synthetic scene described by a JSON file.
    Synth {
        scene: PathBuf,
        /// Ground-truth CSV; defaults to the output path with `.truth.csv`.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = std::panic::catch_unwind(|| run(cli));
    match result {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(if commands::is_internal(&err) { 2 } else { 1 })
        }
        Err(_) => ExitCode::from(2),
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let pool = commands::thread_pool()?;
    pool.install(|| match cli.command {
        Command::Features { images, labels_dir } => commands::features(&cli.opts, &images, labels_dir.as_deref()),
        Command::Fit { inputs } => commands::fit(&cli.opts, &inputs),
        Command::Classify { model, samples } => commands::classify(&cli.opts, &model, &samples),
        Command::Evaluate {
            model,
            samples_csv,
            samples,
        } => commands::evaluate(&cli.opts, &model, &samples, samples_csv.as_deref()),
        Command::Synth { scene, truth } => commands::synth(&cli.opts, &scene, truth.as_deref()),
    })
}
