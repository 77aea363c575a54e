//! File formats and input discovery.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use grainscope_core::classify::{AccuracyTable, SampleReport};
use grainscope_core::morphology::CSV_HEADER;
use grainscope_core::synth::GrainTruth;
use grainscope_core::GrainFeatures;
use serde::Deserialize;

const IMAGE_EXTENSIONS: [&str; 4] = ["png", "jpg", "jpeg", "pgm"];

/// Writes to a temporary file beside `path` and renames it into place, so a
/// failed command never leaves partial output.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Writes to `path` atomically, or to standard output when `path` is `None`.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, bytes),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

pub fn features_csv(features: &[GrainFeatures]) -> Result<Vec<u8>> {
    csv_bytes(
        &CSV_HEADER,
        features.iter().enumerate().map(|(i, f)| {
            let mut row = vec![(i + 1).to_string()];
            row.extend(f.to_array().iter().map(f64::to_string));
            row
        }),
    )
}

#[derive(Debug, Deserialize)]
struct FeatureRow {
    area: f64,
    major_axis: f64,
    minor_axis: f64,
    eccentricity: f64,
    perimeter: f64,
    #[serde(default)]
    variety: Option<String>,
}

/// Reads a feature CSV. Rows may carry an optional `variety` column.
pub fn read_features_csv(path: &Path) -> Result<Vec<(GrainFeatures, Option<String>)>> {
    let text = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_slice());
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<FeatureRow>().enumerate() {
        let row = row.map_err(|e| anyhow::anyhow!("{}: row {}: {}", path.display(), i + 1, csv_reason(&e)))?;
        let values = [
            row.area,
            row.major_axis,
            row.minor_axis,
            row.eccentricity,
            row.perimeter,
        ];
        if values.iter().any(|v| !v.is_finite()) {
            bail!("{}: row {}: non-finite feature value", path.display(), i + 1);
        }
        out.push((GrainFeatures::from_array(values), row.variety.filter(|v| !v.is_empty())));
    }
    Ok(out)
}

fn csv_reason(e: &csv::Error) -> String {
    match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
        _ => e.to_string(),
    }
}

/// Timing is zeroed under `deterministic`.
pub fn samples_csv(reports: &[(SampleReport, Option<String>)], deterministic: bool) -> Result<Vec<u8>> {
    csv_bytes(
        &[
            "sample_id",
            "grain_count",
            "mean_pc1",
            "elapsed_sec",
            "predicted",
            "truth",
        ],
        reports.iter().map(|(r, truth)| {
            let elapsed = if deterministic { 0.0 } else { r.elapsed };
            vec![
                r.sample_id.clone(),
                r.grain_count.to_string(),
                r.mean_scores.first().copied().unwrap_or(0.0).to_string(),
                format!("{elapsed:.6}"),
                r.majority_label.clone(),
                truth.clone().unwrap_or_default(),
            ]
        }),
    )
}

pub fn accuracy_csv(table: &AccuracyTable) -> Result<Vec<u8>> {
    let mut rows: Vec<Vec<String>> = table
        .per_variety
        .iter()
        .map(|r| vec![r.variety.clone(), r.samples.to_string(), r.percent().to_string()])
        .collect();
    rows.push(vec![
        "Overall".into(),
        table.total_samples.to_string(),
        table.overall_percent().to_string(),
    ]);
    csv_bytes(&["variety", "total_samples", "accuracy_pct"], rows)
}

/// Human-readable accuracy table.
pub fn accuracy_text(table: &AccuracyTable) -> String {
    let mut s = format!("{:<12}{:>22}{:>10}\n", "Variety", "Total no of sample", "Accuracy");
    for r in &table.per_variety {
        s += &format!("{:<12}{:>22}{:>9}%\n", r.variety, r.samples, r.percent());
    }
    s += &format!(
        "{:<12}{:>22}{:>9}%\n",
        "Overall",
        table.total_samples,
        table.overall_percent()
    );
    s
}

pub fn truth_csv(truth: &[GrainTruth]) -> Result<Vec<u8>> {
    csv_bytes(
        &[
            "grain",
            "center_row",
            "center_col",
            "semi_major",
            "semi_minor",
            "angle",
            "intensity",
            "area",
            "eccentricity",
        ],
        truth.iter().enumerate().map(|(i, t)| {
            let g = &t.grain;
            vec![
                (i + 1).to_string(),
                g.center.0.to_string(),
                g.center.1.to_string(),
                g.semi_major.to_string(),
                g.semi_minor.to_string(),
                g.angle.to_string(),
                g.intensity.to_string(),
                t.area.to_string(),
                t.eccentricity.to_string(),
            ]
        }),
    )
}

/// A command-line input of the form `LABEL=PATH` or just `PATH`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledInput {
    pub label: Option<String>,
    pub path: PathBuf,
}

impl LabeledInput {
    pub fn parse(arg: &str) -> Self {
        if let Some((label, path)) = arg.split_once('=') {
            if !label.is_empty() && !label.contains(['/', '\\']) && !path.is_empty() {
                return Self {
                    label: Some(label.to_string()),
                    path: PathBuf::from(path),
                };
            }
        }
        Self {
            label: None,
            path: PathBuf::from(arg),
        }
    }

    /// The label, or the file stem when none was given.
    pub fn name(&self) -> String {
        self.label.clone().unwrap_or_else(|| stem(&self.path))
    }
}

pub fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// What a path names: a feature table or a set of images.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Csv(PathBuf),
    Images(Vec<PathBuf>),
}

pub fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| IMAGE_EXTENSIONS.iter().any(|x| e.eq_ignore_ascii_case(x)))
}

pub fn resolve_source(path: &Path) -> Result<Source> {
    if path.is_dir() {
        let mut images: Vec<PathBuf> = fs::read_dir(path)
            .with_context(|| format!("cannot list {}", path.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && is_image(p))
            .collect();
        images.sort();
        if images.is_empty() {
            bail!("{}: directory contains no images", path.display());
        }
        Ok(Source::Images(images))
    } else if is_csv(path) {
        if !path.exists() {
            bail!("{}: file not found", path.display());
        }
        Ok(Source::Csv(path.to_path_buf()))
    } else {
        Ok(Source::Images(vec![path.to_path_buf()]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labeled_input_parsing() {
        assert_eq!(
            LabeledInput::parse("Classic=data/c.csv"),
            LabeledInput {
                label: Some("Classic".into()),
                path: "data/c.csv".into()
            }
        );
        let plain = LabeledInput::parse("data/a=b.csv");
        assert_eq!(plain.label, None);
        assert_eq!(plain.name(), "a=b");
        assert_eq!(LabeledInput::parse("x.png").name(), "x");
    }

    #[test]
    fn feature_csv_roundtrip() {
        let f = GrainFeatures {
            area: 5043.0,
            major_axis: 156.6652,
            minor_axis: 42.9724,
            eccentricity: 0.9616,
            perimeter: 357.262,
        };
        let bytes = features_csv(&[f]).unwrap();
        assert_eq!(
            String::from_utf8(bytes.clone()).unwrap(),
            "sno,area,major_axis,minor_axis,eccentricity,perimeter\n1,5043,156.6652,42.9724,0.9616,357.262\n"
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        std::fs::write(&path, bytes).unwrap();
        assert_eq!(read_features_csv(&path).unwrap(), vec![(f, None)]);
    }

    #[test]
    fn malformed_row_names_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(
            &path,
            "sno,area,major_axis,minor_axis,eccentricity,perimeter\n1,1,2,1,0.5,3\n2,x,2,1,0.5,3\n",
        )
        .unwrap();
        let err = read_features_csv(&path).unwrap_err().to_string();
        assert!(err.contains("row 2"), "{err}");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
