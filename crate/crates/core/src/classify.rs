//! K-NN classification in principal-component space.
//!
//! A [`ReferenceModel`] holds one pooled PCA fitted over every training
//! grain plus each grain's score vector and variety. Grains are classified
//! by majority vote of their `k` nearest training points (Euclidean metric
//! on scores); a sample is labeled by majority vote of its grains.
//!
//! Ties are resolved without regard to training-point order: first by the
//! smallest summed distance among the tied varieties, then by position in
//! [`ReferenceModel::varieties`], which is sorted by name.

use std::collections::BTreeSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::ClassifyError;
use crate::morphology::{GrainFeatures, FEATURE_NAMES};
use crate::pca::{ComponentSelection, DataMatrix, PcaModel, PcaOptions};

pub const DEFAULT_K_NEIGHBORS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceOptions {
    pub components: ComponentSelection,
    pub k_neighbors: usize,
    pub standardize: bool,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        Self {
            components: ComponentSelection::default(),
            k_neighbors: DEFAULT_K_NEIGHBORS,
            standardize: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePoint {
    pub scores: Vec<f64>,
    /// Index into [`ReferenceModel::varieties`].
    pub variety: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ReferenceDocument", into = "ReferenceDocument")]
pub struct ReferenceModel {
    pca: PcaModel,
    points: Vec<ReferencePoint>,
    varieties: Vec<String>,
    k_neighbors: usize,
}

/// Verdict for one grain.
#[derive(Debug, Clone, PartialEq)]
pub struct GrainVerdict {
    pub variety: usize,
    pub scores: Vec<f64>,
    /// Distances to the `k` nearest training points, ascending.
    pub distances: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrainResult {
    pub features: GrainFeatures,
    pub scores: Vec<f64>,
    pub predicted: String,
    pub distances: Vec<f64>,
}

/// A set of grains measured together, e.g. from one photograph.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: String,
    pub grains: Vec<GrainFeatures>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleReport {
    pub sample_id: String,
    pub grain_count: usize,
    pub per_grain: Vec<GrainResult>,
    pub majority_label: String,
    /// One entry per model variety, in model order.
    pub vote_fractions: Vec<(String, f64)>,
    /// Mean score of the sample's grains along each retained component.
    pub mean_scores: Vec<f64>,
    /// Wall-clock seconds spent classifying.
    pub elapsed: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarietyAccuracy {
    pub variety: String,
    pub samples: usize,
    pub correct: usize,
}

impl VarietyAccuracy {
    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.samples as f64
    }

    pub fn percent(&self) -> u32 {
        percent_half_up(self.correct, self.samples)
    }
}

/// Per-variety and overall sample accuracy, kept as exact counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccuracyTable {
    pub per_variety: Vec<VarietyAccuracy>,
    pub total_samples: usize,
    pub total_correct: usize,
}

/// `100·correct/total` rounded half-up, in integer arithmetic.
pub fn percent_half_up(correct: usize, total: usize) -> u32 {
    assert!(total > 0, "percentage of an empty set");
    ((200 * correct + total) / (2 * total)) as u32
}

impl AccuracyTable {
    /// Tallies `(predicted, truth)` pairs. Rows follow `order` for varieties
    /// it names, then any other truth labels sorted by name.
    pub fn tally<'a>(
        outcomes: impl IntoIterator<Item = (&'a str, &'a str)>,
        order: &[String],
    ) -> Result<Self, ClassifyError> {
        let outcomes: Vec<_> = outcomes.into_iter().collect();
        if outcomes.is_empty() {
            return Err(ClassifyError::EmptyTestSet);
        }
        let truths: BTreeSet<&str> = outcomes.iter().map(|(_, t)| *t).collect();
        let mut rows: Vec<&str> = order
            .iter()
            .map(String::as_str)
            .filter(|v| truths.contains(v))
            .collect();
        rows.extend(truths.iter().filter(|t| !order.iter().any(|o| o == *t)));

        let per_variety = rows
            .into_iter()
            .map(|variety| {
                let of_variety = outcomes.iter().filter(|(_, t)| *t == variety);
                VarietyAccuracy {
                    variety: variety.to_string(),
                    samples: of_variety.clone().count(),
                    correct: of_variety.filter(|(p, _)| *p == variety).count(),
                }
            })
            .collect();
        Ok(Self {
            per_variety,
            total_samples: outcomes.len(),
            total_correct: outcomes.iter().filter(|(p, t)| p == t).count(),
        })
    }

    pub fn overall_accuracy(&self) -> f64 {
        self.total_correct as f64 / self.total_samples as f64
    }

    pub fn overall_percent(&self) -> u32 {
        percent_half_up(self.total_correct, self.total_samples)
    }
}

/// Outcome of classifying a labeled test set.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Each sample's report with its true variety.
    pub reports: Vec<(SampleReport, String)>,
    pub table: AccuracyTable,
}

/// Majority vote over `(distance, variety)` ballots. Ties go to the smallest
/// summed distance, then to the lowest variety index.
fn vote(ballots: impl IntoIterator<Item = (f64, usize)>, n_varieties: usize) -> usize {
    let mut counts = vec![0usize; n_varieties];
    let mut sums = vec![0.0f64; n_varieties];
    for (d, v) in ballots {
        counts[v] += 1;
        sums[v] += d;
    }
    (0..n_varieties)
        .max_by(|&a, &b| {
            counts[a]
                .cmp(&counts[b])
                .then_with(|| sums[b].total_cmp(&sums[a]))
                .then_with(|| b.cmp(&a))
        })
        .expect("at least one variety")
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

impl ReferenceModel {
    /// Fits one PCA over all training grains and stores their scores.
    pub fn build(labeled: &[(GrainFeatures, String)], opts: &ReferenceOptions) -> Result<Self, ClassifyError> {
        let k = opts.k_neighbors;
        if k == 0 || k.is_multiple_of(2) {
            return Err(ClassifyError::BadNeighbors(k));
        }
        let varieties: Vec<String> = labeled
            .iter()
            .map(|(_, v)| v.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if varieties.len() < 2 {
            return Err(ClassifyError::TooFewVarieties(varieties.len()));
        }
        if labeled.len() < k {
            return Err(ClassifyError::TooFewGrains {
                needed: k,
                available: labeled.len(),
            });
        }
        let observations: Vec<[f64; 5]> = labeled.iter().map(|(f, _)| f.to_array()).collect();
        let x = DataMatrix::from_observations(&observations)?;
        let pca = PcaModel::fit_with(
            &x,
            &PcaOptions {
                selection: opts.components,
                standardize: opts.standardize,
                feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            },
        )?;
        let scores = pca.transform(&x)?;
        let points = labeled
            .iter()
            .enumerate()
            .map(|(n, (_, v))| ReferencePoint {
                scores: (0..scores.rows()).map(|i| scores[(i, n)]).collect(),
                variety: varieties.binary_search(v).expect("variety collected above"),
            })
            .collect();
        Ok(Self {
            pca,
            points,
            varieties,
            k_neighbors: k,
        })
    }

    pub fn pca(&self) -> &PcaModel {
        &self.pca
    }

    pub fn points(&self) -> &[ReferencePoint] {
        &self.points
    }

    pub fn varieties(&self) -> &[String] {
        &self.varieties
    }

    pub fn k_neighbors(&self) -> usize {
        self.k_neighbors
    }

    pub fn variety_name(&self, index: usize) -> &str {
        &self.varieties[index]
    }

    /// Scores of one grain in the model's component space.
    pub fn scores_of(&self, f: &GrainFeatures) -> Vec<f64> {
        self.pca
            .transform_one(&f.to_array())
            .expect("reference PCA is five-dimensional")
    }

    pub fn classify_grain(&self, f: &GrainFeatures) -> GrainVerdict {
        let scores = self.scores_of(f);
        self.classify_scores(scores)
    }

    fn classify_scores(&self, scores: Vec<f64>) -> GrainVerdict {
        let mut neighbors: Vec<(f64, usize)> = self
            .points
            .iter()
            .map(|p| (euclidean(&scores, &p.scores), p.variety))
            .collect();
        let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        let k = self.k_neighbors;
        if neighbors.len() > k {
            neighbors.select_nth_unstable_by(k - 1, by_distance);
            neighbors.truncate(k);
        }
        neighbors.sort_unstable_by(by_distance);
        let variety = vote(neighbors.iter().copied(), self.varieties.len());
        GrainVerdict {
            variety,
            scores,
            distances: neighbors.into_iter().map(|(d, _)| d).collect(),
        }
    }

    pub fn classify_sample(&self, grains: &[GrainFeatures], sample_id: &str) -> Result<SampleReport, ClassifyError> {
        let started = Instant::now();
        if grains.is_empty() {
            return Err(ClassifyError::EmptySample(sample_id.to_string()));
        }
        let verdicts: Vec<GrainVerdict> = grains.iter().map(|f| self.classify_grain(f)).collect();
        let n = grains.len() as f64;
        let k = self.pca.retained();
        let mut mean_scores = vec![0.0; k];
        for v in &verdicts {
            for (m, s) in mean_scores.iter_mut().zip(&v.scores) {
                *m += s;
            }
        }
        mean_scores.iter_mut().for_each(|m| *m /= n);

        let majority = vote(
            verdicts.iter().map(|v| (v.distances.iter().sum::<f64>(), v.variety)),
            self.varieties.len(),
        );
        let vote_fractions = self
            .varieties
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let count = verdicts.iter().filter(|v| v.variety == i).count();
                (name.clone(), count as f64 / n)
            })
            .collect();
        let per_grain = grains
            .iter()
            .zip(verdicts)
            .map(|(f, v)| GrainResult {
                features: *f,
                predicted: self.varieties[v.variety].clone(),
                scores: v.scores,
                distances: v.distances,
            })
            .collect();
        Ok(SampleReport {
            sample_id: sample_id.to_string(),
            grain_count: grains.len(),
            per_grain,
            majority_label: self.varieties[majority].clone(),
            vote_fractions,
            mean_scores,
            elapsed: started.elapsed().as_secs_f64(),
        })
    }

    pub fn evaluate(&self, test: &[(Sample, String)]) -> Result<AccuracyTable, ClassifyError> {
        self.evaluate_detailed(test).map(|e| e.table)
    }

    pub fn evaluate_detailed(&self, test: &[(Sample, String)]) -> Result<Evaluation, ClassifyError> {
        if test.is_empty() {
            return Err(ClassifyError::EmptyTestSet);
        }
        let reports = test
            .iter()
            .map(|(sample, truth)| Ok((self.classify_sample(&sample.grains, &sample.id)?, truth.clone())))
            .collect::<Result<Vec<_>, ClassifyError>>()?;
        let table = AccuracyTable::tally(
            reports.iter().map(|(r, t)| (r.majority_label.as_str(), t.as_str())),
            &self.varieties,
        )?;
        Ok(Evaluation { reports, table })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PointDocument {
    variety: String,
    scores: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ReferenceDocument {
    pca: PcaModel,
    varieties: Vec<String>,
    k_neighbors: usize,
    points: Vec<PointDocument>,
}

impl From<ReferenceModel> for ReferenceDocument {
    fn from(m: ReferenceModel) -> Self {
        let points = m
            .points
            .into_iter()
            .map(|p| PointDocument {
                variety: m.varieties[p.variety].clone(),
                scores: p.scores,
            })
            .collect();
        Self {
            pca: m.pca,
            varieties: m.varieties,
            k_neighbors: m.k_neighbors,
            points,
        }
    }
}

impl TryFrom<ReferenceDocument> for ReferenceModel {
    type Error = ClassifyError;

    fn try_from(doc: ReferenceDocument) -> Result<Self, ClassifyError> {
        let invalid = |msg: String| ClassifyError::InvalidModel(msg);
        if doc.pca.dims() != FEATURE_NAMES.len() {
            return Err(invalid(format!("PCA has {} dimensions, expected 5", doc.pca.dims())));
        }
        let mut sorted = doc.varieties.clone();
        sorted.sort();
        sorted.dedup();
        if sorted != doc.varieties || sorted.len() < 2 {
            return Err(invalid(
                "varieties must be at least two distinct names in sorted order".into(),
            ));
        }
        if doc.points.is_empty()
            || doc.k_neighbors == 0
            || doc.k_neighbors.is_multiple_of(2)
            || doc.k_neighbors > doc.points.len()
        {
            return Err(invalid(format!(
                "k_neighbors {} invalid for {} points",
                doc.k_neighbors,
                doc.points.len()
            )));
        }
        let k = doc.pca.retained();
        let points = doc
            .points
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                if p.scores.len() != k {
                    return Err(invalid(format!(
                        "point {i} has {} scores, expected {k}",
                        p.scores.len()
                    )));
                }
                let variety = doc
                    .varieties
                    .binary_search(&p.variety)
                    .map_err(|_| invalid(format!("point {i} has unknown variety {:?}", p.variety)))?;
                Ok(ReferencePoint {
                    scores: p.scores,
                    variety,
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(Self {
            pca: doc.pca,
            points,
            varieties: doc.varieties,
            k_neighbors: doc.k_neighbors,
        })
    }
}
