//! Principal component analysis by explicit covariance eigendecomposition.
//!
//! Observations are the *columns* of an `M × N` data matrix. Fitting runs
//! the classical sequence: empirical mean, mean subtraction, `1/N`
//! covariance, Jacobi eigendecomposition, descending sort, selection of the
//! leading `k` eigenvectors and projection onto them.
//!
//! The covariance uses `1/N`, not `1/(N − 1)`, so eigenvalues are
//! population variances along each component.

mod jacobi;

use serde::{Deserialize, Serialize};

pub use jacobi::{eig_symmetric, eig_symmetric_with, Eigen, MAX_SWEEPS};

use crate::error::PcaError;
use crate::linalg::Matrix;

/// Default share of total variance the retained components must explain.
pub const DEFAULT_VARIANCE_RATIO: f64 = 0.95;

/// `M × N` matrix of finite values; each column is one observation.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix(Matrix);

impl DataMatrix {
    pub fn new(m: Matrix) -> Result<Self, PcaError> {
        let (rows, cols) = m.shape();
        if rows == 0 || cols == 0 {
            return Err(PcaError::Empty { rows, cols });
        }
        if let Some(pos) = m.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(PcaError::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self(m))
    }

    /// One observation per item; every observation must have the same length.
    pub fn from_observations<O: AsRef<[f64]>>(observations: &[O]) -> Result<Self, PcaError> {
        if let Some(first) = observations.first() {
            let m = first.as_ref().len();
            if let Some(bad) = observations.iter().find(|o| o.as_ref().len() != m) {
                return Err(PcaError::DimensionMismatch {
                    expected: m,
                    actual: bad.as_ref().len(),
                });
            }
        }
        Self::new(Matrix::from_columns(observations))
    }

    pub fn dims(&self) -> usize {
        self.0.rows()
    }

    pub fn observations(&self) -> usize {
        self.0.cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }
}

/// Row means `u[m] = (1/N) Σₙ X[m, n]`.
pub fn empirical_mean(x: &DataMatrix) -> Vec<f64> {
    let n = x.observations() as f64;
    (0..x.dims()).map(|m| x.0.row(m).iter().sum::<f64>() / n).collect()
}

/// `B = X − u·h` where `h` is a row of ones.
pub fn mean_subtract(x: &DataMatrix, u: &[f64]) -> Result<Matrix, PcaError> {
    if u.len() != x.dims() {
        return Err(PcaError::DimensionMismatch {
            expected: x.dims(),
            actual: u.len(),
        });
    }
    let (rows, cols) = x.0.shape();
    let mut b = Matrix::zeros(rows, cols);
    for (m, &mean) in u.iter().enumerate() {
        for n in 0..cols {
            b[(m, n)] = x.0[(m, n)] - mean;
        }
    }
    Ok(b)
}

/// `C = (1/N)·B·Bᵀ`, exactly symmetric.
pub fn covariance(b: &Matrix) -> Matrix {
    let (m, n) = b.shape();
    let inv_n = 1.0 / n as f64;
    let mut c = Matrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let dot: f64 = b.row(i).iter().zip(b.row(j)).map(|(x, y)| x * y).sum();
            c[(i, j)] = dot * inv_n;
            c[(j, i)] = dot * inv_n;
        }
    }
    c
}

/// Stable descending sort of eigenpairs.
pub fn sort_components(values: &[f64], vectors: &Matrix) -> Result<(Vec<f64>, Matrix), PcaError> {
    if values.len() != vectors.cols() {
        return Err(PcaError::DimensionMismatch {
            expected: vectors.cols(),
            actual: values.len(),
        });
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let columns: Vec<Vec<f64>> = order.iter().map(|&i| vectors.column(i)).collect();
    let mut sorted_vectors = Matrix::from_columns(&columns);
    if columns.is_empty() {
        sorted_vectors = Matrix::zeros(vectors.rows(), 0);
    }
    Ok((sorted_values, sorted_vectors))
}

/// First `k` columns of the sorted eigenvector matrix.
pub fn select_components(sorted_vectors: &Matrix, k: usize) -> Result<Matrix, PcaError> {
    let dims = sorted_vectors.cols();
    if k == 0 || k > dims {
        return Err(PcaError::BadK { k, dims });
    }
    Ok(sorted_vectors.leading_columns(k))
}

/// `FinalData = FeatureVectorᵀ · B`; row `i` holds the i-th component scores.
pub fn project(features: &Matrix, b: &Matrix) -> Result<Matrix, PcaError> {
    if features.rows() != b.rows() {
        return Err(PcaError::DimensionMismatch {
            expected: features.rows(),
            actual: b.rows(),
        });
    }
    Ok(features.transpose().matmul(b))
}

/// How many components to keep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ComponentSelection {
    Count(usize),
    /// Smallest `k` whose cumulative variance share reaches the ratio.
    VarianceRatio(f64),
}

impl Default for ComponentSelection {
    fn default() -> Self {
        ComponentSelection::VarianceRatio(DEFAULT_VARIANCE_RATIO)
    }
}

impl ComponentSelection {
    fn resolve(self, sorted_values: &[f64]) -> Result<usize, PcaError> {
        let dims = sorted_values.len();
        match self {
            ComponentSelection::Count(k) if k == 0 || k > dims => Err(PcaError::BadK { k, dims }),
            ComponentSelection::Count(k) => Ok(k),
            ComponentSelection::VarianceRatio(r) if !(r > 0.0 && r <= 1.0) => Err(PcaError::BadVarianceRatio(r)),
            ComponentSelection::VarianceRatio(r) => {
                let total: f64 = sorted_values.iter().map(|v| v.max(0.0)).sum();
                if total <= 0.0 {
                    return Ok(1);
                }
                let mut acc = 0.0;
                for (i, v) in sorted_values.iter().enumerate() {
                    acc += v.max(0.0);
                    if acc >= r * total {
                        return Ok(i + 1);
                    }
                }
                Ok(dims)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PcaOptions {
    pub selection: ComponentSelection,
    /// Z-score every feature (population standard deviation) before fitting.
    pub standardize: bool,
    /// Names of the `M` input dimensions; generated when empty.
    pub feature_names: Vec<String>,
}

/// A fitted projection. Eigenpairs are sorted by decreasing eigenvalue and
/// the first `retained` eigenvectors form the feature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PcaDocument", into = "PcaDocument")]
pub struct PcaModel {
    mean: Vec<f64>,
    scale: Option<Vec<f64>>,
    eigenvalues: Vec<f64>,
    eigenvectors: Matrix,
    retained: usize,
    feature_names: Vec<String>,
}

impl PcaModel {
    pub fn fit(x: &DataMatrix, selection: ComponentSelection) -> Result<Self, PcaError> {
        Self::fit_with(
            x,
            &PcaOptions {
                selection,
                ..PcaOptions::default()
            },
        )
    }

    pub fn fit_with(x: &DataMatrix, opts: &PcaOptions) -> Result<Self, PcaError> {
        if x.observations() < 2 {
            return Err(PcaError::TooFewObservations(x.observations()));
        }
        let dims = x.dims();
        let feature_names = if opts.feature_names.is_empty() {
            (1..=dims).map(|i| format!("x{i}")).collect()
        } else if opts.feature_names.len() == dims {
            opts.feature_names.clone()
        } else {
            return Err(PcaError::DimensionMismatch {
                expected: dims,
                actual: opts.feature_names.len(),
            });
        };

        let mean = empirical_mean(x);
        let mut centered = mean_subtract(x, &mean)?;
        let scale = opts.standardize.then(|| {
            let n = x.observations() as f64;
            let scale: Vec<f64> = (0..dims)
                .map(|m| {
                    let sd = (centered.row(m).iter().map(|v| v * v).sum::<f64>() / n).sqrt();
                    if sd > 0.0 {
                        sd
                    } else {
                        1.0
                    }
                })
                .collect();
            for (m, &s) in scale.iter().enumerate() {
                for n in 0..centered.cols() {
                    centered[(m, n)] /= s;
                }
            }
            scale
        });

        let c = covariance(&centered);
        let eigen = eig_symmetric(&c)?;
        let (eigenvalues, eigenvectors) = sort_components(&eigen.values, &eigen.vectors)?;
        let retained = opts.selection.resolve(&eigenvalues)?;
        Ok(Self {
            mean,
            scale,
            eigenvalues,
            eigenvectors,
            retained,
            feature_names,
        })
    }

    pub fn dims(&self) -> usize {
        self.mean.len()
    }

    pub fn retained(&self) -> usize {
        self.retained
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn scale(&self) -> Option<&[f64]> {
        self.scale.as_deref()
    }

    pub fn is_standardized(&self) -> bool {
        self.scale.is_some()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// All `M` eigenvectors as columns, in eigenvalue order.
    pub fn eigenvectors(&self) -> &Matrix {
        &self.eigenvectors
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// The `M × k` matrix of retained eigenvectors.
    pub fn feature_vector(&self) -> Matrix {
        self.eigenvectors.leading_columns(self.retained)
    }

    /// Share of total variance carried by each component.
    pub fn explained_variance_ratio(&self) -> Vec<f64> {
        let total: f64 = self.eigenvalues.iter().map(|v| v.max(0.0)).sum();
        self.eigenvalues
            .iter()
            .map(|v| if total > 0.0 { v.max(0.0) / total } else { 0.0 })
            .collect()
    }

    /// Same model keeping a different number of components.
    pub fn with_retained(&self, k: usize) -> Result<Self, PcaError> {
        if k == 0 || k > self.dims() {
            return Err(PcaError::BadK { k, dims: self.dims() });
        }
        Ok(Self {
            retained: k,
            ..self.clone()
        })
    }

    fn center(&self, x: &DataMatrix) -> Result<Matrix, PcaError> {
        let mut b = mean_subtract(x, &self.mean)?;
        if let Some(scale) = &self.scale {
            for (m, &s) in scale.iter().enumerate() {
                for n in 0..b.cols() {
                    b[(m, n)] /= s;
                }
            }
        }
        Ok(b)
    }

    /// `k × N` scores of new observations, centered on the model's own mean.
    pub fn transform(&self, x: &DataMatrix) -> Result<Matrix, PcaError> {
        project(&self.feature_vector(), &self.center(x)?)
    }

    /// Scores of a single observation.
    pub fn transform_one(&self, observation: &[f64]) -> Result<Vec<f64>, PcaError> {
        if observation.len() != self.dims() {
            return Err(PcaError::DimensionMismatch {
                expected: self.dims(),
                actual: observation.len(),
            });
        }
        let scale = self.scale.as_deref();
        let centered: Vec<f64> = observation
            .iter()
            .enumerate()
            .map(|(m, &v)| (v - self.mean[m]) / scale.map_or(1.0, |s| s[m]))
            .collect();
        Ok((0..self.retained)
            .map(|j| {
                centered
                    .iter()
                    .enumerate()
                    .map(|(m, &c)| self.eigenvectors[(m, j)] * c)
                    .sum()
            })
            .collect())
    }

    /// Maps `k × N` scores back to the original feature space.
    pub fn inverse_transform(&self, scores: &Matrix) -> Result<Matrix, PcaError> {
        if scores.rows() != self.retained {
            return Err(PcaError::DimensionMismatch {
                expected: self.retained,
                actual: scores.rows(),
            });
        }
        let mut x = self.feature_vector().matmul(scores);
        for m in 0..x.rows() {
            let s = self.scale.as_ref().map_or(1.0, |s| s[m]);
            for n in 0..x.cols() {
                x[(m, n)] = x[(m, n)] * s + self.mean[m];
            }
        }
        Ok(x)
    }
}

/// On-disk JSON layout of a [`PcaModel`].
#[derive(Debug, Clone, Serialize, Deserialize)]
struct PcaDocument {
    mean: Vec<f64>,
    eigenvalues: Vec<f64>,
    /// Row-major `M × M`.
    eigenvectors: Vec<f64>,
    retained: usize,
    standardized: bool,
    feature_names: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scale: Option<Vec<f64>>,
}

impl From<PcaModel> for PcaDocument {
    fn from(m: PcaModel) -> Self {
        Self {
            standardized: m.scale.is_some(),
            mean: m.mean,
            eigenvalues: m.eigenvalues,
            eigenvectors: m.eigenvectors.into_vec(),
            retained: m.retained,
            feature_names: m.feature_names,
            scale: m.scale,
        }
    }
}

impl TryFrom<PcaDocument> for PcaModel {
    type Error = PcaError;

    fn try_from(doc: PcaDocument) -> Result<Self, PcaError> {
        let dims = doc.mean.len();
        let invalid = |msg: String| Err(PcaError::InvalidModel(msg));
        if dims == 0 {
            return invalid("mean is empty".into());
        }
        if doc.eigenvalues.len() != dims || doc.eigenvectors.len() != dims * dims || doc.feature_names.len() != dims {
            return invalid(format!("inconsistent lengths for {dims} dimensions"));
        }
        if doc.retained == 0 || doc.retained > dims {
            return invalid(format!("retained {} outside 1..={dims}", doc.retained));
        }
        match (&doc.scale, doc.standardized) {
            (Some(s), true) if s.len() == dims && s.iter().all(|v| *v > 0.0) => {}
            (None, false) => {}
            _ => return invalid("standardized flag and scale vector disagree".into()),
        }
        Ok(Self {
            mean: doc.mean,
            scale: doc.scale,
            eigenvalues: doc.eigenvalues,
            eigenvectors: Matrix::from_row_major(dims, dims, doc.eigenvectors),
            retained: doc.retained,
            feature_names: doc.feature_names,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn data(rows: &[&[f64]]) -> DataMatrix {
        DataMatrix::new(Matrix::from_rows(rows)).unwrap()
    }

    #[test]
    fn mean_of_rows() {
        assert_eq!(
            empirical_mean(&data(&[&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]])),
            vec![2.0, 2.0]
        );
        assert_eq!(empirical_mean(&data(&[&[4.0], &[-1.5]])), vec![4.0, -1.5]);
    }

    #[test]
    fn data_matrix_validation() {
        assert!(matches!(
            DataMatrix::new(Matrix::zeros(0, 3)),
            Err(PcaError::Empty { .. })
        ));
        let bad = Matrix::from_rows(&[[1.0, f64::INFINITY]]);
        assert!(matches!(
            DataMatrix::new(bad),
            Err(PcaError::NonFinite { row: 0, col: 1 })
        ));
        assert!(matches!(
            DataMatrix::from_observations(&[vec![1.0, 2.0], vec![1.0]]),
            Err(PcaError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn subtract_mean() {
        let x = data(&[&[1.0, 2.0, 3.0]]);
        assert_eq!(
            mean_subtract(&x, &[2.0]).unwrap(),
            Matrix::from_rows(&[[-1.0, 0.0, 1.0]])
        );
        assert_eq!(mean_subtract(&x, &[0.0]).unwrap(), x.matrix().clone());
        assert!(matches!(
            mean_subtract(&x, &[0.0, 1.0]),
            Err(PcaError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn covariance_small() {
        let b = Matrix::from_rows(&[[-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0]]);
        let c = covariance(&b);
        for v in c.as_slice() {
            assert!((v - 2.0 / 3.0).abs() < 1e-15);
        }
        assert_eq!(covariance(&Matrix::zeros(3, 4)), Matrix::zeros(3, 3));
    }

    #[test]
    fn sort_is_descending_and_stable() {
        let v = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]);
        let (vals, vecs) = sort_components(&[0.0, 4.0 / 3.0], &v).unwrap();
        assert_eq!(vals, vec![4.0 / 3.0, 0.0]);
        assert_eq!(vecs, Matrix::from_rows(&[[2.0, 1.0], [4.0, 3.0]]));

        let id = Matrix::identity(3);
        let (vals, vecs) = sort_components(&[3.0, 2.0, 1.0], &id).unwrap();
        assert_eq!(vals, vec![3.0, 2.0, 1.0]);
        assert_eq!(vecs, id);

        let (vals, vecs) = sort_components(&[1.0, 1.0, 2.0], &id).unwrap();
        assert_eq!(vals, vec![2.0, 1.0, 1.0]);
        assert_eq!(vecs.column(0), vec![0.0, 0.0, 1.0]);
        assert_eq!(vecs.column(1), vec![1.0, 0.0, 0.0]);
        assert_eq!(vecs.column(2), vec![0.0, 1.0, 0.0]);

        assert!(matches!(
            sort_components(&[1.0], &id),
            Err(PcaError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn select() {
        let id = Matrix::identity(3);
        assert_eq!(select_components(&id, 3).unwrap(), id);
        assert_eq!(select_components(&id, 1).unwrap().column(0), vec![1.0, 0.0, 0.0]);
        assert!(matches!(select_components(&id, 0), Err(PcaError::BadK { .. })));
        assert!(matches!(select_components(&id, 4), Err(PcaError::BadK { .. })));
    }

    #[test]
    fn project_onto_dominant_axis() {
        let b = Matrix::from_rows(&[[-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0]]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let fv = Matrix::from_rows(&[[h], [h]]);
        let scores = project(&fv, &b).unwrap();
        let s2 = std::f64::consts::SQRT_2;
        for (got, want) in scores.as_slice().iter().zip([-s2, 0.0, s2]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!(project(&Matrix::zeros(3, 1), &b).is_err());
    }

    #[test]
    fn fit_small_and_transform() {
        let x = data(&[&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]]);
        let model = PcaModel::fit(&x, ComponentSelection::Count(1)).unwrap();
        assert!((model.eigenvalues()[0] - 4.0 / 3.0).abs() < 1e-14);
        assert!(model.eigenvalues()[1].abs() < 1e-14);
        let train = model.transform(&x).unwrap();
        let b = mean_subtract(&x, model.mean()).unwrap();
        assert_eq!(train, project(&model.feature_vector(), &b).unwrap());

        let at_mean = model.transform_one(model.mean()).unwrap();
        assert_eq!(at_mean, vec![0.0]);
        // default selection keeps one component: the second carries no variance
        assert_eq!(PcaModel::fit(&x, ComponentSelection::default()).unwrap().retained(), 1);
    }

    #[test]
    fn fit_needs_two_observations() {
        let x = data(&[&[1.0], &[2.0]]);
        assert!(matches!(
            PcaModel::fit(&x, ComponentSelection::Count(1)),
            Err(PcaError::TooFewObservations(1))
        ));
    }

    #[test]
    fn bad_selection() {
        let x = data(&[&[1.0, 2.0, 4.0], &[0.0, 1.0, 0.0]]);
        assert!(matches!(
            PcaModel::fit(&x, ComponentSelection::Count(3)),
            Err(PcaError::BadK { .. })
        ));
        assert!(matches!(
            PcaModel::fit(&x, ComponentSelection::VarianceRatio(1.5)),
            Err(PcaError::BadVarianceRatio(_))
        ));
    }

    #[test]
    fn standardized_fit_roundtrips() {
        let x = data(&[
            &[1000.0, 2000.0, 1500.0, 1200.0],
            &[1.0, 3.0, 2.0, 2.5],
            &[0.1, 0.4, 0.2, 0.2],
        ]);
        let opts = PcaOptions {
            selection: ComponentSelection::Count(3),
            standardize: true,
            feature_names: vec!["a".into(), "b".into(), "c".into()],
        };
        let model = PcaModel::fit_with(&x, &opts).unwrap();
        assert!(model.is_standardized());
        // unit-variance features: eigenvalues sum to the dimension count
        let total: f64 = model.eigenvalues().iter().sum();
        assert!((total - 3.0).abs() < 1e-12);
        let back = model.inverse_transform(&model.transform(&x).unwrap()).unwrap();
        assert!(back.max_abs_diff(x.matrix()) < 1e-9);

        let json = serde_json::to_string(&model).unwrap();
        assert!(json.contains("\"standardized\":true"));
        let restored: PcaModel = serde_json::from_str(&json).unwrap();
        assert_eq!(restored, model);
    }

    #[test]
    fn json_layout_and_validation() {
        let x = data(&[&[1.0, 2.0, 4.0], &[0.0, 1.0, 0.5]]);
        let model = PcaModel::fit(&x, ComponentSelection::Count(2)).unwrap();
        let value: serde_json::Value = serde_json::to_value(&model).unwrap();
        for key in [
            "mean",
            "eigenvalues",
            "eigenvectors",
            "retained",
            "standardized",
            "feature_names",
        ] {
            assert!(value.get(key).is_some(), "missing {key}");
        }
        assert_eq!(value["eigenvectors"].as_array().unwrap().len(), 4);
        assert!(value.get("scale").is_none());

        let mut broken = value.clone();
        broken["retained"] = 3.into();
        assert!(serde_json::from_value::<PcaModel>(broken).is_err());
        let mut broken = value;
        broken["standardized"] = true.into();
        assert!(serde_json::from_value::<PcaModel>(broken).is_err());
    }

    fn arb_data() -> impl Strategy<Value = DataMatrix> {
        (1usize..6, 2usize..20).prop_flat_map(|(m, n)| {
            prop::collection::vec(-100.0f64..100.0, m * n)
                .prop_map(move |v| DataMatrix::new(Matrix::from_row_major(m, n, v)).unwrap())
        })
    }

    proptest! {
        #[test]
        fn centered_rows_sum_to_zero(x in arb_data()) {
            let b = mean_subtract(&x, &empirical_mean(&x)).unwrap();
            let scale = x.observations() as f64 * x.matrix().max_abs().max(1.0);
            for m in 0..b.rows() {
                prop_assert!(b.row(m).iter().sum::<f64>().abs() <= 1e-12 * scale);
            }
        }

        #[test]
        fn model_invariants(x in arb_data()) {
            let model = PcaModel::fit(&x, ComponentSelection::Count(x.dims())).unwrap();
            let lambda = model.eigenvalues();
            let eps = 1e-9 * lambda[0].max(1.0);
            prop_assert!(lambda.windows(2).all(|w| w[0] >= w[1]));
            prop_assert!(lambda.iter().all(|&l| l >= -eps));
            let v = model.eigenvectors();
            let gram = v.transpose().matmul(v);
            prop_assert!(gram.max_abs_diff(&Matrix::identity(x.dims())) < 1e-9);

            let c = covariance(&mean_subtract(&x, model.mean()).unwrap());
            let trace = c.trace();
            let sum: f64 = lambda.iter().sum();
            prop_assert!((sum - trace).abs() <= 1e-9 * trace.abs().max(1e-300));

            let scores = model.transform(&x).unwrap();
            let back = model.inverse_transform(&scores).unwrap();
            prop_assert!(back.max_abs_diff(x.matrix()) < 1e-8 * x.matrix().max_abs().max(1e-300));

            // score variance along each component equals its eigenvalue
            let n = x.observations() as f64;
            let score_scale = scores.max_abs().max(1e-300);
            for i in 0..scores.rows() {
                let row = scores.row(i);
                let mean = row.iter().sum::<f64>() / n;
                let var = row.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
                prop_assert!((var - lambda[i]).abs() <= 1e-9 * lambda[0].max(1e-300));
                prop_assert!(mean.abs() <= 1e-9 * score_scale);
            }
        }

        #[test]
        fn json_roundtrip_is_exact(x in arb_data()) {
            let model = PcaModel::fit(&x, ComponentSelection::default()).unwrap();
            let restored: PcaModel = serde_json::from_str(&serde_json::to_string(&model).unwrap()).unwrap();
            prop_assert_eq!(restored, model);
        }
    }
}
