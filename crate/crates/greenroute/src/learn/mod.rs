//! Feature reduction and parameter prediction.
//!
//! PCA over the snapshot feature matrix (covariance eigendecomposition via
//! the in-house Jacobi solver), least-squares regression from the reduced
//! features to a utility parameter in `[0, 100]`, k-fold cross-validation for
//! choosing the component count, and the relative-error accuracy metric.

mod eig;
mod model_io;

pub use eig::eig_sym;
pub use model_io::PredictorModel;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg::Matrix;
use crate::par;
use crate::traffic::FeatureMatrix;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("matrix is not symmetric at ({row}, {col})")]
    NonSymmetric { row: usize, col: usize },
    #[error("eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("component count {k} outside 1..={n}")]
    KOutOfRange { k: usize, n: usize },
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{samples} samples cannot fill {folds} folds")]
    InsufficientFolds { samples: usize, folds: usize },
    #[error("model file error: {0}")]
    Io(#[from] std::io::Error),
    #[error("model file line {line}: {msg}")]
    ParseModel { line: usize, msg: String },
}

/// Fitted PCA: feature mean, descending covariance spectrum, orthonormal
/// component matrix (columns are eigenvectors), and the selected count `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub components: Matrix,
    pub k: usize,
    /// Set when the training rows were all identical (zero covariance).
    pub degenerate: bool,
}

impl PcaModel {
    /// Fits mean, covariance `(1/d) B^T B`, and its eigendecomposition.
    pub fn fit(x: &FeatureMatrix, k: usize) -> Result<Self, LearnError> {
        let d = x.sample_count();
        let n = x.feature_count();
        if d < 2 {
            return Err(LearnError::TooFewSamples { need: 2, got: d });
        }
        if k == 0 || k > n {
            return Err(LearnError::KOutOfRange { k, n });
        }
        let values = x.values();
        let mut mean = vec![0.0; n];
        for r in 0..d {
            for (m, v) in mean.iter_mut().zip(values.row(r)) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= d as f64;
        }
        let mut cov = Matrix::zeros(n, n);
        for r in 0..d {
            let row = values.row(r);
            for i in 0..n {
                let bi = row[i] - mean[i];
                if bi == 0.0 {
                    continue;
                }
                for j in i..n {
                    cov[(i, j)] += bi * (row[j] - mean[j]);
                }
            }
        }
        for i in 0..n {
            for j in i..n {
                let v = cov[(i, j)] / d as f64;
                cov[(i, j)] = v;
                cov[(j, i)] = v;
            }
        }
        let degenerate = cov.max_abs() <= 1e-30;
        let (eigenvalues, components) = eig_sym(&cov)?;
        Ok(PcaModel {
            mean,
            eigenvalues,
            components,
            k,
            degenerate,
        })
    }

    pub fn feature_count(&self) -> usize {
        self.mean.len()
    }

    /// First `k` eigenvector columns as the n×k projection matrix.
    pub fn projection_matrix(&self) -> Matrix {
        self.components.left_columns(self.k)
    }

    /// Projects sample rows into the leading `k`-component space:
    /// `(x - mean) W`.
    pub fn project_rows(&self, rows: &Matrix) -> Result<Matrix, LearnError> {
        self.project_rows_k(rows, self.k)
    }

    pub(crate) fn project_rows_k(&self, rows: &Matrix, k: usize) -> Result<Matrix, LearnError> {
        let n = self.feature_count();
        if rows.cols() != n {
            return Err(LearnError::DimensionMismatch {
                expected: n,
                got: rows.cols(),
            });
        }
        let mut out = Matrix::zeros(rows.rows(), k);
        for r in 0..rows.rows() {
            let row = rows.row(r);
            for c in 0..k {
                let mut acc = 0.0;
                for (i, (x, mu)) in row.iter().zip(&self.mean).enumerate() {
                    acc += (x - mu) * self.components[(i, c)];
                }
                out[(r, c)] = acc;
            }
        }
        Ok(out)
    }

    pub fn project_features(&self, x: &FeatureMatrix) -> Result<Matrix, LearnError> {
        self.project_rows(x.values())
    }

    pub fn project_vector(&self, v: &[f64]) -> Result<Vec<f64>, LearnError> {
        let rows = Matrix::from_vec(1, v.len(), v.to_vec());
        Ok(self.project_rows(&rows)?.row(0).to_vec())
    }

    /// Percentage of total variance carried by the leading `self.k`
    /// components.
    pub fn variance_retained(&self) -> f64 {
        variance_retained(&self.eigenvalues, self.k)
    }
}

/// `100 * sum(first k eigenvalues) / sum(all)`; 0 when the spectrum is empty
/// or sums to zero.
pub fn variance_retained(eigenvalues: &[f64], k: usize) -> f64 {
    assert!(k <= eigenvalues.len(), "k exceeds spectrum length");
    let total: f64 = eigenvalues.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    let head: f64 = eigenvalues[..k].iter().sum();
    100.0 * head / total
}

/// Which utility parameter a regression predicts. The conditional variants
/// take the other parameter's true value as one extra feature after the PCA
/// projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetParam {
    Umin,
    Umax,
    UminGivenUmax,
    UmaxGivenUmin,
}

impl TargetParam {
    pub fn as_str(&self) -> &'static str {
        match self {
            TargetParam::Umin => "umin",
            TargetParam::Umax => "umax",
            TargetParam::UminGivenUmax => "umin_given_umax",
            TargetParam::UmaxGivenUmin => "umax_given_umin",
        }
    }

}

impl std::str::FromStr for TargetParam {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "umin" => Ok(TargetParam::Umin),
            "umax" => Ok(TargetParam::Umax),
            "umin_given_umax" => Ok(TargetParam::UminGivenUmax),
            "umax_given_umin" => Ok(TargetParam::UmaxGivenUmin),
            _ => Err(()),
        }
    }
}

/// Least-squares weights (bias first) mapping reduced features to a utility
/// parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionModel {
    pub weights: Vec<f64>,
    pub target: TargetParam,
    /// Set when the normal equations were rank-deficient and a small ridge
    /// term produced the solution.
    pub ridged: bool,
}

impl RegressionModel {
    /// Minimizes `||[1 Z] w - y||^2` via the normal equations.
    pub fn fit(z: &Matrix, y: &[f64], target: TargetParam) -> Result<Self, LearnError> {
        let d = z.rows();
        let k = z.cols();
        if y.len() != d {
            return Err(LearnError::DimensionMismatch {
                expected: d,
                got: y.len(),
            });
        }
        if d == 0 {
            return Err(LearnError::TooFewSamples { need: 1, got: 0 });
        }
        // Gram matrix of the design [1 Z] and its right-hand side.
        let m = k + 1;
        let mut gram = Matrix::zeros(m, m);
        let mut rhs = vec![0.0; m];
        for (r, &yr) in y.iter().enumerate() {
            let row = z.row(r);
            for i in 0..m {
                let xi = if i == 0 { 1.0 } else { row[i - 1] };
                rhs[i] += xi * yr;
                for j in i..m {
                    let xj = if j == 0 { 1.0 } else { row[j - 1] };
                    gram[(i, j)] += xi * xj;
                }
            }
        }
        for i in 0..m {
            for j in i..m {
                gram[(j, i)] = gram[(i, j)];
            }
        }
        let (weights, ridged) = match solve_linear(&gram, &rhs) {
            Some(w) => (w, false),
            None => {
                let mut damped = gram.clone();
                for i in 0..m {
                    damped[(i, i)] += 1e-8;
                }
                let w = solve_linear(&damped, &rhs)
                    .expect("ridge-damped normal equations are nonsingular");
                (w, true)
            }
        };
        Ok(RegressionModel {
            weights,
            target,
            ridged,
        })
    }

    /// `bias + w . z`, clamped to the parameter range `[0, 100]`.
    pub fn predict(&self, z: &[f64]) -> Result<f64, LearnError> {
        if z.len() + 1 != self.weights.len() {
            return Err(LearnError::DimensionMismatch {
                expected: self.weights.len() - 1,
                got: z.len(),
            });
        }
        let raw = self.weights[0]
            + self.weights[1..]
                .iter()
                .zip(z)
                .map(|(w, x)| w * x)
                .sum::<f64>();
        Ok(raw.clamp(0.0, 100.0))
    }

    pub fn residual_sum_of_squares(&self, z: &Matrix, y: &[f64]) -> f64 {
        (0..z.rows())
            .map(|r| {
                let raw = self.weights[0]
                    + self.weights[1..]
                        .iter()
                        .zip(z.row(r))
                        .map(|(w, x)| w * x)
                        .sum::<f64>();
                let e = raw - y[r];
                e * e
            })
            .sum()
    }
}

/// Gaussian elimination with partial pivoting; `None` when a pivot collapses
/// (rank-deficient system).
fn solve_linear(a: &Matrix, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.rows();
    let mut m = a.clone();
    let mut rhs = b.to_vec();
    let scale = m.max_abs().max(1.0);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| m[(i, col)].abs().total_cmp(&m[(j, col)].abs()))
            .unwrap();
        if m[(pivot_row, col)].abs() <= 1e-12 * scale {
            return None;
        }
        if pivot_row != col {
            for j in 0..n {
                let tmp = m[(col, j)];
                m[(col, j)] = m[(pivot_row, j)];
                m[(pivot_row, j)] = tmp;
            }
            rhs.swap(col, pivot_row);
        }
        for row in (col + 1)..n {
            let f = m[(row, col)] / m[(col, col)];
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                m[(row, j)] -= f * m[(col, j)];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = rhs[col];
        for j in (col + 1)..n {
            acc -= m[(col, j)] * x[j];
        }
        x[col] = acc / m[(col, col)];
    }
    Some(x)
}

/// Relative-error accuracy in percent: `100 (1 - |tv - pv| / tv)` clamped to
/// `[0, 100]`. A zero true value scores 100 when the prediction is within
/// `eps`, else 0. `eps` is otherwise the reporting tolerance band, not part
/// of the formula.
pub fn prediction_accuracy(tv: f64, pv: f64, eps: f64) -> f64 {
    debug_assert!(tv >= 0.0, "true value must be nonnegative");
    if tv == 0.0 {
        return if pv.abs() <= eps { 100.0 } else { 0.0 };
    }
    (100.0 * (1.0 - (tv - pv).abs() / tv)).clamp(0.0, 100.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvRow {
    pub k: usize,
    pub size_reduction: f64,
    pub mean_accuracy: f64,
    pub variance_retained: f64,
}

/// Per-k cross-validation scores plus the selected component count.
#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub feature_count: usize,
    pub rows: Vec<CvRow>,
    pub chosen_k: usize,
}

#[derive(Debug, Clone)]
pub struct CvConfig {
    pub k_grid: Vec<usize>,
    pub folds: usize,
    pub seed: u64,
    pub epsilon: f64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            k_grid: Vec::new(),
            folds: 10,
            seed: 0,
            epsilon: 3.0,
        }
    }
}

/// Evenly sized fold index sets over a seeded shuffle of `0..d`.
pub fn make_folds(d: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..d).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let base = d / folds;
    let extra = d % folds;
    let mut out = Vec::with_capacity(folds);
    let mut pos = 0;
    for f in 0..folds {
        let len = base + usize::from(f < extra);
        out.push(idx[pos..pos + len].to_vec());
        pos += len;
    }
    out
}

/// Default component grid when none is configured: small counts plus a
/// coarse percentage ladder up to the full feature width.
pub fn default_k_grid(n: usize) -> Vec<usize> {
    let mut grid: Vec<usize> = (1..=5).filter(|k| *k <= n).collect();
    for pct in [10, 20, 30, 40, 50, 65, 80, 100] {
        let k = ((pct as f64 / 100.0) * n as f64).round() as usize;
        grid.push(k.clamp(1, n));
    }
    grid.sort_unstable();
    grid.dedup();
    grid
}

/// For every `k` on the grid: fit PCA + regression on each train split,
/// score accuracy on the held-out fold, and average over the rotations.
/// Deterministic for a given seed; fold fits may run concurrently but the
/// report equals sequential execution.
pub fn cross_validate_k(
    x: &FeatureMatrix,
    labels: &[f64],
    cfg: &CvConfig,
) -> Result<CvReport, LearnError> {
    let d = x.sample_count();
    let n = x.feature_count();
    if labels.len() != d {
        return Err(LearnError::DimensionMismatch {
            expected: d,
            got: labels.len(),
        });
    }
    if cfg.folds < 2 || d < cfg.folds {
        return Err(LearnError::InsufficientFolds {
            samples: d,
            folds: cfg.folds,
        });
    }
    let k_grid = if cfg.k_grid.is_empty() {
        default_k_grid(n)
    } else {
        let mut g = cfg.k_grid.clone();
        g.sort_unstable();
        g.dedup();
        g
    };
    if let Some(&bad) = k_grid.iter().find(|&&k| k == 0 || k > n) {
        return Err(LearnError::KOutOfRange { k: bad, n });
    }
    let k_max = *k_grid.last().unwrap();

    // Spectrum of the full data, for the variance-retained column.
    let full = PcaModel::fit(x, n.min(k_max))?;

    let folds = make_folds(d, cfg.folds, cfg.seed);
    // One PCA per fold (the eigendecomposition is k-independent), then one
    // regression per (fold, k).
    let fold_scores: Vec<Result<Vec<f64>, LearnError>> = par::map_slice(&folds, |val_idx| {
        let train_idx: Vec<usize> = (0..d).filter(|i| !val_idx.contains(i)).collect();
        let train_rows: Vec<Vec<f64>> = train_idx
            .iter()
            .map(|&i| x.values().row(i).to_vec())
            .collect();
        let train = FeatureMatrix::new(
            train_idx.iter().map(|i| x.labels()[*i].clone()).collect(),
            Matrix::from_rows(&train_rows),
        );
        let pca = PcaModel::fit(&train, k_max)?;
        let train_y: Vec<f64> = train_idx.iter().map(|&i| labels[i]).collect();
        let val_rows: Vec<Vec<f64>> = val_idx
            .iter()
            .map(|&i| x.values().row(i).to_vec())
            .collect();
        let val = Matrix::from_rows(&val_rows);

        let z_train_full = pca.project_rows_k(train.values(), k_max)?;
        let z_val_full = pca.project_rows_k(&val, k_max)?;
        let mut per_k = Vec::with_capacity(k_grid.len());
        for &k in &k_grid {
            let z_train = z_train_full.left_columns(k);
            let reg = RegressionModel::fit(&z_train, &train_y, TargetParam::Umin)?;
            let mut acc = 0.0;
            for (pos, &i) in val_idx.iter().enumerate() {
                let zi = &z_val_full.row(pos)[..k];
                let pv = reg.predict(zi)?;
                acc += prediction_accuracy(labels[i], pv, cfg.epsilon);
            }
            per_k.push(acc / val_idx.len() as f64);
        }
        Ok(per_k)
    });

    let mut mean_acc = vec![0.0; k_grid.len()];
    for fold in fold_scores {
        let fold = fold?;
        for (m, v) in mean_acc.iter_mut().zip(fold) {
            *m += v;
        }
    }
    for m in &mut mean_acc {
        *m /= cfg.folds as f64;
    }

    let rows: Vec<CvRow> = k_grid
        .iter()
        .zip(&mean_acc)
        .map(|(&k, &acc)| CvRow {
            k,
            size_reduction: 100.0 * (1.0 - k as f64 / n as f64),
            mean_accuracy: acc,
            variance_retained: variance_retained(&full.eigenvalues, k),
        })
        .collect();

    // Smallest grid k within one point of the plateau maximum, inflated by
    // up to 5% of the feature width.
    let best = mean_acc.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let base_k = rows
        .iter()
        .find(|r| r.mean_accuracy >= best - 1.0)
        .map(|r| r.k)
        .unwrap_or(1);
    let chosen_k = (base_k + (0.05 * n as f64).floor() as usize).min(n);

    Ok(CvReport {
        feature_count: n,
        rows,
        chosen_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::Topology;
    use crate::traffic::{synth_snapshots, assemble_feature_matrix};
    use proptest::prelude::*;

    fn fm(rows: &[Vec<f64>]) -> FeatureMatrix {
        let labels = (0..rows.len()).map(|i| format!("s{i}")).collect();
        FeatureMatrix::new(labels, Matrix::from_rows(rows))
    }

    #[test]
    fn pca_two_point_cloud() {
        let x = fm(&[vec![1.0, 0.0], vec![3.0, 0.0]]);
        let m = PcaModel::fit(&x, 1).unwrap();
        assert_eq!(m.mean, vec![2.0, 0.0]);
        assert_eq!(m.eigenvalues, vec![1.0, 0.0]);
        // Sign convention: leading entry positive.
        assert_eq!(m.components[(0, 0)], 1.0);
        assert_eq!(m.components[(1, 0)], 0.0);
        assert!(!m.degenerate);
    }

    #[test]
    fn pca_size_reduction_arithmetic() {
        for (n, k, expect) in [(132usize, 40usize, 69.7), (462, 148, 68.0), (272, 96, 64.7)] {
            let reduction = 100.0 * (1.0 - k as f64 / n as f64);
            assert!(
                (reduction - expect).abs() < 0.05,
                "n={n} k={k}: {reduction}"
            );
        }
    }

    #[test]
    fn pca_full_rank_retains_everything() {
        let x = fm(&[
            vec![1.0, 2.0, 0.5],
            vec![0.0, 1.0, 2.0],
            vec![2.0, 0.0, 1.0],
            vec![1.5, 1.5, 1.5],
        ]);
        let m = PcaModel::fit(&x, 3).unwrap();
        assert!((m.variance_retained() - 100.0).abs() < 1e-9);
        // Projecting and back-projecting with the full basis is lossless.
        let z = m.project_features(&x).unwrap();
        let back = z.matmul(&m.projection_matrix().transpose());
        for r in 0..x.sample_count() {
            for c in 0..3 {
                let restored = back[(r, c)] + m.mean[c];
                assert!((restored - x.values()[(r, c)]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn pca_projects_mean_to_zero() {
        let x = fm(&[vec![1.0, 2.0], vec![3.0, 6.0], vec![2.0, 4.0]]);
        let m = PcaModel::fit(&x, 2).unwrap();
        let z = m.project_vector(&m.mean.clone()).unwrap();
        assert!(z.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn pca_degenerate_rows_flagged() {
        let x = fm(&[vec![1.0, 2.0], vec![1.0, 2.0], vec![1.0, 2.0]]);
        let m = PcaModel::fit(&x, 1).unwrap();
        assert!(m.degenerate);
        assert!(m.eigenvalues.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn pca_rejects_bad_k_and_small_d() {
        let x = fm(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(matches!(
            PcaModel::fit(&x, 0),
            Err(LearnError::KOutOfRange { .. })
        ));
        assert!(matches!(
            PcaModel::fit(&x, 3),
            Err(LearnError::KOutOfRange { .. })
        ));
        let one = fm(&[vec![1.0, 0.0]]);
        assert!(matches!(
            PcaModel::fit(&one, 1),
            Err(LearnError::TooFewSamples { .. })
        ));
    }

    #[test]
    fn variance_retained_examples() {
        assert_eq!(variance_retained(&[3.0, 1.0], 1), 75.0);
        assert_eq!(variance_retained(&[3.0, 1.0], 2), 100.0);
        assert_eq!(variance_retained(&[1.0, 1.0, 1.0, 1.0], 2), 50.0);
        assert_eq!(variance_retained(&[0.0, 0.0], 1), 0.0);
    }

    #[test]
    fn regression_exact_affine_fit() {
        let z = Matrix::from_rows(&[
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![2.0, 1.0],
            vec![1.0, 3.0],
        ]);
        let y: Vec<f64> = (0..4)
            .map(|r| 5.0 + 2.0 * z[(r, 0)] - 1.5 * z[(r, 1)])
            .collect();
        let m = RegressionModel::fit(&z, &y, TargetParam::Umin).unwrap();
        assert!(m.residual_sum_of_squares(&z, &y) < 1e-18);
        assert!((m.weights[0] - 5.0).abs() < 1e-9);
        assert!((m.weights[1] - 2.0).abs() < 1e-9);
        assert!((m.weights[2] + 1.5).abs() < 1e-9);
        assert!(!m.ridged);
    }

    #[test]
    fn regression_constant_labels() {
        let z = Matrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]);
        let m = RegressionModel::fit(&z, &[40.0, 40.0, 40.0], TargetParam::Umax).unwrap();
        assert!((m.weights[0] - 40.0).abs() < 1e-8);
        assert!(m.weights[1].abs() < 1e-8);
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn regression_matches_normal_equation_oracle() {
        // Independent oracle: textbook elimination without pivoting, written
        // here from scratch against the explicit normal equations.
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let d = 20;
        let k = 3;
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for _ in 0..d {
            let row: Vec<f64> = (0..k).map(|_| rng.random_range(-2.0..2.0)).collect();
            y.push(rng.random_range(0.0..100.0));
            rows.push(row);
        }
        let z = Matrix::from_rows(&rows);
        let m = RegressionModel::fit(&z, &y, TargetParam::Umin).unwrap();

        let dim = k + 1;
        let mut g = vec![vec![0.0; dim + 1]; dim];
        for r in 0..d {
            let mut xr = vec![1.0];
            xr.extend_from_slice(&rows[r]);
            for i in 0..dim {
                for j in 0..dim {
                    g[i][j] += xr[i] * xr[j];
                }
                g[i][dim] += xr[i] * y[r];
            }
        }
        for col in 0..dim {
            for row in (col + 1)..dim {
                let f = g[row][col] / g[col][col];
                for j in col..=dim {
                    g[row][j] -= f * g[col][j];
                }
            }
        }
        let mut expect = vec![0.0; dim];
        for col in (0..dim).rev() {
            let mut acc = g[col][dim];
            for j in (col + 1)..dim {
                acc -= g[col][j] * expect[j];
            }
            expect[col] = acc / g[col][col];
        }
        for (w, e) in m.weights.iter().zip(&expect) {
            assert!((w - e).abs() < 1e-8, "{w} vs {e}");
        }
    }

    #[test]
    fn regression_rank_deficient_gets_ridged() {
        // Second column duplicates the first: the gram matrix is singular.
        let z = Matrix::from_rows(&[
            vec![1.0, 1.0],
            vec![2.0, 2.0],
            vec![3.0, 3.0],
            vec![4.0, 4.0],
        ]);
        let m = RegressionModel::fit(&z, &[1.0, 2.0, 3.0, 4.0], TargetParam::Umin).unwrap();
        assert!(m.ridged);
        assert!(m.weights.iter().all(|w| w.is_finite()));
    }

    #[test]
    fn predict_clamps_and_checks_dims() {
        let m = RegressionModel {
            weights: vec![40.0, 0.0],
            target: TargetParam::Umin,
            ridged: false,
        };
        assert_eq!(m.predict(&[123.0]).unwrap(), 40.0);
        let m = RegressionModel {
            weights: vec![112.0],
            target: TargetParam::Umin,
            ridged: false,
        };
        assert_eq!(m.predict(&[]).unwrap(), 100.0);
        assert!(matches!(
            m.predict(&[1.0]),
            Err(LearnError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(prediction_accuracy(50.0, 50.0, 3.0), 100.0);
        assert_eq!(prediction_accuracy(40.0, 30.0, 3.0), 75.0);
        assert_eq!(prediction_accuracy(20.0, 40.0, 3.0), 0.0);
        // Division by the true value makes the metric asymmetric.
        assert_ne!(
            prediction_accuracy(40.0, 30.0, 3.0),
            prediction_accuracy(30.0, 40.0, 3.0)
        );
        // Zero true value: within eps scores full marks.
        assert_eq!(prediction_accuracy(0.0, 2.0, 3.0), 100.0);
        assert_eq!(prediction_accuracy(0.0, 5.0, 3.0), 0.0);
    }

    #[test]
    fn default_grid_spans_the_feature_width() {
        let grid = default_k_grid(132);
        assert_eq!(grid.first(), Some(&1));
        assert_eq!(grid.last(), Some(&132));
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(default_k_grid(3), vec![1, 2, 3]);
        assert_eq!(default_k_grid(1), vec![1]);
    }

    #[test]
    fn folds_partition_every_sample_once() {
        let folds = make_folds(25, 10, 9);
        assert_eq!(folds.len(), 10);
        let mut seen: Vec<usize> = folds.iter().flatten().copied().collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..25).collect::<Vec<_>>());
        let sizes: Vec<usize> = folds.iter().map(|f| f.len()).collect();
        assert!(sizes.iter().all(|s| *s == 2 || *s == 3));
    }

    #[test]
    fn cv_accuracy_plateaus_at_latent_dim() {
        let t = Topology::parse(
            "node A\nnode B\nnode C\nnode D\n\
             link A B 10\nlink B A 10\nlink B C 10\nlink C B 10\n\
             link C D 10\nlink D C 10\nlink A D 10\nlink D A 10\n",
        )
        .unwrap();
        let snaps = synth_snapshots(&t, 2, 60, 5);
        let x = assemble_feature_matrix(&snaps, &t).unwrap();
        // Labels exactly affine in the features.
        let labels: Vec<f64> = (0..x.sample_count())
            .map(|r| {
                let row = x.row(r);
                20.0 + 2.0 * row[0] + 1.0 * row[5] + 0.5 * row[9]
            })
            .collect();
        let cfg = CvConfig {
            k_grid: vec![1, 2, 4, 8],
            folds: 10,
            seed: 7,
            epsilon: 3.0,
        };
        let report = cross_validate_k(&x, &labels, &cfg).unwrap();
        let acc: Vec<f64> = report.rows.iter().map(|r| r.mean_accuracy).collect();
        assert!(acc[1] > acc[0], "k=2 should beat k=1: {acc:?}");
        assert!(acc[1] > 99.0, "k=latent_dim should be near-perfect: {acc:?}");
        assert!(acc[2] > 99.0 && acc[3] > 99.0, "plateau: {acc:?}");
        for r in &report.rows {
            assert!(
                (r.size_reduction - 100.0 * (1.0 - r.k as f64 / 12.0)).abs() < 1e-9
            );
        }
    }

    #[test]
    fn reconstruction_error_matches_discarded_variance() {
        // Mean squared reconstruction error over the training rows equals
        // the sum of the discarded eigenvalues.
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|_| (0..5).map(|_| rng.random_range(0.0..4.0)).collect())
            .collect();
        let x = fm(&rows);
        let m = PcaModel::fit(&x, 2).unwrap();
        let z = m.project_features(&x).unwrap();
        let back = z.matmul(&m.projection_matrix().transpose());
        let mut mse = 0.0;
        for r in 0..12 {
            for c in 0..5 {
                let err = back[(r, c)] + m.mean[c] - x.values()[(r, c)];
                mse += err * err;
            }
        }
        mse /= 12.0;
        let discarded: f64 = m.eigenvalues[2..].iter().sum();
        assert!((mse - discarded).abs() < 1e-10, "{mse} vs {discarded}");
    }

    #[test]
    fn cv_rejects_insufficient_samples() {
        let x = fm(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]);
        let cfg = CvConfig {
            k_grid: vec![1],
            folds: 10,
            ..CvConfig::default()
        };
        assert!(matches!(
            cross_validate_k(&x, &[1.0, 2.0, 3.0], &cfg),
            Err(LearnError::InsufficientFolds { .. })
        ));
    }

    proptest! {
        // Orthonormality and spectrum invariants on random data.
        #[test]
        fn fitted_models_are_orthonormal(seed in 0u64..50) {
            use rand::Rng;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let d = 8;
            let n = 5;
            let rows: Vec<Vec<f64>> = (0..d)
                .map(|_| (0..n).map(|_| rng.random_range(0.0..10.0)).collect())
                .collect();
            let x = fm(&rows);
            let m = PcaModel::fit(&x, 3).unwrap();
            let w = m.projection_matrix();
            let wtw = w.transpose().matmul(&w);
            prop_assert!(wtw.max_abs_diff(&Matrix::identity(3)) < 1e-8);
            prop_assert!(m.eigenvalues.iter().all(|v| *v >= -1e-10));
            // Spectrum sums to the covariance trace.
            let mut mean = vec![0.0; n];
            for row in &rows {
                for (m, v) in mean.iter_mut().zip(row) {
                    *m += v / d as f64;
                }
            }
            let mut trace = 0.0;
            for row in &rows {
                for (v, mu) in row.iter().zip(&mean) {
                    trace += (v - mu) * (v - mu) / d as f64;
                }
            }
            let total: f64 = m.eigenvalues.iter().sum();
            prop_assert!((total - trace).abs() < 1e-8 * (1.0 + trace));
        }

        // Nudging any fitted weight never reduces the training residual.
        #[test]
        fn least_squares_is_locally_optimal(seed in 0u64..30) {
            use rand::Rng;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let rows: Vec<Vec<f64>> = (0..12)
                .map(|_| (0..3).map(|_| rng.random_range(-3.0..3.0)).collect())
                .collect();
            let y: Vec<f64> = (0..12).map(|_| rng.random_range(0.0..100.0)).collect();
            let z = Matrix::from_rows(&rows);
            let m = RegressionModel::fit(&z, &y, TargetParam::Umin).unwrap();
            let base = m.residual_sum_of_squares(&z, &y);
            for i in 0..m.weights.len() {
                for delta in [-1e-3, 1e-3] {
                    let mut tweaked = m.clone();
                    tweaked.weights[i] += delta;
                    let rss = tweaked.residual_sum_of_squares(&z, &y);
                    prop_assert!(rss >= base - 1e-7 * (1.0 + base));
                }
            }
        }

        #[test]
        fn accuracy_is_100_on_exact_prediction(tv in 0.01f64..100.0) {
            prop_assert_eq!(prediction_accuracy(tv, tv, 3.0), 100.0);
        }
    }
}
