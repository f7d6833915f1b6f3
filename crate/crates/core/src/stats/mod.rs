//! Linear models from circuit features to measured fidelity.
//!
//! Features are standardized column by column, a ridge model is fit with an
//! unpenalized intercept, and its quality is reported as R² on the training
//! data, over random train/test splits, per held-out family and across
//! noise presets.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::features::FEATURE_NAMES;

/// Schema tag of models over the 24 feature columns in their fixed order.
pub const TABLE2_SCHEMA: &str = "table2-v1";

/// Default ridge strengths searched by cross-validation.
pub const LAMBDA_GRID: [f64; 5] = [1e-4, 1e-3, 1e-2, 1e-1, 1.0];

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("need at least {need} rows, got {got}")]
    TooFewRows { need: usize, got: usize },
    #[error("ridge strength must be non-negative, got {0}")]
    NegativeLambda(f64),
    #[error("target has zero variance")]
    ZeroVariance,
    #[error("length mismatch: {0} vs {1}")]
    Length(usize, usize),
    #[error("column schema mismatch: expected {expected:?}, got {got:?}")]
    Schema {
        expected: Vec<String>,
        got: Vec<String>,
    },
    #[error("family `{0}` has no rows")]
    MissingFamily(String),
    #[error("non-finite value in row {0}")]
    NonFinite(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowMeta {
    pub benchmark: String,
    pub family: String,
    pub n: usize,
    pub seed: u64,
    pub backend: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub columns: Vec<String>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub meta: Vec<RowMeta>,
}

impl Dataset {
    pub fn new(
        columns: Vec<String>,
        x: Vec<Vec<f64>>,
        y: Vec<f64>,
        meta: Vec<RowMeta>,
    ) -> Result<Dataset, StatsError> {
        if x.len() != y.len() {
            return Err(StatsError::Length(x.len(), y.len()));
        }
        if meta.len() != y.len() {
            return Err(StatsError::Length(meta.len(), y.len()));
        }
        for (i, row) in x.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(StatsError::Length(row.len(), columns.len()));
            }
            if !y[i].is_finite() || row.iter().any(|v| !v.is_finite()) {
                return Err(StatsError::NonFinite(i));
            }
        }
        Ok(Dataset {
            columns,
            x,
            y,
            meta,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    /// Rows at the given indices, in that order.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            columns: self.columns.clone(),
            x: rows.iter().map(|&i| self.x[i].clone()).collect(),
            y: rows.iter().map(|&i| self.y[i]).collect(),
            meta: rows.iter().map(|&i| self.meta[i].clone()).collect(),
        }
    }

    /// Keep only the named columns.
    pub fn select(&self, names: &[&str]) -> Result<Dataset, StatsError> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| self.columns.iter().position(|c| c == n))
            .collect::<Option<_>>()
            .ok_or_else(|| StatsError::Schema {
                expected: names.iter().map(|s| s.to_string()).collect(),
                got: self.columns.clone(),
            })?;
        Ok(Dataset {
            columns: names.iter().map(|s| s.to_string()).collect(),
            x: self
                .x
                .iter()
                .map(|r| idx.iter().map(|&i| r[i]).collect())
                .collect(),
            y: self.y.clone(),
            meta: self.meta.clone(),
        })
    }

    fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.len(), self.num_columns(), |i, j| self.x[i][j])
    }
}

fn schema_of(columns: &[String]) -> String {
    if columns.iter().map(String::as_str).eq(FEATURE_NAMES) {
        TABLE2_SCHEMA.to_string()
    } else {
        format!("columns:{}", columns.join(","))
    }
}

fn columns_of(schema: &str) -> Option<Vec<String>> {
    if schema == TABLE2_SCHEMA {
        Some(FEATURE_NAMES.iter().map(|s| s.to_string()).collect())
    } else {
        schema
            .strip_prefix("columns:")
            .map(|c| c.split(',').map(str::to_string).collect())
    }
}

/// Column means and population standard deviations; constant columns get
/// scale 1 so they standardize to zero.
fn moments(d: &Dataset) -> (Vec<f64>, Vec<f64>) {
    let n = d.len() as f64;
    (0..d.num_columns())
        .map(|j| {
            let mean = d.x.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = d.x.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            (
                mean,
                if sd > 1e-12 * (1.0 + mean.abs()) {
                    sd
                } else {
                    1.0
                },
            )
        })
        .unzip()
}

fn apply_scaling(d: &Dataset, means: &[f64], scales: &[f64]) -> Dataset {
    let mut out = d.clone();
    for row in &mut out.x {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (*v - means[j]) / scales[j];
        }
    }
    out
}

pub fn standardize(d: &Dataset) -> Result<(Dataset, Vec<f64>, Vec<f64>), StatsError> {
    if d.len() < 2 {
        return Err(StatsError::TooFewRows {
            need: 2,
            got: d.len(),
        });
    }
    let (means, scales) = moments(d);
    Ok((apply_scaling(d, &means, &scales), means, scales))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub lambda: f64,
    pub columns: Vec<String>,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    /// Coefficients on standardized columns.
    pub coef: Vec<f64>,
    pub intercept: f64,
    pub train_r2: f64,
}

/// On-disk model: everything needed to predict, keyed by column schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub lambda: f64,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    pub coef: Vec<f64>,
    pub intercept: f64,
    pub schema: String,
}

impl FitResult {
    /// Raw, unclamped prediction for one feature row.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.intercept
            + row
                .iter()
                .zip(&self.means)
                .zip(&self.scales)
                .zip(&self.coef)
                .map(|(((v, m), s), c)| c * (v - m) / s)
                .sum::<f64>()
    }

    pub fn predict(&self, d: &Dataset) -> Vec<f64> {
        d.x.iter().map(|r| self.predict_row(r)).collect()
    }

    /// Coefficients in the original column units.
    pub fn raw_coefficients(&self) -> Vec<f64> {
        self.coef
            .iter()
            .zip(&self.scales)
            .map(|(c, s)| c / s)
            .collect()
    }

    pub fn model_file(&self) -> ModelFile {
        ModelFile {
            lambda: self.lambda,
            means: self.means.clone(),
            scales: self.scales.clone(),
            coef: self.coef.clone(),
            intercept: self.intercept,
            schema: schema_of(&self.columns),
        }
    }

    /// Rebuild a fit from its model file; the training R² is not stored.
    pub fn from_model_file(m: &ModelFile) -> Result<FitResult, StatsError> {
        let columns = columns_of(&m.schema).ok_or_else(|| StatsError::Schema {
            expected: vec![TABLE2_SCHEMA.to_string()],
            got: vec![m.schema.clone()],
        })?;
        for len in [m.means.len(), m.scales.len(), m.coef.len()] {
            if len != columns.len() {
                return Err(StatsError::Length(len, columns.len()));
            }
        }
        Ok(FitResult {
            lambda: m.lambda,
            columns,
            means: m.means.clone(),
            scales: m.scales.clone(),
            coef: m.coef.clone(),
            intercept: m.intercept,
            train_r2: f64::NAN,
        })
    }
}

/// Minimize `‖y − Xβ − b‖² + λ‖β‖²` on standardized columns. The solve goes
/// through the SVD of the centered design, so `λ = 0` gives the minimum-norm
/// least-squares solution even when columns are collinear.
pub fn ridge_fit(d: &Dataset, lambda: f64) -> Result<FitResult, StatsError> {
    if !(lambda >= 0.0) {
        return Err(StatsError::NegativeLambda(lambda));
    }
    let (z, means, scales) = standardize(d)?;
    let y_mean = d.y.iter().sum::<f64>() / d.len() as f64;
    let yc = DVector::from_iterator(d.len(), d.y.iter().map(|v| v - y_mean));
    let svd = z.matrix().svd(true, true);
    let (u, vt) = (svd.u.expect("requested U"), svd.v_t.expect("requested Vᵀ"));
    let tol = svd.singular_values.max() * 1e-10 * d.len().max(d.num_columns()) as f64;
    let uty = u.transpose() * yc;
    let shrunk = DVector::from_iterator(
        uty.len(),
        svd.singular_values.iter().zip(uty.iter()).map(|(&s, &b)| {
            if s > tol {
                s * b / (s * s + lambda)
            } else {
                0.0
            }
        }),
    );
    let beta = vt.transpose() * shrunk;
    let mut fit = FitResult {
        lambda,
        columns: d.columns.clone(),
        means,
        scales,
        coef: beta.iter().copied().collect(),
        intercept: y_mean,
        train_r2: 0.0,
    };
    fit.train_r2 = r2(&fit.predict(d), &d.y).unwrap_or(f64::NAN);
    Ok(fit)
}

/// `1 − SS_res / SS_tot`; negative when worse than predicting the mean.
pub fn r2(yhat: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if yhat.len() != y.len() {
        return Err(StatsError::Length(yhat.len(), y.len()));
    }
    if y.len() < 2 {
        return Err(StatsError::TooFewRows {
            need: 2,
            got: y.len(),
        });
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if ss_tot <= 1e-300 {
        return Err(StatsError::ZeroVariance);
    }
    let ss_res: f64 = yhat.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Singular values of the feature matrix, largest first, and how many reach
/// `cutoff_ratio` times the largest.
pub fn pca_screen(d: &Dataset, cutoff_ratio: f64) -> Result<(Vec<f64>, usize), StatsError> {
    if d.is_empty() || d.num_columns() == 0 {
        return Err(StatsError::TooFewRows {
            need: 1,
            got: d.len(),
        });
    }
    let mut sv: Vec<f64> = d.matrix().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let cut = sv[0] * cutoff_ratio;
    let dominant = sv.iter().filter(|&&s| s >= cut && s > 0.0).count();
    Ok((sv, dominant))
}

/// Seeded shuffle into `⌊ratio·N⌋` training rows and the rest.
pub fn split(d: &Dataset, ratio: f64, seed: u64) -> Result<(Dataset, Dataset), StatsError> {
    if d.len() < 5 {
        return Err(StatsError::TooFewRows {
            need: 5,
            got: d.len(),
        });
    }
    let mut idx: Vec<usize> = (0..d.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = (ratio * d.len() as f64).floor() as usize;
    Ok((d.subset(&idx[..cut]), d.subset(&idx[cut..])))
}

/// Train on every family but `family`; test on `family`.
pub fn holdout_family(d: &Dataset, family: &str) -> Result<(Dataset, Dataset), StatsError> {
    let (test, train): (Vec<usize>, Vec<usize>) =
        (0..d.len()).partition(|&i| d.meta[i].family == family);
    if test.is_empty() {
        return Err(StatsError::MissingFamily(family.to_string()));
    }
    Ok((d.subset(&train), d.subset(&test)))
}

/// R² of `fit` on a dataset with the same columns.
pub fn transfer_evaluate(fit: &FitResult, other: &Dataset) -> Result<f64, StatsError> {
    if fit.columns != other.columns {
        return Err(StatsError::Schema {
            expected: fit.columns.clone(),
            got: other.columns.clone(),
        });
    }
    r2(&fit.predict(other), &other.y)
}

/// λ from `grid` with the smallest mean squared error over `folds` seeded
/// folds. Ties go to the larger λ.
pub fn cross_validate_lambda(
    d: &Dataset,
    grid: &[f64],
    folds: usize,
    seed: u64,
) -> Result<f64, StatsError> {
    let folds = folds.clamp(2, d.len().max(2));
    if d.len() < 2 * folds {
        return Err(StatsError::TooFewRows {
            need: 2 * folds,
            got: d.len(),
        });
    }
    let mut idx: Vec<usize> = (0..d.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut best = (f64::INFINITY, grid.first().copied().unwrap_or(0.0));
    for &lambda in grid {
        let mut sse = 0.0;
        for f in 0..folds {
            let (test, train): (Vec<usize>, Vec<usize>) =
                idx.iter().partition(|&&i| i % folds == f);
            let fit = ridge_fit(&d.subset(&train), lambda)?;
            let held = d.subset(&test);
            sse += fit
                .predict(&held)
                .iter()
                .zip(&held.y)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>();
        }
        if sse <= best.0 {
            best = (sse, lambda);
        }
    }
    Ok(best.1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub mean: f64,
    pub sd: f64,
    pub values: Vec<f64>,
}

/// Test-set R² over `count` seeded 80/20 splits. Split `i` uses seed
/// `seed + i`, so results do not depend on thread scheduling.
pub fn split_r2(
    d: &Dataset,
    lambda: f64,
    count: usize,
    seed: u64,
) -> Result<SplitSummary, StatsError> {
    let values: Vec<f64> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let (train, test) = split(d, 0.8, seed.wrapping_add(i))?;
            let fit = ridge_fit(&train, lambda)?;
            r2(&fit.predict(&test), &test.y)
        })
        .filter(|r| !matches!(r, Err(StatsError::ZeroVariance)))
        .collect::<Result<_, _>>()?;
    let n = values.len().max(1) as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    Ok(SplitSummary { mean, sd, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(family: &str) -> RowMeta {
        RowMeta {
            benchmark: String::new(),
            family: family.into(),
            n: 0,
            seed: 0,
            backend: String::new(),
        }
    }

    fn data(x: Vec<Vec<f64>>, y: Vec<f64>) -> Dataset {
        let cols = (0..x[0].len()).map(|j| format!("c{j}")).collect();
        let m = (0..y.len())
            .map(|i| meta(if i % 2 == 0 { "A" } else { "B" }))
            .collect();
        Dataset::new(cols, x, y, m).unwrap()
    }

    #[test]
    fn standardize_examples() {
        let d = data(vec![vec![1.0, 5.0], vec![3.0, 5.0]], vec![0.0, 1.0]);
        let (z, means, scales) = standardize(&d).unwrap();
        assert_eq!(z.x, vec![vec![-1.0, 0.0], vec![1.0, 0.0]]);
        assert_eq!((means, scales), (vec![2.0, 5.0], vec![1.0, 1.0]));
        let (again, _, _) = standardize(&z).unwrap();
        assert_eq!(again.x, z.x);
        assert!(standardize(&d.subset(&[0])).is_err());
    }

    #[test]
    fn ridge_examples() {
        let d = data(vec![vec![-1.0], vec![0.0], vec![1.0]], vec![-2.0, 0.0, 2.0]);
        let fit = ridge_fit(&d, 0.0).unwrap();
        assert!((fit.raw_coefficients()[0] - 2.0).abs() < 1e-12);
        assert!((fit.train_r2 - 1.0).abs() < 1e-12);
        let flat = ridge_fit(&d, 1e12).unwrap();
        assert!(flat.coef[0].abs() < 1e-9);
        assert!(flat.predict(&d).iter().all(|p| (p - 0.0).abs() < 1e-9));
        assert!(ridge_fit(&d, -1.0).is_err());
    }

    #[test]
    fn ridge_matches_hand_normal_equations() {
        // x = (1, 2, 4), y = (1, 3, 4): Sxx = 14/3, Sxy = 13/3, population
        // variance 14/9. Penalizing the standardized slope gives the raw
        // slope Sxy / (Sxx + λ·var).
        let d = data(vec![vec![1.0], vec![2.0], vec![4.0]], vec![1.0, 3.0, 4.0]);
        for lambda in [0.0, 0.5, 2.0] {
            let b = (13.0 / 3.0) / (14.0 / 3.0 + lambda * 14.0 / 9.0);
            let fit = ridge_fit(&d, lambda).unwrap();
            assert!((fit.raw_coefficients()[0] - b).abs() < 1e-9, "λ={lambda}");
            assert!((fit.intercept - 8.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn r2_examples() {
        let y = [1.0, 2.0, 3.0];
        assert_eq!(r2(&y, &y).unwrap(), 1.0);
        assert_eq!(r2(&[2.0; 3], &y).unwrap(), 0.0);
        assert!(r2(&[5.0; 3], &y).unwrap() < 0.0);
        assert_eq!(r2(&[1.0, 1.0], &[1.0, 1.0]), Err(StatsError::ZeroVariance));
    }

    #[test]
    fn pca_examples() {
        let dup = data(
            vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![0.0, 0.0]],
            vec![0.0; 3],
        );
        let (sv, dominant) = pca_screen(&dup, 1.0 / 50.0).unwrap();
        assert!(sv[1].abs() < 1e-12);
        assert_eq!(dominant, 1);
        let eye = data(
            vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ],
            vec![0.0; 3],
        );
        assert_eq!(pca_screen(&eye, 1.0 / 50.0).unwrap().1, 3);
    }

    #[test]
    fn split_examples() {
        let d = data(
            (0..50).map(|i| vec![i as f64]).collect(),
            (0..50).map(|i| i as f64).collect(),
        );
        let (train, test) = split(&d, 0.8, 9).unwrap();
        assert_eq!((train.len(), test.len()), (40, 10));
        assert_eq!(split(&d, 0.8, 9).unwrap().0, train);
        let mut all: Vec<f64> = train.y.iter().chain(&test.y).copied().collect();
        all.sort_by(f64::total_cmp);
        assert_eq!(all, d.y);
        let (tr, te) = holdout_family(&d, "B").unwrap();
        assert!(tr.meta.iter().all(|m| m.family == "A"));
        assert_eq!(tr.len() + te.len(), 50);
        assert!(holdout_family(&d, "C").is_err());
    }

    #[test]
    fn transfer_checks_schema() {
        let d = data(
            (0..10).map(|i| vec![i as f64, 1.0]).collect(),
            (0..10).map(|i| 3.0 * i as f64).collect(),
        );
        let fit = ridge_fit(&d, 0.0).unwrap();
        assert!((transfer_evaluate(&fit, &d).unwrap() - fit.train_r2).abs() < 1e-12);
        assert_eq!(fit.coef[1], 0.0);
        let narrow = d.select(&["c0"]).unwrap();
        assert!(matches!(
            transfer_evaluate(&fit, &narrow),
            Err(StatsError::Schema { .. })
        ));
        assert_eq!(fit.model_file().schema, "columns:c0,c1");
        let back = FitResult::from_model_file(&fit.model_file()).unwrap();
        assert_eq!(back.predict(&d), fit.predict(&d));
    }
}
