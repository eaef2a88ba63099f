use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::cca::{check_finite, fit_cca, lstsq, CcaModel};
use crate::error::{Error, Result};

/// Folds used to estimate each view's prediction error.
pub const ERROR_FOLDS: usize = 5;

/// Per-view CCA regressions combined with error-derived weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdrModel {
    pub submodels: Vec<CcaModel>,
    /// Cross-validated RMSE of each view's regression.
    pub errors: Vec<f64>,
    pub weights: Vec<f64>,
}

/// `w_i = (1 - e_i / sum_j e_j) / (n - 1)`; uniform when every error is zero.
/// The weights sum to one and, for non-negative errors, are non-negative.
pub fn mdr_weights(errors: &[f64]) -> Vec<f64> {
    let n = errors.len();
    match n {
        0 => Vec::new(),
        1 => vec![1.0],
        _ => {
            let total: f64 = errors.iter().sum();
            if total > 0.0 {
                let scale = 1.0 / (n - 1) as f64;
                errors.iter().map(|e| scale * (1.0 - e / total)).collect()
            } else {
                vec![1.0 / n as f64; n]
            }
        }
    }
}

fn select_rows(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    m.select_rows(rows)
}

/// Contiguous folds over `0..n`.
fn folds(n: usize, k: usize) -> Vec<Vec<usize>> {
    let k = k.min(n).max(1);
    (0..k)
        .map(|f| (f * n / k..(f + 1) * n / k).collect())
        .collect()
}

fn complement(n: usize, held: &[usize]) -> Vec<usize> {
    (0..n).filter(|r| !held.contains(r)).collect()
}

/// Root mean squared error pooled over every entry.
fn pooled_rmse(pred: &DMatrix<f64>, truth: &DMatrix<f64>) -> f64 {
    ((pred - truth).norm_squared() / truth.len() as f64).sqrt()
}

/// Cross-validated RMSE of a CCA regression from `x` to `y`.
fn cv_error(x: &DMatrix<f64>, y: &DMatrix<f64>, k: Option<usize>) -> Result<f64> {
    let n = x.nrows();
    let mut pred = DMatrix::zeros(n, y.ncols());
    for held in folds(n, ERROR_FOLDS) {
        let train = complement(n, &held);
        let m = fit_cca(&select_rows(x, &train), &select_rows(y, &train), k)?;
        let p = m.predict(&select_rows(x, &held))?;
        for (row, &r) in held.iter().enumerate() {
            pred.set_row(r, &p.row(row));
        }
    }
    Ok(pooled_rmse(&pred, y))
}

fn check_views(views: &[DMatrix<f64>], y: &DMatrix<f64>) -> Result<()> {
    if views.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "at least two covariate views are required, got {}",
            views.len()
        )));
    }
    for (i, v) in views.iter().enumerate() {
        if v.nrows() != y.nrows() {
            return Err(Error::DegenerateData(format!(
                "view {i} has {} rows but the target has {}",
                v.nrows(),
                y.nrows()
            )));
        }
    }
    Ok(())
}

/// Fits one CCA regression per view, estimates each view's error by internal
/// cross-validation and derives the ensemble weights.
pub fn fit_mdr(views: &[DMatrix<f64>], y: &DMatrix<f64>, k: Option<usize>) -> Result<MdrModel> {
    check_views(views, y)?;
    let mut submodels = Vec::with_capacity(views.len());
    let mut errors = Vec::with_capacity(views.len());
    for x in views {
        submodels.push(fit_cca(x, y, k)?);
        errors.push(cv_error(x, y, k)?);
    }
    let weights = mdr_weights(&errors);
    Ok(MdrModel {
        submodels,
        errors,
        weights,
    })
}

fn combine(models: &[CcaModel], weights: &[f64], xs: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
    if xs.len() != models.len() {
        return Err(Error::InvalidInput(format!(
            "expected {} views, got {}",
            models.len(),
            xs.len()
        )));
    }
    let rows = xs.first().map_or(0, |x| x.nrows());
    let mut out = DMatrix::zeros(rows, models[0].y_dim());
    for ((m, &w), x) in models.iter().zip(weights).zip(xs) {
        out += m.predict(x)? * w;
    }
    Ok(out)
}

impl MdrModel {
    /// Predicted targets, one row per row of the (aligned) views.
    pub fn predict(&self, xs: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
        combine(&self.submodels, &self.weights, xs)
    }
}

/// `sum_i w_i f_i(x_i)` for one instance given one feature vector per view.
pub fn mdr_predict(m: &MdrModel, xs: &[&[f64]]) -> Result<Vec<f64>> {
    let rows: Vec<DMatrix<f64>> = xs.iter().map(|x| DMatrix::from_row_slice(1, x.len(), x)).collect();
    Ok(m.predict(&rows)?.row(0).iter().copied().collect())
}

/// Model families compared by [`loocv_rmse`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Error-weighted ensemble of per-view CCA regressions.
    Mdr,
    /// Least squares with intercept on all views concatenated.
    ConcatLr,
    /// Per-view CCA regressions averaged with equal weights.
    UniformEnsemble,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Mdr, ModelKind::ConcatLr, ModelKind::UniformEnsemble];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Mdr => "mdr",
            ModelKind::ConcatLr => "concat_lr",
            ModelKind::UniformEnsemble => "uniform",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoocvReport {
    pub kind: ModelKind,
    /// RMSE of each target column.
    pub per_column: Vec<f64>,
    /// Mean of `per_column`.
    pub mean: f64,
}

fn with_intercept(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::from_element(m.nrows(), m.ncols() + 1, 1.0);
    out.columns_mut(1, m.ncols()).copy_from(m);
    out
}

fn concat(views: &[DMatrix<f64>]) -> DMatrix<f64> {
    let rows = views[0].nrows();
    let cols = views.iter().map(|v| v.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for v in views {
        out.columns_mut(at, v.ncols()).copy_from(v);
        at += v.ncols();
    }
    out
}

/// Fits `kind` on the training views and predicts the test rows.
pub fn fit_predict(
    kind: ModelKind,
    train: &[DMatrix<f64>],
    y: &DMatrix<f64>,
    test: &[DMatrix<f64>],
    k: Option<usize>,
) -> Result<DMatrix<f64>> {
    match kind {
        ModelKind::Mdr => fit_mdr(train, y, k)?.predict(test),
        ModelKind::UniformEnsemble => {
            let models = train.iter().map(|x| fit_cca(x, y, k)).collect::<Result<Vec<_>>>()?;
            let w = vec![1.0 / models.len() as f64; models.len()];
            combine(&models, &w, test)
        }
        ModelKind::ConcatLr => {
            let beta = lstsq(&with_intercept(&concat(train)), y);
            Ok(with_intercept(&concat(test)) * beta)
        }
    }
}

/// Leave-one-out RMSE: every row is predicted by a model trained on the
/// others.
pub fn loocv_rmse(
    views: &[DMatrix<f64>],
    y: &DMatrix<f64>,
    kind: ModelKind,
    k: Option<usize>,
) -> Result<LoocvReport> {
    check_views(views, y)?;
    let n = y.nrows();
    if n < 4 {
        return Err(Error::DegenerateData(format!("need at least 4 rows, got {n}")));
    }
    for v in views {
        check_finite(v, "covariate view")?;
    }
    check_finite(y, "target view")?;
    let mut pred = DMatrix::zeros(n, y.ncols());
    for r in 0..n {
        let train_rows = complement(n, &[r]);
        let train: Vec<DMatrix<f64>> = views.iter().map(|v| select_rows(v, &train_rows)).collect();
        let test: Vec<DMatrix<f64>> = views.iter().map(|v| select_rows(v, &[r])).collect();
        let p = fit_predict(kind, &train, &select_rows(y, &train_rows), &test, k)?;
        pred.set_row(r, &p.row(0));
    }
    let per_column: Vec<f64> = (0..y.ncols())
        .map(|c| {
            let se: f64 = (0..n).map(|r| (pred[(r, c)] - y[(r, c)]).powi(2)).sum();
            (se / n as f64).sqrt()
        })
        .collect();
    let mean = per_column.iter().sum::<f64>() / per_column.len().max(1) as f64;
    Ok(LoocvReport {
        kind,
        per_column,
        mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn weight_formula_examples() {
        let w = mdr_weights(&[1.0, 1.0, 1.0]);
        for v in &w {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
        assert_eq!(mdr_weights(&[1.0, 3.0]), vec![0.75, 0.25]);
        assert_eq!(mdr_weights(&[0.0, 0.0]), vec![0.5, 0.5]);
        let w = mdr_weights(&[0.3, 2.0, 0.7, 1.1]);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(w.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn hand_weighted_ensemble() {
        // Two submodels fitted to constant targets 2 and 6 predict those constants.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random(&mut rng, 10, 2);
        let a = fit_cca(&x, &DMatrix::from_element(10, 1, 2.0), None).unwrap();
        let b = fit_cca(&x, &DMatrix::from_element(10, 1, 6.0), None).unwrap();
        let m = MdrModel {
            submodels: vec![a.clone(), b],
            errors: vec![1.0, 3.0],
            weights: vec![0.75, 0.25],
        };
        let p = mdr_predict(&m, &[&[0.1, 0.2], &[0.3, 0.4]]).unwrap();
        assert!((p[0] - 3.0).abs() < 1e-12);
        // A zero weight removes a view entirely.
        let solo = MdrModel { weights: vec![1.0, 0.0], ..m.clone() };
        let p = mdr_predict(&solo, &[&[0.1, 0.2], &[0.3, 0.4]]).unwrap();
        let own = super::super::cca::cca_predict(&a, &[0.1, 0.2]).unwrap();
        assert_eq!(p, own);
        assert!(mdr_predict(&m, &[&[0.1, 0.2]]).is_err());
    }

    #[test]
    fn noiseless_linear_suite_has_zero_loocv_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let v1 = random(&mut rng, 24, 2);
        let v2 = random(&mut rng, 24, 2);
        // Each view determines the target on its own.
        let y = &v1 * DMatrix::from_row_slice(2, 1, &[1.5, -0.5]);
        let v2 = {
            let mut v = v2;
            v.set_column(0, &y.column(0));
            v
        };
        for kind in ModelKind::ALL {
            let r = loocv_rmse(&[v1.clone(), v2.clone()], &y, kind, None).unwrap();
            assert!(r.mean < 1e-6, "{kind:?}: {}", r.mean);
        }
        let constant = DMatrix::from_element(24, 2, 4.0);
        for kind in ModelKind::ALL {
            let r = loocv_rmse(&[v1.clone(), v2.clone()], &constant, kind, None).unwrap();
            assert!(r.mean < 1e-9);
        }
    }

    #[test]
    fn signal_view_gets_largest_weight() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let signal = random(&mut rng, 60, 3);
        let y = &signal * random(&mut rng, 3, 2) + random(&mut rng, 60, 2) * 0.1;
        let views = vec![signal, random(&mut rng, 60, 3), random(&mut rng, 60, 3)];
        let m = fit_mdr(&views, &y, None).unwrap();
        assert!((m.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(m.weights[0] > m.weights[1] && m.weights[0] > m.weights[2]);
        // Predictions are convex combinations of the submodels.
        let probe: Vec<DMatrix<f64>> = views.iter().map(|v| v.rows(0, 5).into_owned()).collect();
        let ens = m.predict(&probe).unwrap();
        let subs: Vec<DMatrix<f64>> = m.submodels.iter().zip(&probe).map(|(s, x)| s.predict(x).unwrap()).collect();
        for (idx, v) in ens.iter().enumerate() {
            let lo = subs.iter().map(|s| s[idx]).fold(f64::INFINITY, f64::min);
            let hi = subs.iter().map(|s| s[idx]).fold(f64::NEG_INFINITY, f64::max);
            assert!(*v >= lo - 1e-9 && *v <= hi + 1e-9);
        }
    }

    #[test]
    fn view_checks() {
        let y = DMatrix::from_element(6, 1, 1.0);
        assert!(fit_mdr(&[DMatrix::zeros(6, 1)], &y, None).is_err());
        assert!(fit_mdr(&[DMatrix::zeros(6, 1), DMatrix::zeros(5, 1)], &y, None).is_err());
        let small = DMatrix::from_element(3, 1, 1.0);
        assert!(loocv_rmse(&[small.clone(), small.clone()], &small, ModelKind::Mdr, None).is_err());
    }

    #[test]
    fn folds_partition_rows() {
        for n in 1..20 {
            let f = folds(n, ERROR_FOLDS);
            let all: Vec<usize> = f.concat();
            assert_eq!(all, (0..n).collect::<Vec<_>>());
            assert!(f.iter().all(|x| !x.is_empty()));
        }
    }
}
