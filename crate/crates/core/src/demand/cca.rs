use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ridge added to the diagonal of both covariance estimates.
pub const COVARIANCE_RIDGE: f64 = 1e-8;

/// Default upper bound on the number of canonical components.
pub const DEFAULT_MAX_COMPONENTS: usize = 5;

/// Per-column centring and scaling. Constant columns keep scale 1, so they
/// standardise to zero and carry no signal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(m: &DMatrix<f64>) -> Self {
        let n = m.nrows() as f64;
        let mut mean = Vec::with_capacity(m.ncols());
        let mut scale = Vec::with_capacity(m.ncols());
        for col in m.column_iter() {
            let mu = col.sum() / n;
            let var = col.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            let sd = var.sqrt();
            mean.push(mu);
            scale.push(if sd > 1e-12 * mu.abs().max(1.0) { sd } else { 1.0 });
        }
        Standardizer { mean, scale }
    }

    pub fn apply(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| (m[(r, c)] - self.mean[c]) / self.scale[c])
    }

    pub fn invert(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)] * self.scale[c] + self.mean[c])
    }
}

/// Canonical correlation model with a least-squares map from canonical scores
/// back to the (standardised) targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CcaModel {
    pub k: usize,
    pub x_std: Standardizer,
    pub y_std: Standardizer,
    /// `d_x x k`.
    pub x_projections: DMatrix<f64>,
    /// `d_y x k`.
    pub y_projections: DMatrix<f64>,
    /// Nonincreasing, in `[0, 1]`.
    pub correlations: Vec<f64>,
    /// `k x d_y`.
    pub score_map: DMatrix<f64>,
}

pub(crate) fn check_finite(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::DegenerateData(format!("{what} contains non-finite values")))
    }
}

/// `C^{-1/2}` of a symmetric positive definite matrix.
fn inverse_sqrt(c: DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(c);
    let d = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| 1.0 / l.max(COVARIANCE_RIDGE).sqrt()),
    );
    &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.transpose()
}

/// Least-squares solution of `a b = rhs` via SVD, dropping directions with
/// negligible singular values.
pub(crate) fn lstsq(a: &DMatrix<f64>, rhs: &DMatrix<f64>) -> DMatrix<f64> {
    if a.ncols() == 0 || a.nrows() == 0 {
        return DMatrix::zeros(a.ncols(), rhs.ncols());
    }
    let svd = SVD::new(a.clone(), true, true);
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = top * 1e-10 * a.nrows().max(a.ncols()) as f64;
    svd.solve(rhs, eps).expect("singular vectors were computed")
}

/// Fits classical CCA between `x` and `y`.
///
/// Both views are standardised; the canonical directions come from the SVD of
/// `Cxx^{-1/2} Cxy Cyy^{-1/2}`. `k` defaults to `min(d_x, d_y, rows - 1, 5)`
/// and is capped at `min(d_x, d_y)`.
pub fn fit_cca(x: &DMatrix<f64>, y: &DMatrix<f64>, k: Option<usize>) -> Result<CcaModel> {
    let n = x.nrows();
    if y.nrows() != n {
        return Err(Error::DegenerateData(format!(
            "views have {n} and {} rows",
            y.nrows()
        )));
    }
    if n < 3 {
        return Err(Error::DegenerateData(format!("need at least 3 rows, got {n}")));
    }
    if x.ncols() == 0 || y.ncols() == 0 {
        return Err(Error::DegenerateData("a view has no columns".into()));
    }
    check_finite(x, "covariate view")?;
    check_finite(y, "target view")?;
    let (dx, dy) = (x.ncols(), y.ncols());
    let k = match k {
        Some(0) => return Err(Error::InvalidInput("component count must be at least 1".into())),
        Some(k) => k.min(dx).min(dy),
        None => dx.min(dy).min(n - 1).min(DEFAULT_MAX_COMPONENTS),
    };

    let x_std = Standardizer::fit(x);
    let y_std = Standardizer::fit(y);
    let xs = x_std.apply(x);
    let ys = y_std.apply(y);
    let denom = (n - 1) as f64;
    let cxx = xs.tr_mul(&xs) / denom + DMatrix::identity(dx, dx) * COVARIANCE_RIDGE;
    let cyy = ys.tr_mul(&ys) / denom + DMatrix::identity(dy, dy) * COVARIANCE_RIDGE;
    let cxy = xs.tr_mul(&ys) / denom;
    let wx = inverse_sqrt(cxx);
    let wy = inverse_sqrt(cyy);
    let svd = SVD::new(&wx * &cxy * &wy, true, true);
    let u = svd.u.as_ref().expect("computed");
    let v = svd.v_t.as_ref().expect("computed").transpose();

    let x_projections = &wx * u.columns(0, k);
    let y_projections = &wy * v.columns(0, k);
    let correlations = svd.singular_values.iter().take(k).map(|s| s.min(1.0)).collect();
    let scores = &xs * &x_projections;
    let score_map = lstsq(&scores, &ys);
    Ok(CcaModel {
        k,
        x_std,
        y_std,
        x_projections,
        y_projections,
        correlations,
        score_map,
    })
}

impl CcaModel {
    pub fn x_dim(&self) -> usize {
        self.x_projections.nrows()
    }

    pub fn y_dim(&self) -> usize {
        self.y_projections.nrows()
    }

    /// Canonical scores of the rows of `x`.
    pub fn x_scores(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.x_std.apply(x) * &self.x_projections
    }

    pub fn y_scores(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        self.y_std.apply(y) * &self.y_projections
    }

    /// Predicted targets, one row per row of `x`.
    pub fn predict(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.x_dim() {
            return Err(Error::InvalidInput(format!(
                "expected {} covariates, got {}",
                self.x_dim(),
                x.ncols()
            )));
        }
        Ok(self.y_std.invert(&(self.x_scores(x) * &self.score_map)))
    }
}

/// Prediction for a single feature vector.
pub fn cca_predict(m: &CcaModel, x: &[f64]) -> Result<Vec<f64>> {
    let row = DMatrix::from_row_slice(1, x.len(), x);
    Ok(m.predict(&row)?.row(0).iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
    }

    /// Sample correlation of two columns.
    fn corr(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn identical_columns_correlate_perfectly() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random(&mut rng, 20, 1);
        let m = fit_cca(&x, &x, None).unwrap();
        assert!((m.correlations[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn exact_linear_relation_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random(&mut rng, 40, 3);
        let a = random(&mut rng, 3, 3) + DMatrix::identity(3, 3) * 2.0;
        let y = &x * &a;
        let m = fit_cca(&x, &y, None).unwrap();
        assert_eq!(m.k, 3);
        for c in &m.correlations {
            assert!((c - 1.0).abs() < 1e-6, "{c}");
        }
        let fitted = m.predict(&x).unwrap();
        assert!((fitted - &y).abs().max() < 1e-6);
        // Held-out row follows the analytic map.
        let probe = random(&mut rng, 1, 3);
        let got = cca_predict(&m, probe.as_slice()).unwrap();
        let want = &probe * &a;
        for (g, w) in got.iter().zip(want.iter()) {
            assert!((g - w).abs() < 1e-6);
        }
    }

    #[test]
    fn correlations_are_sorted_and_match_scores() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random(&mut rng, 60, 4);
        let noise = random(&mut rng, 60, 3) * 0.5;
        let y = x.columns(0, 3) * 2.0 + noise;
        let m = fit_cca(&x, &y, None).unwrap();
        assert!(m.correlations.windows(2).all(|w| w[0] >= w[1]));
        let sx = m.x_scores(&x);
        let sy = m.y_scores(&y);
        for c in 0..m.k {
            let r = corr(sx.column(c).as_slice(), sy.column(c).as_slice());
            assert!((r.abs() - m.correlations[c]).abs() < 1e-6);
        }
    }

    #[test]
    fn mean_input_predicts_mean_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random(&mut rng, 30, 3);
        let y = random(&mut rng, 30, 2);
        let m = fit_cca(&x, &y, None).unwrap();
        let got = cca_predict(&m, &m.x_std.mean).unwrap();
        for (g, w) in got.iter().zip(&m.y_std.mean) {
            assert!((g - w).abs() < 1e-9);
        }
    }

    #[test]
    fn affine_rescaling_leaves_correlations_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random(&mut rng, 50, 3);
        let y = x.columns(0, 2) + random(&mut rng, 50, 2);
        let base = fit_cca(&x, &y, None).unwrap();
        let x2 = DMatrix::from_fn(50, 3, |r, c| x[(r, c)] * (c as f64 + 2.0) - 7.0);
        let y2 = DMatrix::from_fn(50, 2, |r, c| y[(r, c)] * 0.01 + 3.0 * c as f64);
        let moved = fit_cca(&x2, &y2, None).unwrap();
        for (a, b) in base.correlations.iter().zip(&moved.correlations) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_columns_are_tolerated() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut x = random(&mut rng, 20, 2);
        x.column_mut(1).fill(3.0);
        let y = DMatrix::from_element(20, 1, 5.0);
        let m = fit_cca(&x, &y, None).unwrap();
        let p = m.predict(&x).unwrap();
        assert!(p.iter().all(|v| (v - 5.0).abs() < 1e-12));
    }

    #[test]
    fn degenerate_inputs_rejected() {
        let x = DMatrix::from_element(2, 1, 1.0);
        assert!(matches!(fit_cca(&x, &x, None), Err(Error::DegenerateData(_))));
        let mut y = DMatrix::from_element(5, 1, 1.0);
        y[(0, 0)] = f64::NAN;
        let x = DMatrix::from_element(5, 1, 1.0);
        assert!(matches!(fit_cca(&x, &y, None), Err(Error::DegenerateData(_))));
        assert!(fit_cca(&x, &x, Some(0)).is_err());
        let m = fit_cca(&DMatrix::from_fn(5, 2, |r, c| (r * (c + 1)) as f64), &x, None).unwrap();
        assert!(cca_predict(&m, &[1.0]).is_err());
    }

    #[test]
    fn least_squares_objective_agrees_with_correlation() {
        // With unit-variance scores, |a - b|^2 / (n - 1) = 2 - 2 corr, so the
        // fitted pair minimises distance exactly where it maximises correlation.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = random(&mut rng, 80, 3);
        let y = x.columns(1, 2) + random(&mut rng, 80, 2) * 0.3;
        let m = fit_cca(&x, &y, Some(1)).unwrap();
        let xs = m.x_std.apply(&x);
        let ys = m.y_std.apply(&y);
        let n1 = 79.0;
        let unit = |v: DVector<f64>, s: &DMatrix<f64>| {
            let norm = ((s * &v).norm_squared() / n1).sqrt();
            v / norm
        };
        let dist = |ux: &DVector<f64>, uy: &DVector<f64>| (&xs * ux - &ys * uy).norm_squared() / n1;
        let ux = unit(m.x_projections.column(0).into_owned(), &xs);
        let uy = unit(m.y_projections.column(0).into_owned(), &ys);
        let d0 = dist(&ux, &uy);
        assert!((d0 - (2.0 - 2.0 * m.correlations[0])).abs() < 1e-6);
        assert!(dist(&ux, &(-uy.clone())) > d0);
        for _ in 0..20 {
            let px = unit(&ux + DVector::from_fn(3, |_, _| rng.random_range(-0.2..0.2)), &xs);
            let py = unit(&uy + DVector::from_fn(2, |_, _| rng.random_range(-0.2..0.2)), &ys);
            assert!(dist(&px, &py) >= d0 - 1e-9);
        }
    }
}
