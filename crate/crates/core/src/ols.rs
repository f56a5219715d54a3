//! Ordinary least squares through the normal equations.
//!
//! Columns are scaled to unit Euclidean norm before forming `X'X`, which is
//! then factored with Cholesky. A pivot that collapses during factorisation
//! marks a column that is (numerically) a linear combination of the columns
//! before it.

use crate::error::{Error, Result};

/// Squared pivot below which a scaled column counts as collinear. On the
/// unit-norm scale this is `1 - R^2` of the column regressed on its
/// predecessors.
const COLLINEARITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub r_squared: f64,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    pub residual_variance: f64,
}

/// Fits `y = X b`. `columns[j]` is the j-th regressor column (include an
/// explicit column of ones for an intercept); `names` label the columns in
/// collinearity errors.
pub fn fit(columns: &[Vec<f64>], names: &[String], y: &[f64]) -> Result<OlsFit> {
    let k = columns.len();
    let n = y.len();
    assert_eq!(names.len(), k, "one name per column");
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidArgument("regressor length mismatch".into()));
    }
    if n <= k {
        return Err(Error::InvalidArgument(format!(
            "{n} observations cannot identify {k} coefficients with residual variance"
        )));
    }
    if columns.iter().flatten().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "non-finite value in regression data".into(),
        ));
    }

    let norms: Vec<f64> = columns
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    if let Some(j) = norms.iter().position(|&s| s == 0.0) {
        return Err(Error::Collinear {
            column: names[j].clone(),
            with: Vec::new(),
        });
    }
    let scaled: Vec<Vec<f64>> = columns
        .iter()
        .zip(&norms)
        .map(|(c, s)| c.iter().map(|v| v / s).collect())
        .collect();

    let mut gram = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..=i {
            let d = dot(&scaled[i], &scaled[j]);
            gram[i][j] = d;
            gram[j][i] = d;
        }
    }
    let xty: Vec<f64> = scaled.iter().map(|c| dot(c, y)).collect();

    let chol = cholesky(&gram).map_err(|j| Error::Collinear {
        column: names[j].clone(),
        with: names[..j]
            .iter()
            .zip(&gram[j])
            .filter(|(_, g)| g.abs() > 1e-8)
            .map(|(n, _)| n.clone())
            .collect(),
    })?;
    let beta_scaled = chol_solve(&chol, &xty);
    let coefficients: Vec<f64> = beta_scaled.iter().zip(&norms).map(|(b, s)| b / s).collect();

    let fitted: Vec<f64> = (0..n)
        .map(|i| {
            columns
                .iter()
                .zip(&coefficients)
                .map(|(c, b)| c[i] * b)
                .sum()
        })
        .collect();
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, f)| a - f).collect();
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - y_mean).powi(2)).sum();
    let r_squared = if tss > 0.0 {
        (1.0 - rss / tss).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let residual_variance = rss / (n - k) as f64;

    // diag of (X'X)^-1 = diag(S^-1 G^-1 S^-1)
    let standard_errors = (0..k)
        .map(|j| {
            let mut e = vec![0.0; k];
            e[j] = 1.0;
            let col = chol_solve(&chol, &e);
            (residual_variance * col[j]).sqrt() / norms[j]
        })
        .collect();

    Ok(OlsFit {
        coefficients,
        standard_errors,
        r_squared,
        fitted,
        residuals,
        residual_variance,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lower-triangular factor. `Err(j)` when pivot `j` collapses.
fn cholesky(a: &[Vec<f64>]) -> std::result::Result<Vec<Vec<f64>>, usize> {
    let k = a.len();
    let mut l = vec![vec![0.0; k]; k];
    for j in 0..k {
        let d = a[j][j] - (0..j).map(|m| l[j][m] * l[j][m]).sum::<f64>();
        if d <= COLLINEARITY_TOL * a[j][j] {
            return Err(j);
        }
        l[j][j] = d.sqrt();
        for i in j + 1..k {
            let s = a[i][j] - (0..j).map(|m| l[i][m] * l[j][m]).sum::<f64>();
            l[i][j] = s / l[j][j];
        }
    }
    Ok(l)
}

fn chol_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let k = l.len();
    let mut z = vec![0.0; k];
    for i in 0..k {
        z[i] = (b[i] - (0..i).map(|m| l[i][m] * z[m]).sum::<f64>()) / l[i][i];
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        x[i] = (z[i] - (i + 1..k).map(|m| l[m][i] * x[m]).sum::<f64>()) / l[i][i];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn exact_line() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.5 * v).collect();
        let f = fit(&[vec![1.0; 10], x], &names(2), &y).unwrap();
        assert!((f.coefficients[0] - 3.0).abs() < 1e-12);
        assert!((f.coefficients[1] + 0.5).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_column_is_named() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let twice: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let err = fit(
            &[vec![1.0; 10], x, twice],
            &["const".into(), "a".into(), "b".into()],
            &[1.0; 10],
        )
        .unwrap_err();
        match err {
            Error::Collinear { column, with } => {
                assert_eq!(column, "b");
                assert_eq!(with, vec!["const".to_string(), "a".to_string()]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_column_is_collinear() {
        let err = fit(
            &[vec![1.0; 5], vec![0.0; 5]],
            &names(2),
            &[1.0, 2.0, 3.0, 4.0, 5.0],
        );
        assert!(matches!(err, Err(Error::Collinear { .. })));
    }

    #[test]
    fn too_few_rows() {
        assert!(fit(&[vec![1.0; 2], vec![1.0, 2.0]], &names(2), &[1.0, 2.0]).is_err());
    }

    #[test]
    fn standard_error_matches_closed_form() {
        // simple regression: se(b1) = sqrt(s^2 / Sxx)
        let x = [1.0, 2.0, 4.0, 5.0, 7.0, 8.0];
        let y = [2.1, 2.9, 5.2, 5.8, 8.3, 8.9];
        let f = fit(&[vec![1.0; 6], x.to_vec()], &names(2), &y).unwrap();
        let mx = x.iter().sum::<f64>() / 6.0;
        let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
        let expected = (f.residual_variance / sxx).sqrt();
        assert!((f.standard_errors[1] - expected).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn residuals_orthogonal_and_mean_preserved(
            rows in proptest::collection::vec((-50.0f64..50.0, 0.0f64..1e4, -3.0f64..3.0), 8..40)
        ) {
            let n = rows.len();
            let x1: Vec<f64> = rows.iter().map(|r| r.0).collect();
            let x2: Vec<f64> = rows.iter().map(|r| r.1).collect();
            let y: Vec<f64> = rows.iter().map(|r| r.2 + 0.01 * r.0).collect();
            let cols = vec![vec![1.0; n], x1, x2];
            let Ok(f) = fit(&cols, &names(3), &y) else { return Ok(()); };
            for c in &cols {
                let scale = c.iter().map(|v| v.abs()).sum::<f64>() * y.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
                prop_assert!(dot(c, &f.residuals).abs() <= 1e-8 * scale);
            }
            let at_means: f64 = cols.iter().zip(&f.coefficients).map(|(c, b)| b * c.iter().sum::<f64>() / n as f64).sum();
            let y_mean = y.iter().sum::<f64>() / n as f64;
            prop_assert!((at_means - y_mean).abs() < 1e-8 * (1.0 + y_mean.abs()));
            prop_assert!((0.0..=1.0).contains(&f.r_squared));
        }
    }
}
