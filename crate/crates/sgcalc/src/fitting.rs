//! Small shared least-squares helpers: straight-line fits with slope
//! confidence intervals and general linear least squares via SVD.

use crate::error::{SgError, SgResult};
use nalgebra::{DMatrix, DVector};

/// Result of an ordinary least-squares line fit `y ≈ intercept + slope·t`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    /// 95% confidence half-width of the slope (1.96·SE under iid residuals).
    pub slope_ci95: f64,
    /// Root-mean-square residual of the fit.
    pub resid_rms: f64,
}

/// Least-squares straight line through `(t.., y..)`; needs ≥ 3 points and a
/// non-degenerate abscissa spread.
pub fn line_fit(t: &[f64], y: &[f64]) -> SgResult<LineFit> {
    if t.len() != y.len() || t.len() < 3 {
        return Err(SgError::IllConditionedFit(format!(
            "line fit needs at least 3 points, got {}",
            t.len().min(y.len())
        )));
    }
    let n = t.len() as f64;
    let tbar = t.iter().sum::<f64>() / n;
    let ybar = y.iter().sum::<f64>() / n;
    let sxx: f64 = t.iter().map(|v| (v - tbar) * (v - tbar)).sum();
    if sxx < 1e-12 * (1.0 + tbar * tbar) * n {
        return Err(SgError::IllConditionedFit(
            "abscissa values are (nearly) identical".into(),
        ));
    }
    let sxy: f64 = t
        .iter()
        .zip(y.iter())
        .map(|(a, b)| (a - tbar) * (b - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * tbar;
    let ss_res: f64 = t
        .iter()
        .zip(y.iter())
        .map(|(a, b)| {
            let e = b - (intercept + slope * a);
            e * e
        })
        .sum();
    let dof = (t.len() - 2).max(1) as f64;
    let se = (ss_res / dof / sxx).sqrt();
    Ok(LineFit {
        intercept,
        slope,
        slope_ci95: 1.96 * se,
        resid_rms: (ss_res / n).sqrt(),
    })
}

/// General linear least squares: returns `beta` minimising `‖X·beta − y‖₂`
/// together with the RMS residual. `X` is row-major `rows × cols`.
pub fn lsq_solve(rows: usize, cols: usize, x: &[f64], y: &[f64]) -> SgResult<(Vec<f64>, f64)> {
    if x.len() != rows * cols || y.len() != rows || rows < cols {
        return Err(SgError::IllConditionedFit(format!(
            "least squares shape mismatch: {rows}×{cols} design, {} rhs",
            y.len()
        )));
    }
    let design = DMatrix::from_row_slice(rows, cols, x);
    let rhs = DVector::from_column_slice(y);
    let svd = design.clone().svd(true, true);
    let beta = svd
        .solve(&rhs, 1e-12)
        .map_err(|e| SgError::IllConditionedFit(format!("SVD solve failed: {e}")))?;
    let resid = (&design * &beta - &rhs).norm() / (rows as f64).sqrt();
    Ok((beta.iter().copied().collect(), resid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_line_recovered() {
        let t: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = t.iter().map(|v| 3.5 - 2.0 * v).collect();
        let f = line_fit(&t, &y).unwrap();
        assert_relative_eq!(f.slope, -2.0, epsilon = 1e-12);
        assert_relative_eq!(f.intercept, 3.5, epsilon = 1e-12);
        assert!(f.resid_rms < 1e-12);
        assert!(f.slope_ci95 < 1e-12);
    }

    #[test]
    fn noisy_line_ci_covers_truth() {
        // deterministic "noise"
        let t: Vec<f64> = (0..40).map(|i| i as f64 * 0.25).collect();
        let y: Vec<f64> = t
            .iter()
            .enumerate()
            .map(|(i, v)| 1.0 + 0.5 * v + 0.01 * ((i * 2654435761) % 97) as f64 / 97.0)
            .collect();
        let f = line_fit(&t, &y).unwrap();
        assert!((f.slope - 0.5).abs() < 0.01);
    }

    #[test]
    fn lsq_two_column_exact() {
        // y = 2·a - 3·b on 5 rows
        let x = [1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 2.0f64];
        let y = [2.0, -3.0, -1.0, 1.0, -4.0];
        let (beta, resid) = lsq_solve(5, 2, &x, &y).unwrap();
        assert_relative_eq!(beta[0], 2.0, epsilon = 1e-10);
        assert_relative_eq!(beta[1], -3.0, epsilon = 1e-10);
        assert!(resid < 1e-10);
    }

    #[test]
    fn degenerate_abscissa_is_an_error() {
        assert!(line_fit(&[1.0, 1.0, 1.0], &[0.0, 1.0, 2.0]).is_err());
    }
}
