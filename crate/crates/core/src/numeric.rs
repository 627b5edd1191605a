//! Small dense least-squares helpers.

use nalgebra::{DMatrix, DVector, SVD};

/// Least-squares solution of `rows · c ≈ y`.
#[derive(Clone, Debug)]
pub struct LstsqFit {
    pub coef: Vec<f64>,
    /// Max absolute residual.
    pub residual: f64,
    /// Ratio of extreme singular values of the column-normalized system.
    pub condition: f64,
}

/// Columns are scaled to unit norm before the SVD; rank-deficient systems get
/// the minimum-norm solution.
pub fn lstsq(rows: &[Vec<f64>], y: &[f64]) -> Option<LstsqFit> {
    let ncol = rows.first()?.len();
    if ncol == 0 || rows.len() < ncol {
        return None;
    }
    let m = DMatrix::from_fn(rows.len(), ncol, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(y);
    if m.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return None;
    }
    let norms: Vec<f64> = (0..ncol)
        .map(|j| {
            let n = m.column(j).norm();
            if n > 0.0 {
                n
            } else {
                1.0
            }
        })
        .collect();
    let mut ms = m.clone();
    for (j, n) in norms.iter().enumerate() {
        ms.column_mut(j).scale_mut(1.0 / n);
    }
    let svd = SVD::new(ms, true, true);
    let sv = &svd.singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let cs = svd.solve(&b, 1e-13 * smax).ok()?;
    let coef: Vec<f64> = cs.iter().zip(&norms).map(|(c, n)| c / n).collect();
    let c = DVector::from_column_slice(&coef);
    let residual = (&m * &c - &b).amax();
    Some(LstsqFit {
        coef,
        residual,
        condition,
    })
}

/// `y ≈ s x + c`, returned as `(s, c, max residual)`.
pub fn line_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    let rows: Vec<Vec<f64>> = x.iter().map(|v| vec![*v, 1.0]).collect();
    lstsq(&rows, y).map(|f| (f.coef[0], f.coef[1], f.residual))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let (s, c, r) = line_fit(&x, &y).unwrap();
        assert!((s - 2.5).abs() < 1e-13 && (c + 1.0).abs() < 1e-13 && r < 1e-13);
    }

    #[test]
    fn badly_scaled_columns() {
        let x: Vec<f64> = (1..20).map(|i| i as f64).collect();
        let rows: Vec<Vec<f64>> = x.iter().map(|v| vec![v.powi(2), 1e-6]).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powi(2) + 2e-6).collect();
        let f = lstsq(&rows, &y).unwrap();
        assert!(
            (f.coef[0] - 3.0).abs() < 1e-10 && (f.coef[1] - 2.0).abs() < 1e-4,
            "{:?}",
            f.coef
        );
    }

    #[test]
    fn rank_deficient_reports_condition() {
        let rows = vec![vec![1.0, 1.0]; 5];
        let f = lstsq(&rows, &[2.0; 5]).unwrap();
        assert!(f.condition > 1e12);
        assert!((f.coef[0] + f.coef[1] - 2.0).abs() < 1e-12);
    }
}
