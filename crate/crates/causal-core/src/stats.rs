//! Small numeric helpers: correlations, least-squares residuals, and the
//! standard-normal quantile used by the Fisher z test.

use crate::error::CausalError;
use crate::Result;

/// Pearson correlation of two equal-length samples. Returns `None` when
/// either sample is (numerically) constant, in which case no correlation is
/// defined.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    debug_assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    // Scale-aware degeneracy cutoff: variance this far below the mean square
    // is indistinguishable from rounding noise.
    let tol = 1e-12;
    let x_scale = x.iter().map(|v| v * v).sum::<f64>().max(1.0);
    let y_scale = y.iter().map(|v| v * v).sum::<f64>().max(1.0);
    if sxx <= tol * x_scale || syy <= tol * y_scale {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Solves the square system `a x = b` by Gaussian elimination with partial
/// pivoting. `a` is row-major `n x n` and is consumed. Fails when a pivot is
/// numerically zero.
pub fn solve_linear(mut a: Vec<f64>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    let scale = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r1, &r2| {
                a[r1 * n + col]
                    .abs()
                    .partial_cmp(&a[r2 * n + col].abs())
                    .expect("pivot comparison on finite values")
            })
            .expect("non-empty pivot range");
        if a[pivot_row * n + col].abs() <= 1e-12 * scale {
            return Err(CausalError::DataMismatch(
                "singular linear system in least squares".into(),
            ));
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            b.swap(col, pivot_row);
        }
        let pivot = a[col * n + col];
        for row in (col + 1)..n {
            let factor = a[row * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in (row + 1)..n {
            acc -= a[row * n + k] * x[k];
        }
        x[row] = acc / a[row * n + row];
    }
    Ok(x)
}

/// Residuals of `y` after ordinary least squares on the columns `z` (plus an
/// intercept). `z` is a list of conditioning columns, each `n` long.
pub fn ols_residuals(y: &[f64], z: &[&[f64]]) -> Result<Vec<f64>> {
    let n = y.len();
    let p = z.len() + 1; // intercept first
    let mut xtx = vec![0.0; p * p];
    let mut xty = vec![0.0; p];
    let col = |j: usize, i: usize| -> f64 {
        if j == 0 {
            1.0
        } else {
            z[j - 1][i]
        }
    };
    for i in 0..n {
        for a in 0..p {
            let xa = col(a, i);
            xty[a] += xa * y[i];
            for b in a..p {
                xtx[a * p + b] += xa * col(b, i);
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            xtx[a * p + b] = xtx[b * p + a];
        }
    }
    let beta = solve_linear(xtx, xty)?;
    let mut resid = Vec::with_capacity(n);
    for i in 0..n {
        let mut fit = 0.0;
        for a in 0..p {
            fit += beta[a] * col(a, i);
        }
        resid.push(y[i] - fit);
    }
    Ok(resid)
}

/// Partial correlation of `x` and `y` given conditioning columns `z`,
/// computed as the Pearson correlation of the two OLS residual vectors.
/// Returns `None` when either residual is numerically constant — i.e. the
/// variable is an (affine) function of the conditioning set, so conditional
/// association is undefined.
pub fn partial_correlation(x: &[f64], y: &[f64], z: &[&[f64]]) -> Result<Option<f64>> {
    if z.is_empty() {
        return Ok(pearson(x, y));
    }
    let rx = ols_residuals(x, z)?;
    let ry = ols_residuals(y, z)?;
    // A residual that retains essentially none of the original variance is
    // degenerate even if it is not exactly constant.
    let var = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / v.len() as f64
    };
    let base = |v: &[f64]| var(v).max(v.iter().map(|a| a * a).sum::<f64>() / v.len() as f64);
    if var(&rx) <= 1e-10 * base(x).max(1e-300) || var(&ry) <= 1e-10 * base(y).max(1e-300) {
        return Ok(None);
    }
    Ok(pearson(&rx, &ry))
}

/// Standard-normal quantile (inverse CDF) via Acklam's rational
/// approximation; relative error below 1.2e-9 across the open unit interval,
/// far tighter than any significance threshold used here.
pub fn normal_quantile(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}
