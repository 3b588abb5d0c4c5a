//! Ridge regression of episodic reward on mask bits.
//!
//! Each intervention record contributes one equation `R ≈ ⟨ω, g⟩ + b`. The
//! fit minimizes `Σ (R_i − ⟨ω, g_i⟩ − b)² + λ‖ω‖²` — the intercept is never
//! penalized — by solving the `(d+1)×(d+1)` normal equations directly with
//! Gaussian elimination; at these sizes a dense solve is exact and instant.

use crate::energy::EnergyModel;
use crate::error::InterventionError;
use crate::search::InterventionRecord;
use crate::Result;

/// Pivots below this magnitude mark the system as singular.
const PIVOT_TOL: f64 = 1e-12;

/// Solves `a · x = b` in place by Gaussian elimination with partial
/// pivoting. `a` is square in row-major order.
fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("column range is non-empty");
        if a[pivot_row][col].abs() < PIVOT_TOL {
            return Err(InterventionError::Singular(
                "normal equations have no unique solution: the visited masks do not span the \
                 feature space; set lambda > 0 or collect more distinct masks"
                    .into(),
            ));
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Ok(x)
}

/// Fits `(ω, b)` to the recorded `(mask, reward)` pairs by ridge least
/// squares and carries the caller's `tau` into the returned model unchanged.
///
/// With `lambda > 0` the system is positive definite and always solvable;
/// with `lambda = 0` it is singular until the visited masks span the feature
/// space, and the error says so.
pub fn fit_energy(records: &[InterventionRecord], lambda: f64, tau: f64) -> Result<EnergyModel> {
    let Some(first) = records.first() else {
        return Err(InterventionError::Config("cannot fit an energy model to zero records".into()));
    };
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(InterventionError::Config(format!(
            "ridge strength must be finite and >= 0, got {lambda}"
        )));
    }
    let d = first.graph.len();
    if records.iter().any(|r| r.graph.len() != d) {
        return Err(InterventionError::Dim("records disagree on mask width".into()));
    }

    // Normal equations over [g, 1]: gram · θ = moment, θ = (ω, b).
    let n = d + 1;
    let mut gram = vec![vec![0.0; n]; n];
    let mut moment = vec![0.0; n];
    for record in records {
        let mut x: Vec<f64> = record.graph.to_f64_vec();
        x.push(1.0);
        for i in 0..n {
            for j in 0..n {
                gram[i][j] += x[i] * x[j];
            }
            moment[i] += x[i] * record.reward;
        }
    }
    for (i, row) in gram.iter_mut().enumerate().take(d) {
        row[i] += lambda;
    }

    let mut theta = solve_dense(&mut gram, &mut moment)?;
    let bias = theta.pop().expect("theta has d+1 entries");
    EnergyModel::new(theta, bias, tau)
}
