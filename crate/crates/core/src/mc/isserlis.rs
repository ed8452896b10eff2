//! Exact Gaussian moments by summing over perfect matchings.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use std::collections::HashMap;

/// `E[Π_i X_i^{α_i}]` for a centred Gaussian vector with covariance `cov`.
pub fn isserlis_moment(cov: &[Vec<f64>], alpha: &[u32]) -> Result<f64> {
    let n = cov.len();
    if alpha.len() != n || cov.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument("covariance must be square and match the multi-index".into()));
    }
    let scale = cov.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    for i in 0..n {
        for j in 0..i {
            if (cov[i][j] - cov[j][i]).abs() > 1e-12 * scale {
                return Err(Error::InvalidArgument("covariance is not symmetric".into()));
            }
        }
    }
    if n > 0 {
        let m = DMatrix::from_fn(n, n, |i, j| cov[i][j]);
        let min = m.symmetric_eigenvalues().min();
        if min < -1e-10 * scale {
            return Err(Error::InvalidArgument(format!("covariance is not positive semidefinite (eigenvalue {min})")));
        }
    }
    if alpha.iter().sum::<u32>() % 2 == 1 {
        return Ok(0.0);
    }
    let mut memo = HashMap::new();
    Ok(matchings(cov, alpha.to_vec(), &mut memo))
}

/// Pair one copy of the first remaining variable with every other copy.
fn matchings(cov: &[Vec<f64>], mut alpha: Vec<u32>, memo: &mut HashMap<Vec<u32>, f64>) -> f64 {
    let Some(i) = alpha.iter().position(|&a| a > 0) else {
        return 1.0;
    };
    if let Some(&v) = memo.get(&alpha) {
        return v;
    }
    let key = alpha.clone();
    alpha[i] -= 1;
    let mut total = 0.0;
    for j in i..alpha.len() {
        if alpha[j] == 0 || cov[i][j] == 0.0 {
            continue;
        }
        let mult = alpha[j] as f64;
        let mut rest = alpha.clone();
        rest[j] -= 1;
        total += mult * cov[i][j] * matchings(cov, rest, memo);
    }
    memo.insert(key, total);
    total
}
