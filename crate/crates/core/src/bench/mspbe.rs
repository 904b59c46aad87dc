//! Mean-squared projected Bellman error by dense linear algebra.

use nalgebra::{DMatrix, DVector};

use super::baird::FeatureMatrix;
use super::mdp::TabularMdp;
use crate::error::{check_dim, contract, GvfError, Result};

const RANK_TOL: f64 = 1e-10;

/// `‖Π(T^π V − V)‖²_D` with `V = Φw`, `D = diag(d)` and `Π` the
/// D-weighted projection onto the span of Φ's columns.
///
/// Computed as `gᵀ(ΦᵀDΦ)⁺g` with `g = ΦᵀD(T^π V − V)`. Linearly dependent
/// columns are allowed since the projection only depends on their span;
/// a span of rank zero is rejected.
pub fn mspbe(
    weights: &[f64],
    features: &FeatureMatrix,
    mdp: &TabularMdp,
    target: &[Vec<f64>],
    distribution: &[f64],
) -> Result<f64> {
    let n = mdp.n_states();
    let k = features.dimension();
    check_dim(k, weights.len())?;
    check_dim(n, features.n_states())?;
    check_dim(n, target.len())?;
    check_dim(n, distribution.len())?;
    if distribution.iter().any(|d| !(*d >= 0.0)) {
        return Err(contract("state distribution must be nonnegative"));
    }
    for row in target {
        check_dim(mdp.n_actions(), row.len())?;
    }

    let v = features.values(weights);
    let error: Vec<f64> = (0..n)
        .map(|s| {
            let tv: f64 = (0..mdp.n_actions())
                .map(|a| target[s][a] * mdp.backup(s, a, |x| v[x]))
                .sum();
            tv - v[s]
        })
        .collect();

    let phi = DMatrix::from_fn(n, k, |i, j| features.row(i)[j]);
    let d = DVector::from_column_slice(distribution);
    let dphi = DMatrix::from_fn(n, k, |i, j| d[i] * phi[(i, j)]);
    let c = phi.transpose() * &dphi;
    let g = dphi.transpose() * DVector::from_vec(error);

    let svd = c.svd(true, true);
    let top = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > RANK_TOL * top.max(1.0))
        .count();
    if rank == 0 {
        return Err(GvfError::RankDeficient { rank, columns: k });
    }
    let pinv = svd
        .pseudo_inverse(RANK_TOL * top.max(1.0))
        .map_err(|e| contract(e.to_string()))?;
    let value = g.dot(&(pinv * &g));
    Ok(value.max(0.0))
}
