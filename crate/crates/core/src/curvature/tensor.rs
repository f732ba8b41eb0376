use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::{hessian_with, lift_const, Scalar};
use crate::linalg::{symmetric_condition, symmetric_eigenvalues};
use crate::metric::FinslerMetric;

/// Condition numbers above this are flagged on the tensor.
pub const CONDITION_WARN: f64 = 1e8;

/// `g_ij(x, y) = 1/2 [F^2]_{y^i y^j}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FundamentalTensor {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub matrix: Vec<Vec<f64>>,
    pub min_eigenvalue: f64,
    pub condition: f64,
    pub ill_conditioned: bool,
}

/// `g_ij` over any scalar type (the spray differentiates through it).
pub fn fundamental_matrix<S: Scalar>(metric: &FinslerMetric, x: &[S], y: &[S]) -> Result<Vec<Vec<S>>> {
    let xx = lift_const(&lift_const(x));
    let h = hessian_with(y, |yy| Ok(metric.eval(&xx, yy)?.square()))?;
    Ok(h.into_iter()
        .map(|row| row.into_iter().map(|v| v * 0.5).collect())
        .collect())
}

pub fn fundamental_tensor(metric: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<FundamentalTensor> {
    let matrix = fundamental_matrix(metric, x, y)?;
    if matrix.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("fundamental tensor".into()));
    }
    let ev = symmetric_eigenvalues(&matrix);
    let condition = symmetric_condition(&ev);
    Ok(FundamentalTensor {
        x: x.to_vec(),
        y: y.to_vec(),
        min_eigenvalue: ev[0],
        condition,
        ill_conditioned: condition > CONDITION_WARN,
        matrix,
    })
}
