use serde::Serialize;

use super::spray::Spray;
use super::tensor::fundamental_tensor;
use crate::error::{Error, Result};
use crate::jet::{lift_axis, lift_const, Jet, Scalar};
use crate::linalg::{bilinear, euclid_norm, mat_vec};
use crate::metric::FinslerMetric;

/// `R^i_k(x, y)`; `matrix[i][k]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RiemannOperator {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub matrix: Vec<Vec<f64>>,
    /// `|R_y(y)|` relative to `|y| max(|R|, |y|^2)`.
    pub ry_residual: f64,
}

impl RiemannOperator {
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        mat_vec(&self.matrix, u)
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn cj<S: Scalar>(v: S) -> Jet<S> {
    Jet::constant(v)
}

/// `R^i_k = 2 dG^i/dx^k - y^j d2G^i/dx^j dy^k + 2 G^j d2G^i/dy^j dy^k
///        - dG^i/dy^j dG^j/dy^k`,
/// with every derivative of `G` taken by running the spray itself on jets.
pub fn riemann(spray: &Spray, x: &[f64], y: &[f64]) -> Result<RiemannOperator> {
    let n = spray.dim();
    if x.len() != n || y.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: x.len().max(y.len()),
        });
    }
    let g0 = spray.value(x, y)?;

    let mut dx = vec![vec![0.0; n]; n];
    let mut dy = vec![vec![0.0; n]; n];
    let mut mxy = vec![vec![0.0; n]; n];
    let mut myy = vec![vec![0.0; n]; n];
    for k in 0..n {
        let gx = spray.coeffs(&lift_axis(x, k, 1), &lift_const(y))?;

        // outer level: y + s e_k; inner level: x + t y
        let x_in: Vec<Jet<Jet<f64>>> = x
            .iter()
            .zip(y)
            .map(|(&p, &d)| cj(Jet::variable(p, d, 1)))
            .collect();
        let y_k: Vec<Jet<Jet<f64>>> = y
            .iter()
            .enumerate()
            .map(|(j, &p)| Jet::from_coeffs(vec![cj(p), cj(if j == k { 1.0 } else { 0.0 })]))
            .collect();
        let g_xy = spray.coeffs(&x_in, &y_k)?;

        // outer level: y + s e_k; inner level: y + t G
        let x_const: Vec<Jet<Jet<f64>>> = x.iter().map(|&p| cj(cj(p))).collect();
        let y_g: Vec<Jet<Jet<f64>>> = y
            .iter()
            .enumerate()
            .map(|(j, &p)| {
                Jet::from_coeffs(vec![
                    Jet::variable(p, g0[j], 1),
                    cj(if j == k { 1.0 } else { 0.0 }),
                ])
            })
            .collect();
        let g_yy = spray.coeffs(&x_const, &y_g)?;

        for i in 0..n {
            dx[i][k] = gx[i].coeff(1);
            dy[i][k] = g_xy[i].coefficient(&[1, 0]);
            mxy[i][k] = g_xy[i].coefficient(&[1, 1]);
            myy[i][k] = g_yy[i].coefficient(&[1, 1]);
        }
    }

    let mut matrix = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let quad: f64 = (0..n).map(|j| dy[i][j] * dy[j][k]).sum();
            matrix[i][k] = 2.0 * dx[i][k] - mxy[i][k] + 2.0 * myy[i][k] - quad;
        }
    }
    if matrix.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("Riemann curvature".into()));
    }

    let ry = mat_vec(&matrix, y);
    let y_len = euclid_norm(y);
    let r_max = matrix.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let ry_residual = euclid_norm(&ry) / (y_len * r_max.max(y_len * y_len));
    Ok(RiemannOperator {
        x: x.to_vec(),
        y: y.to_vec(),
        matrix,
        ry_residual,
    })
}

/// One flag `(P = span{y, u}, y)` and its curvature.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlagCurvatureSample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    pub value: f64,
    /// `g_y(y,y) g_y(u,u) - g_y(y,u)^2`, kept for conditioning diagnostics.
    pub denominator: f64,
}

/// Metric data at one `(x, y)`: everything needed to evaluate flag
/// curvatures for many `u` without recomputing `R`.
#[derive(Clone, Debug)]
pub struct CurvatureAt {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub metric_value: f64,
    pub g: Vec<Vec<f64>>,
    pub min_eigenvalue: f64,
    pub riemann: RiemannOperator,
}

/// Flags whose normalized denominator falls below this are degenerate.
pub const DEGENERATE_FLAG_EPS: f64 = 1e-12;

impl CurvatureAt {
    pub fn new(metric: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<Self> {
        let tensor = fundamental_tensor(metric, x, y)?;
        let riemann = riemann(&Spray::induced(metric), x, y)?;
        Ok(CurvatureAt {
            x: x.to_vec(),
            y: y.to_vec(),
            metric_value: metric.value(x, y)?,
            g: tensor.matrix,
            min_eigenvalue: tensor.min_eigenvalue,
            riemann,
        })
    }

    pub fn flag_curvature(&self, u: &[f64]) -> Result<FlagCurvatureSample> {
        let y = &self.y;
        let gyy = bilinear(&self.g, y, y);
        let guu = bilinear(&self.g, u, u);
        let gyu = bilinear(&self.g, y, u);
        let denominator = gyy * guu - gyu * gyu;
        if !(denominator > DEGENERATE_FLAG_EPS * gyy * guu) {
            return Err(Error::DegenerateFlag { denominator });
        }
        let ru = self.riemann.apply(u);
        Ok(FlagCurvatureSample {
            x: self.x.clone(),
            y: y.clone(),
            u: u.to_vec(),
            value: bilinear(&self.g, &ru, u) / denominator,
            denominator,
        })
    }

    /// `max_k |R_y(e_k) - lambda {g_y(y,y) e_k - g_y(y,e_k) y}| / F^2`.
    pub fn const_curvature_residual(&self, lambda: f64) -> f64 {
        let n = self.y.len();
        let y = &self.y;
        let gyy = bilinear(&self.g, y, y);
        let f2 = self.metric_value * self.metric_value;
        (0..n)
            .map(|k| {
                let u: Vec<f64> = (0..n).map(|j| if j == k { 1.0 } else { 0.0 }).collect();
                let gyu = bilinear(&self.g, y, &u);
                let ru = self.riemann.apply(&u);
                let diff: Vec<f64> = (0..n)
                    .map(|i| ru[i] - lambda * (gyy * u[i] - gyu * y[i]))
                    .collect();
                euclid_norm(&diff) / f2
            })
            .fold(0.0, f64::max)
    }

    /// `max_{k,l} |g_y(R_y e_k, e_l) - g_y(e_k, R_y e_l)| / (F^2 max|g|)`.
    pub fn self_adjoint_residual(&self) -> f64 {
        let n = self.y.len();
        let r = &self.riemann.matrix;
        // (g R)_{lk} = g_y(R e_k, e_l)
        let gr: Vec<Vec<f64>> = (0..n)
            .map(|l| (0..n).map(|k| (0..n).map(|j| self.g[l][j] * r[j][k]).sum()).collect())
            .collect();
        let g_max = self.g.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut worst: f64 = 0.0;
        for k in 0..n {
            for l in 0..n {
                worst = worst.max((gr[l][k] - gr[k][l]).abs());
            }
        }
        worst / (self.metric_value * self.metric_value * g_max)
    }
}

pub fn flag_curvature(
    metric: &FinslerMetric,
    x: &[f64],
    y: &[f64],
    u: &[f64],
) -> Result<FlagCurvatureSample> {
    CurvatureAt::new(metric, x, y)?.flag_curvature(u)
}

pub fn const_curvature_residual(metric: &FinslerMetric, x: &[f64], y: &[f64], lambda: f64) -> Result<f64> {
    Ok(CurvatureAt::new(metric, x, y)?.const_curvature_residual(lambda))
}

pub fn check_self_adjoint(metric: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(CurvatureAt::new(metric, x, y)?.self_adjoint_residual())
}
