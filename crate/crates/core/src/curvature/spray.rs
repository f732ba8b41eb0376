use serde::Serialize;

use super::tensor::fundamental_matrix;
use crate::error::{Error, Result};
use crate::jet::{Jet, Scalar};
use crate::linalg::solve;
use crate::metric::FinslerMetric;
use crate::norm::ConvexDomain;

/// Coefficients `G^i(x, y)` of the spray `y^i d/dx^i - 2 G^i d/dy^i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Spray {
    /// `G^i = 0`.
    Flat { domain: ConvexDomain },
    /// The geodesic spray of a Finsler metric.
    MetricInduced { metric: FinslerMetric },
    /// `G^i = scale * F(x, y) y^i`.
    Projective { factor: FinslerMetric, scale: f64 },
}

impl Spray {
    pub fn flat(dim: usize) -> Self {
        Spray::Flat {
            domain: ConvexDomain::unit_ball(dim),
        }
    }

    pub fn induced(metric: &FinslerMetric) -> Self {
        Spray::MetricInduced {
            metric: metric.clone(),
        }
    }

    pub fn projective(factor: &FinslerMetric, scale: f64) -> Self {
        Spray::Projective {
            factor: factor.clone(),
            scale,
        }
    }

    pub fn dim(&self) -> usize {
        self.domain().dim()
    }

    pub fn domain(&self) -> &ConvexDomain {
        match self {
            Spray::Flat { domain } => domain,
            Spray::MetricInduced { metric } => metric.domain(),
            Spray::Projective { factor, .. } => factor.domain(),
        }
    }

    pub fn is_metric_induced(&self) -> bool {
        matches!(self, Spray::MetricInduced { .. })
    }

    pub fn coeffs<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<Vec<S>> {
        match self {
            Spray::Flat { domain } => Ok(vec![S::zero(); domain.dim()]),
            Spray::Projective { factor, scale } => {
                let f = factor.eval(x, y)? * *scale;
                Ok(y.iter().map(|c| f.clone() * c.clone()).collect())
            }
            Spray::MetricInduced { metric } => metric_spray(metric, x, y),
        }
    }

    pub fn value(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.coeffs(x, y)
    }
}

/// The R-flat spray `G^i = F(x, y) y^i` built from a Funk metric.
pub fn funk_spray(funk: &FinslerMetric) -> Result<Spray> {
    if !funk.is_funk() {
        return Err(Error::InvalidParameter(format!(
            "funk spray needs a Funk metric, got {}",
            funk.kind_name()
        )));
    }
    Ok(Spray::projective(funk, 1.0))
}

pub fn spray_coeffs(metric: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    metric_spray(metric, x, y)
}

fn cj<S: Scalar>(v: S) -> Jet<S> {
    Jet::constant(v)
}

/// `G^i = 1/4 g^{il} {2 dg_jl/dx^k - dg_jk/dx^l} y^j y^k`.
///
/// Both contractions are formed as directional derivatives of `F^2`:
/// `dg_jl/dx^k y^j y^k = d/ds [1/2 d_r d_q F^2(x + s y, y + r y + q e_l)]` and
/// `dg_jk/dx^l y^j y^k = d/ds [1/2 d_r^2 F^2(x + s e_l, y + r y)]`.
fn metric_spray<S: Scalar>(metric: &FinslerMetric, x: &[S], y: &[S]) -> Result<Vec<S>> {
    let n = metric.dim();
    let g = fundamental_matrix(metric, x, y)?;
    let mut rhs = Vec::with_capacity(n);
    for l in 0..n {
        // x + s y, y + r y + q e_l
        let xa: Vec<Jet<Jet<Jet<S>>>> = x
            .iter()
            .zip(y)
            .map(|(p, d)| Jet::from_coeffs(vec![cj(cj(p.clone())), cj(cj(d.clone()))]))
            .collect();
        let ya: Vec<Jet<Jet<Jet<S>>>> = y
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let q_dir = S::from_f64(if k == l { 1.0 } else { 0.0 });
                cj(Jet::from_coeffs(vec![
                    Jet::variable(p.clone(), q_dir, 1),
                    cj(p.clone()),
                ]))
            })
            .collect();
        let a = metric.eval(&xa, &ya)?.square().coeff(1).coeff(1).coeff(1) * 0.5;

        // x + s e_l, y + r y
        let xb: Vec<Jet<Jet<S>>> = x
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let dir = S::from_f64(if k == l { 1.0 } else { 0.0 });
                Jet::from_coeffs(vec![cj(p.clone()), cj(dir)])
            })
            .collect();
        let yb: Vec<Jet<Jet<S>>> = y
            .iter()
            .map(|p| cj(Jet::variable(p.clone(), p.clone(), 2)))
            .collect();
        let b = metric.eval(&xb, &yb)?.square().coeff(1).coeff(2);

        rhs.push(a * 2.0 - b);
    }
    let z = solve(&g, &rhs)?;
    Ok(z.into_iter().map(|v| v * 0.25).collect())
}
