//! Residuals of the first-order identities satisfied by the metrics.

use serde::Serialize;

use crate::error::Result;
use crate::jet::{lift_axis, lift_const, Jet};
use crate::metric::FinslerMetric;

/// Projective-flatness test `F_{x^k y^l} y^k = F_{x^l}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RapcsakReport {
    /// `max_l |F_{x^k y^l} y^k - F_{x^l}| / F`.
    pub residual: f64,
    /// `P = F_{x^k} y^k / (2 F)`.
    pub projective_factor: f64,
}

fn x_gradient(metric: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    (0..x.len())
        .map(|k| Ok(metric.eval(&lift_axis(x, k, 1), &lift_const(y))?.coeff(1)))
        .collect()
}

pub fn check_rapcsak(metric: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<RapcsakReport> {
    let n = metric.dim();
    let f = metric.value(x, y)?;
    let fx = x_gradient(metric, x, y)?;
    let mut residual: f64 = 0.0;
    let mut directional = 0.0;
    for l in 0..n {
        // outer level: y + s e_l; inner level: x + t y
        let xs: Vec<Jet<Jet<f64>>> = x
            .iter()
            .zip(y)
            .map(|(&p, &d)| Jet::constant(Jet::variable(p, d, 1)))
            .collect();
        let ys: Vec<Jet<Jet<f64>>> = y
            .iter()
            .enumerate()
            .map(|(j, &p)| {
                Jet::from_coeffs(vec![
                    Jet::constant(p),
                    Jet::constant(if j == l { 1.0 } else { 0.0 }),
                ])
            })
            .collect();
        let v = metric.eval(&xs, &ys)?;
        directional = v.coeff(0).coeff(1);
        residual = residual.max((v.coeff(1).coeff(1) - fx[l]).abs());
    }
    Ok(RapcsakReport {
        residual: residual / f,
        projective_factor: directional / (2.0 * f),
    })
}

/// `max_k |Ft_{x^k} - (F Ft)_{y^k}| / (F Ft)`.
pub fn check_inverse_pde(
    funk: &FinslerMetric,
    candidate: &FinslerMetric,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    let f = funk.value(x, y)?;
    let ft = candidate.value(x, y)?;
    let ft_x = x_gradient(candidate, x, y)?;
    let mut worst: f64 = 0.0;
    for (k, dx) in ft_x.iter().enumerate() {
        let xs = lift_const(x);
        let ys = lift_axis(y, k, 1);
        let product = funk.eval(&xs, &ys)? * candidate.eval(&xs, &ys)?;
        worst = worst.max((dx - product.coeff(1)).abs());
    }
    Ok(worst / (f * ft))
}

/// `max_i |F_{x^i} - F F_{y^i}| / F^2`.
pub fn funk_pde_residual(funk: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<f64> {
    let f = funk.value(x, y)?;
    let fx = x_gradient(funk, x, y)?;
    let mut worst: f64 = 0.0;
    for (i, dx) in fx.iter().enumerate() {
        let fy = funk.eval(&lift_const(x), &lift_axis(y, i, 1))?.coeff(1);
        worst = worst.max((dx - f * fy).abs());
    }
    Ok(worst / (f * f))
}
