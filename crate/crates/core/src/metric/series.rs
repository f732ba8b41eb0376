use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::{lift, Scalar};
use crate::norm::MinkowskiNorm;

/// Largest truncation order accepted for the series metric.
pub const MAX_SERIES_ORDER: usize = 32;

/// Truncated power series
/// `sum_{m <= M} (1/m!) d^m/dt^m [phi^m(y + t x) psi(y + t x)]_{t=0}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesMetric {
    phi: MinkowskiNorm,
    psi: MinkowskiNorm,
    order: usize,
}

/// Partial sum plus the magnitude of its last term.
#[derive(Clone, Debug)]
pub struct SeriesValue<S> {
    pub sum: S,
    pub tail: f64,
    pub terms: Vec<f64>,
}

impl SeriesMetric {
    pub fn new(phi: MinkowskiNorm, psi: MinkowskiNorm, order: usize) -> Result<Self> {
        if phi.dim() != psi.dim() {
            return Err(Error::Dimension {
                expected: phi.dim(),
                got: psi.dim(),
            });
        }
        if order > MAX_SERIES_ORDER {
            return Err(Error::OrderTooHigh {
                requested: order,
                limit: MAX_SERIES_ORDER,
            });
        }
        Ok(SeriesMetric { phi, psi, order })
    }

    pub fn phi(&self) -> &MinkowskiNorm {
        &self.phi
    }

    pub fn psi(&self) -> &MinkowskiNorm {
        &self.psi
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn with_order(&self, order: usize) -> Result<Self> {
        SeriesMetric::new(self.phi.clone(), self.psi.clone(), order)
    }

    /// The `m`-th term is the `t^m` coefficient of `phi^m psi` along
    /// `y + t x`, so one order-`M` jet of each norm serves every term.
    pub fn eval_with_tail<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<SeriesValue<S>> {
        let m_max = self.order;
        let ray = lift(y, x, m_max);
        let phi = self.phi.eval(&ray)?;
        let mut product = self.psi.eval(&ray)?;
        let mut sum = product.coeff(0);
        let mut terms = vec![sum.value()];
        for m in 1..=m_max {
            product = product * phi.clone();
            let term = product.coeff(m);
            terms.push(term.value());
            sum = sum + term;
        }
        Ok(SeriesValue {
            sum,
            tail: terms.last().copied().unwrap_or(0.0).abs(),
            terms,
        })
    }

    pub fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S> {
        Ok(self.eval_with_tail(x, y)?.sum)
    }
}
