//! Finsler metrics as scalar fields `F(x, y)` over any [`Scalar`].

mod funk;
mod series;

use serde::Serialize;

pub use funk::{
    ball_radicand, funk_ball, funk_implicit, newton_steps_for, solve_ray, NewtonSolveTrace,
    MAX_ITERATIONS, RESIDUAL_TOL,
};
pub use series::{SeriesMetric, SeriesValue, MAX_SERIES_ORDER};

use crate::error::{Error, Result};
use crate::jet::{dot, lift, lift_const, norm_sq, values, Scalar, ScalarField};
use crate::norm::{ConvexDomain, MinkowskiNorm};

/// Amplitude of the x-dependence of the negative-control metric.
pub const NEGATIVE_CONTROL_AMPLITUDE: f64 = 0.3;

/// Where Funk values come from.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "route", rename_all = "kebab-case")]
pub enum FunkSource {
    /// Closed form on the euclidean unit ball.
    Ball { dim: usize },
    /// Implicit solve on an arbitrary strongly convex domain.
    Implicit { domain: ConvexDomain },
}

impl FunkSource {
    pub fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S> {
        match self {
            FunkSource::Ball { .. } => funk_ball(x, y),
            FunkSource::Implicit { domain } => funk_implicit(domain, x, y),
        }
    }

    pub fn domain(&self) -> ConvexDomain {
        match self {
            FunkSource::Ball { dim } => ConvexDomain::unit_ball(*dim),
            FunkSource::Implicit { domain } => domain.clone(),
        }
    }

    /// Closed form on the unit ball, implicit solve elsewhere.
    pub fn for_domain(domain: &ConvexDomain) -> Self {
        if domain.is_unit_ball() {
            FunkSource::Ball { dim: domain.dim() }
        } else {
            FunkSource::Implicit {
                domain: domain.clone(),
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MetricKind {
    Funk { source: FunkSource },
    Hilbert { source: FunkSource },
    /// `F + F_{x^i} (x^i - a^i)`, evaluated as `F (1 + F_{y^i} (x^i - a^i))`.
    ShenK0 { source: FunkSource, anchor: Vec<f64> },
    /// Closed form of the above on the unit ball.
    ShenK0Ball { anchor: Vec<f64> },
    /// Ball Funk metric plus `<a, y> / (1 + <a, x>)`.
    RandersFunkType { a: Vec<f64> },
    Series { series: SeriesMetric },
    /// x-independent metric `F(x, y) = phi(y)`.
    Minkowski { norm: MinkowskiNorm },
    /// `|y| (1 + 0.3 sin x^1)`: not projectively flat.
    NegativeControl,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FinslerMetric {
    kind: MetricKind,
    domain: ConvexDomain,
}

impl FinslerMetric {
    /// Funk metric; the unit ball uses its closed form.
    pub fn funk(domain: &ConvexDomain) -> Self {
        FinslerMetric {
            kind: MetricKind::Funk {
                source: FunkSource::for_domain(domain),
            },
            domain: domain.clone(),
        }
    }

    /// Funk metric that always goes through the implicit solve.
    pub fn funk_implicit(domain: &ConvexDomain) -> Self {
        FinslerMetric {
            kind: MetricKind::Funk {
                source: FunkSource::Implicit {
                    domain: domain.clone(),
                },
            },
            domain: domain.clone(),
        }
    }

    pub fn funk_ball(dim: usize) -> Self {
        FinslerMetric::funk(&ConvexDomain::unit_ball(dim))
    }

    pub fn hilbert(domain: &ConvexDomain) -> Self {
        FinslerMetric {
            kind: MetricKind::Hilbert {
                source: FunkSource::for_domain(domain),
            },
            domain: domain.clone(),
        }
    }

    pub fn hilbert_ball(dim: usize) -> Self {
        FinslerMetric::hilbert(&ConvexDomain::unit_ball(dim))
    }

    /// `a` must lie in the domain.
    pub fn shen_k0(domain: &ConvexDomain, anchor: Vec<f64>) -> Result<Self> {
        Self::shen_k0_with(FunkSource::for_domain(domain), anchor)
    }

    pub fn shen_k0_with(source: FunkSource, anchor: Vec<f64>) -> Result<Self> {
        let domain = source.domain();
        check_anchor(&domain, &anchor)?;
        Ok(FinslerMetric {
            kind: MetricKind::ShenK0 { source, anchor },
            domain,
        })
    }

    pub fn shen_k0_ball(anchor: Vec<f64>) -> Result<Self> {
        let domain = ConvexDomain::unit_ball(anchor.len());
        check_anchor(&domain, &anchor)?;
        Ok(FinslerMetric {
            kind: MetricKind::ShenK0Ball { anchor },
            domain,
        })
    }

    pub fn randers_funk_type(a: Vec<f64>) -> Result<Self> {
        let domain = ConvexDomain::unit_ball(a.len());
        check_anchor(&domain, &a)?;
        Ok(FinslerMetric {
            kind: MetricKind::RandersFunkType { a },
            domain,
        })
    }

    /// Series metric on `{phi < 1}`.
    pub fn series(series: SeriesMetric) -> Result<Self> {
        let dim = series.phi().dim();
        let domain = ConvexDomain::new(series.phi().clone(), vec![0.0; dim])?;
        Ok(FinslerMetric {
            kind: MetricKind::Series { series },
            domain,
        })
    }

    pub fn minkowski(norm: MinkowskiNorm) -> Self {
        let dim = norm.dim();
        FinslerMetric {
            kind: MetricKind::Minkowski { norm },
            domain: ConvexDomain::unit_ball(dim),
        }
    }

    pub fn negative_control(dim: usize) -> Self {
        FinslerMetric {
            kind: MetricKind::NegativeControl,
            domain: ConvexDomain::unit_ball(dim),
        }
    }

    pub fn kind(&self) -> &MetricKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            MetricKind::Funk { .. } => "funk",
            MetricKind::Hilbert { .. } => "hilbert",
            MetricKind::ShenK0 { .. } => "shen-k0",
            MetricKind::ShenK0Ball { .. } => "shen-k0-ball",
            MetricKind::RandersFunkType { .. } => "randers-funk-type",
            MetricKind::Series { .. } => "series",
            MetricKind::Minkowski { .. } => "minkowski",
            MetricKind::NegativeControl => "negative-control",
        }
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &ConvexDomain {
        &self.domain
    }

    pub fn is_funk(&self) -> bool {
        matches!(self.kind, MetricKind::Funk { .. })
    }

    /// `F(x, y)`; feed jets to differentiate.
    pub fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S> {
        let n = self.dim();
        for len in [x.len(), y.len()] {
            if len != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: len,
                });
            }
        }
        if y.iter().all(|c| c.value() == 0.0) {
            return Err(Error::UndefinedAtOrigin);
        }
        let level = self.domain.level(&values(x))?;
        if !(level < 1.0) {
            return Err(Error::OutsideDomain { level });
        }

        let v = match &self.kind {
            MetricKind::Funk { source } => source.eval(x, y)?,
            MetricKind::Hilbert { source } => {
                let minus: Vec<S> = y.iter().map(|c| -c.clone()).collect();
                (source.eval(x, y)? + source.eval(x, &minus)?) * 0.5
            }
            MetricKind::ShenK0 { source, anchor } => {
                // one dual pass along y + t (x - a) yields F and F_{y^i}(x^i - a^i)
                let offset: Vec<S> = x.iter().zip(anchor).map(|(p, a)| p.clone() - *a).collect();
                let f = source.eval(&lift_const(x), &lift(y, &offset, 1))?;
                f.coeff(0) * (f.coeff(1) + 1.0)
            }
            MetricKind::ShenK0Ball { anchor } => {
                let a: Vec<S> = anchor.iter().map(|&c| S::from_f64(c)).collect();
                let f = funk_ball(x, y)?;
                let numerator = (-dot(&a, x) + 1.0) * f.square() - dot(&a, y) * f;
                numerator.checked_div(&ball_radicand(x, y).sqrt()?)?
            }
            MetricKind::RandersFunkType { a } => {
                let a: Vec<S> = a.iter().map(|&c| S::from_f64(c)).collect();
                funk_ball(x, y)? + dot(&a, y).checked_div(&(dot(&a, x) + 1.0))?
            }
            MetricKind::Series { series } => series.eval(x, y)?,
            MetricKind::Minkowski { norm } => norm.eval(y)?,
            MetricKind::NegativeControl => {
                norm_sq(y).sqrt()? * (x[0].sin() * NEGATIVE_CONTROL_AMPLITUDE + 1.0)
            }
        };
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("{} metric value", self.kind_name())));
        }
        if !(v.value() > 0.0) {
            return Err(Error::NonPositive { value: v.value() });
        }
        Ok(v)
    }

    pub fn value(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.eval(x, y)
    }

    /// Series partial sum with its tail estimate; `None` for other kinds.
    pub fn series_value(&self, x: &[f64], y: &[f64]) -> Option<Result<SeriesValue<f64>>> {
        match &self.kind {
            MetricKind::Series { series } => Some(series.eval_with_tail(x, y)),
            _ => None,
        }
    }
}

fn check_anchor(domain: &ConvexDomain, anchor: &[f64]) -> Result<()> {
    if anchor.len() != domain.dim() {
        return Err(Error::Dimension {
            expected: domain.dim(),
            got: anchor.len(),
        });
    }
    if anchor.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidParameter("anchor point is not finite".into()));
    }
    let level = domain.level(anchor)?;
    if !(level < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "anchor point must be interior to the domain (phi(a - x_o) = {level})"
        )));
    }
    Ok(())
}

/// `F` as a field on the joint `(x, y)` space of dimension `2n`.
pub struct JointField<'a>(pub &'a FinslerMetric);

impl ScalarField for JointField<'_> {
    fn dim(&self) -> usize {
        2 * self.0.dim()
    }

    fn eval<S: Scalar>(&self, p: &[S]) -> Result<S> {
        let n = self.0.dim();
        self.0.eval(&p[..n], &p[n..])
    }
}

/// `F^2` on the joint `(x, y)` space.
pub struct SquaredJointField<'a>(pub &'a FinslerMetric);

impl ScalarField for SquaredJointField<'_> {
    fn dim(&self) -> usize {
        2 * self.0.dim()
    }

    fn eval<S: Scalar>(&self, p: &[S]) -> Result<S> {
        let n = self.0.dim();
        Ok(self.0.eval(&p[..n], &p[n..])?.square())
    }
}
