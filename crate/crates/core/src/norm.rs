//! Minkowski norms and the strongly convex domains they bound.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::{dot, hessian_with, norm_sq, values, Scalar};
use crate::linalg::symmetric_eigenvalues;

/// Homogeneity factors probed by [`MinkowskiNorm::check`].
pub const HOMOGENEITY_FACTORS: [f64; 3] = [0.5, 2.0, 7.0];

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NormKind {
    Euclidean,
    /// `sqrt(y^T A y)` for a symmetric positive-definite `A`.
    Ellipsoid { matrix: Vec<Vec<f64>> },
    /// `|y| + <b, y>`, `|b| < 1`.
    Randers { b: Vec<f64> },
    /// `(|y|^4 + eps * sum y_i^4)^(1/4)`.
    QuarticPerturbed { epsilon: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinkowskiNorm {
    dim: usize,
    kind: NormKind,
}

impl MinkowskiNorm {
    pub fn euclidean(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        MinkowskiNorm {
            dim,
            kind: NormKind::Euclidean,
        }
    }

    pub fn ellipsoid(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let dim = matrix.len();
        if dim == 0 || matrix.iter().any(|row| row.len() != dim) {
            return Err(Error::InvalidParameter("ellipsoid matrix must be square".into()));
        }
        for i in 0..dim {
            for j in 0..i {
                if (matrix[i][j] - matrix[j][i]).abs() > 1e-12 * (1.0 + matrix[i][j].abs()) {
                    return Err(Error::InvalidParameter(
                        "ellipsoid matrix must be symmetric".into(),
                    ));
                }
            }
        }
        if matrix.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("ellipsoid matrix is not finite".into()));
        }
        let min_ev = symmetric_eigenvalues(&matrix)[0];
        if !(min_ev > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "ellipsoid matrix must be positive definite (min eigenvalue {min_ev:e})"
            )));
        }
        Ok(MinkowskiNorm {
            dim,
            kind: NormKind::Ellipsoid { matrix },
        })
    }

    pub fn randers(b: Vec<f64>) -> Result<Self> {
        let dim = b.len();
        if dim == 0 {
            return Err(Error::InvalidParameter("randers vector is empty".into()));
        }
        let len = b.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(len < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "randers vector must satisfy |b| < 1 (got {len})"
            )));
        }
        Ok(MinkowskiNorm {
            dim,
            kind: NormKind::Randers { b },
        })
    }

    /// Positivity needs `epsilon > -1`; strong convexity is only checked
    /// numerically (see [`MinkowskiNorm::check`]).
    pub fn quartic_perturbed(dim: usize, epsilon: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if !(epsilon > -1.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "quartic perturbation must satisfy epsilon > -1 (got {epsilon})"
            )));
        }
        Ok(MinkowskiNorm {
            dim,
            kind: NormKind::QuarticPerturbed { epsilon },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &NormKind {
        &self.kind
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.kind, NormKind::Euclidean)
    }

    /// `phi(y)`; any scalar type, so the norm can be differentiated.
    pub fn eval<S: Scalar>(&self, y: &[S]) -> Result<S> {
        if y.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: y.len(),
            });
        }
        if y.iter().all(|c| c.value() == 0.0) {
            return Err(Error::UndefinedAtOrigin);
        }
        match &self.kind {
            NormKind::Euclidean => norm_sq(y).sqrt(),
            NormKind::Ellipsoid { matrix } => {
                let mut q = S::zero();
                for (i, row) in matrix.iter().enumerate() {
                    for (j, a) in row.iter().enumerate() {
                        q = q + y[i].clone() * y[j].clone() * *a;
                    }
                }
                q.sqrt()
            }
            NormKind::Randers { b } => {
                let bs: Vec<S> = b.iter().map(|&c| S::from_f64(c)).collect();
                Ok(norm_sq(y).sqrt()? + dot(&bs, y))
            }
            NormKind::QuarticPerturbed { epsilon } => {
                let r2 = norm_sq(y);
                let quartics = y
                    .iter()
                    .fold(S::zero(), |acc, c| acc + c.square().square());
                (r2.square() + quartics * *epsilon).sqrt()?.sqrt()
            }
        }
    }

    pub fn value(&self, y: &[f64]) -> Result<f64> {
        self.eval(y)
    }

    /// `g_y = 1/2 Hess(phi^2)(y)`.
    pub fn fundamental_tensor(&self, y: &[f64]) -> Result<Vec<Vec<f64>>> {
        let h = hessian_with(y, |p| Ok(self.eval(p)?.square()))?;
        Ok(h.into_iter()
            .map(|row| row.into_iter().map(|v| 0.5 * v).collect())
            .collect())
    }

    /// Samples the Minkowski axioms: homogeneity over
    /// [`HOMOGENEITY_FACTORS`] and positivity of `g_y`.
    pub fn check(&self, samples: &[Vec<f64>]) -> Result<MinkowskiReport> {
        let mut residual: f64 = 0.0;
        let mut min_eig = f64::INFINITY;
        let mut min_value = f64::INFINITY;
        for y in samples {
            let base = self.value(y)?;
            min_value = min_value.min(base);
            for &lambda in &HOMOGENEITY_FACTORS {
                let scaled: Vec<f64> = y.iter().map(|c| c * lambda).collect();
                residual = residual.max((self.value(&scaled)? - lambda * base).abs());
            }
            let g = self.fundamental_tensor(y)?;
            min_eig = min_eig.min(symmetric_eigenvalues(&g)[0]);
        }
        Ok(MinkowskiReport {
            samples: samples.len(),
            homogeneity_residual: residual,
            min_eigenvalue: min_eig,
            min_value,
            strongly_convex: min_eig > 0.0,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinkowskiReport {
    pub samples: usize,
    pub homogeneity_residual: f64,
    pub min_eigenvalue: f64,
    pub min_value: f64,
    /// False when some sampled `g_y` is not positive definite.
    pub strongly_convex: bool,
}

/// `{x : phi(x - x_o) < 1}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvexDomain {
    norm: MinkowskiNorm,
    base_point: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Membership {
    pub inside: bool,
    /// `1 - phi(x - x_o)`.
    pub margin: f64,
}

impl ConvexDomain {
    pub fn new(norm: MinkowskiNorm, base_point: Vec<f64>) -> Result<Self> {
        if base_point.len() != norm.dim() {
            return Err(Error::Dimension {
                expected: norm.dim(),
                got: base_point.len(),
            });
        }
        if base_point.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("base point is not finite".into()));
        }
        Ok(ConvexDomain { norm, base_point })
    }

    pub fn unit_ball(dim: usize) -> Self {
        ConvexDomain {
            norm: MinkowskiNorm::euclidean(dim),
            base_point: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.norm.dim()
    }

    pub fn norm(&self) -> &MinkowskiNorm {
        &self.norm
    }

    pub fn base_point(&self) -> &[f64] {
        &self.base_point
    }

    /// True for the euclidean unit ball centred at the origin.
    pub fn is_unit_ball(&self) -> bool {
        self.norm.is_euclidean() && self.base_point.iter().all(|&c| c == 0.0)
    }

    /// `phi(x - x_o)`, zero at the base point.
    pub fn level<S: Scalar>(&self, x: &[S]) -> Result<S> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let z: Vec<S> = x
            .iter()
            .zip(&self.base_point)
            .map(|(p, o)| p.clone() - *o)
            .collect();
        if values(&z).iter().all(|&c| c == 0.0) {
            return Ok(S::zero());
        }
        self.norm.eval(&z)
    }

    pub fn contains(&self, x: &[f64]) -> Result<Membership> {
        let level = self.level(x)?;
        Ok(Membership {
            inside: level < 1.0,
            margin: 1.0 - level,
        })
    }

    /// Errors unless `x` is strictly interior.
    pub fn require_interior(&self, x: &[f64]) -> Result<()> {
        let level = self.level(x)?;
        if !(level < 1.0) {
            return Err(Error::OutsideDomain { level });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_each_kind() {
        assert_eq!(MinkowskiNorm::euclidean(2).value(&[3.0, 4.0]).unwrap(), 5.0);
        let r = MinkowskiNorm::randers(vec![0.2, 0.0]).unwrap();
        assert!((r.value(&[1.0, 0.0]).unwrap() - 1.2).abs() < 1e-15);
        let e = MinkowskiNorm::ellipsoid(vec![vec![4.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(e.value(&[1.0, 0.0]).unwrap(), 2.0);
        let q = MinkowskiNorm::quartic_perturbed(2, 0.3).unwrap();
        assert!((q.value(&[1.0, 0.0]).unwrap() - 1.3f64.powf(0.25)).abs() < 1e-15);
    }

    #[test]
    fn origin_is_rejected() {
        let n = MinkowskiNorm::euclidean(2);
        assert!(matches!(n.value(&[0.0, 0.0]), Err(Error::UndefinedAtOrigin)));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(MinkowskiNorm::randers(vec![0.8, 0.7]).is_err());
        assert!(MinkowskiNorm::ellipsoid(vec![vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
        assert!(MinkowskiNorm::ellipsoid(vec![vec![1.0, 0.5], vec![0.0, 1.0]]).is_err());
        assert!(MinkowskiNorm::quartic_perturbed(2, -1.0).is_err());
        assert!(MinkowskiNorm::quartic_perturbed(2, f64::NAN).is_err());
    }

    #[test]
    fn euclidean_check_is_exact() {
        let samples = vec![vec![1.0, 0.0], vec![0.3, -0.9], vec![-2.0, 5.0]];
        let rep = MinkowskiNorm::euclidean(2).check(&samples).unwrap();
        assert!(rep.homogeneity_residual <= 1e-14);
        assert!((rep.min_eigenvalue - 1.0).abs() < 1e-12);
        assert!(rep.strongly_convex);
    }

    #[test]
    fn strongly_negative_quartic_loses_convexity() {
        let samples: Vec<Vec<f64>> = (0..64)
            .map(|k| {
                let t = k as f64 * std::f64::consts::PI / 64.0;
                vec![t.cos(), t.sin()]
            })
            .collect();
        let rep = MinkowskiNorm::quartic_perturbed(2, -0.9)
            .unwrap()
            .check(&samples)
            .unwrap();
        assert!(!rep.strongly_convex);
        assert!(rep.min_eigenvalue < 0.0);
    }

    #[test]
    fn domain_membership() {
        let ball = ConvexDomain::unit_ball(2);
        let m = ball.contains(&[0.5, 0.0]).unwrap();
        assert!(m.inside && (m.margin - 0.5).abs() < 1e-15);
        assert!(!ball.contains(&[1.0, 0.0]).unwrap().inside);
        assert!(ball.contains(&[0.0, 0.0]).unwrap().inside);

        let d = ConvexDomain::new(MinkowskiNorm::randers(vec![0.2, 0.0]).unwrap(), vec![0.0, 0.0])
            .unwrap();
        let m = d.contains(&[0.5, 0.0]).unwrap();
        assert!(m.inside && (m.margin - 0.4).abs() < 1e-15);
    }

    #[test]
    fn ellipsoid_identity_matches_euclidean() {
        let e = MinkowskiNorm::ellipsoid(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]])
            .unwrap();
        let u = MinkowskiNorm::euclidean(3);
        for y in [[0.1, -2.0, 3.0], [1.0, 1.0, 1.0], [-0.5, 0.0, 1e-3]] {
            assert!((e.value(&y).unwrap() - u.value(&y).unwrap()).abs() <= 1e-15);
        }
    }
}
