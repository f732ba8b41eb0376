use super::scalar::Scalar;
use super::taylor::{factorial, lift, lift_axis, Jet};
use crate::error::{Error, Result};

/// Highest total order `mixed_partial` supports.
pub const MAX_MIXED_ORDER: usize = 5;
/// Highest total order `fd_partial` supports.
pub const MAX_FD_ORDER: usize = 3;

/// A scalar field that can be evaluated over any [`Scalar`], and therefore
/// differentiated to any order by feeding it jets.
pub trait ScalarField {
    fn dim(&self) -> usize;
    fn eval<S: Scalar>(&self, p: &[S]) -> Result<S>;
}

/// Exponent per coordinate of a mixed partial derivative.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(exponents: Vec<usize>) -> Self {
        MultiIndex(exponents)
    }

    /// Builds the index from a list of coordinates, one entry per
    /// differentiation (`[0, 2, 2]` is `d^3 / dp0 dp2 dp2`).
    pub fn from_coords(dim: usize, coords: &[usize]) -> Self {
        let mut e = vec![0; dim];
        for &c in coords {
            e[c] += 1;
        }
        MultiIndex(e)
    }

    pub fn exponents(&self) -> &[usize] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.iter().sum()
    }

    /// Every multi-index in `dim` coordinates of total order exactly `order`.
    pub fn all_of_order(dim: usize, order: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut current = vec![0; dim];
        fn rec(pos: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
            if pos + 1 == cur.len() {
                cur[pos] = left;
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for k in (0..=left).rev() {
                cur[pos] = k;
                rec(pos + 1, left - k, cur, out);
            }
            cur[pos] = 0;
        }
        if dim > 0 {
            rec(0, order, &mut current, &mut out);
        }
        out
    }
}

/// Taylor coefficients of `t -> f(p + t d)` at `t = 0` through order `m`.
pub fn taylor_directional<F: ScalarField>(
    f: &F,
    p: &[f64],
    d: &[f64],
    m: usize,
) -> Result<Jet<f64>> {
    check_dim(f.dim(), p.len())?;
    check_dim(f.dim(), d.len())?;
    f.eval(&lift(p, d, m))
}

type Nested5 = Jet<Jet<Jet<Jet<Jet<f64>>>>>;

/// `d^alpha f (p)`, one nested jet level per distinct coordinate of `alpha`.
pub fn mixed_partial<F: ScalarField>(f: &F, p: &[f64], alpha: &MultiIndex) -> Result<f64> {
    check_dim(f.dim(), p.len())?;
    check_dim(p.len(), alpha.0.len())?;
    if alpha.order() > MAX_MIXED_ORDER {
        return Err(Error::OrderTooHigh {
            requested: alpha.order(),
            limit: MAX_MIXED_ORDER,
        });
    }
    let mut path = Vec::new();
    let point: Vec<Nested5> = p
        .iter()
        .zip(&alpha.0)
        .map(|(&v, &a)| {
            if a == 0 {
                Nested5::from_f64(v)
            } else {
                path.push(a);
                Nested5::seeded(v, path.len() - 1, a)
            }
        })
        .collect();
    let value = f.eval(&point)?;
    let scale: f64 = path.iter().map(|&a| factorial(a)).product();
    Ok(value.coefficient(&path) * scale)
}

/// Gradient of `f` at `p` by one dual pass per coordinate.
pub fn gradient_with<S, F>(p: &[S], f: F) -> Result<Vec<S>>
where
    S: Scalar,
    F: Fn(&[Jet<S>]) -> Result<Jet<S>>,
{
    (0..p.len())
        .map(|i| Ok(f(&lift_axis(p, i, 1))?.coeff(1)))
        .collect()
}

/// Hessian of `f` at `p` by nested dual passes over the upper triangle.
pub fn hessian_with<S, F>(p: &[S], f: F) -> Result<Vec<Vec<S>>>
where
    S: Scalar,
    F: Fn(&[Jet<Jet<S>>]) -> Result<Jet<Jet<S>>>,
{
    let n = p.len();
    let mut h = vec![vec![S::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let point: Vec<Jet<Jet<S>>> = p
                .iter()
                .enumerate()
                .map(|(k, v)| {
                    let inner = Jet::variable(v.clone(), S::from_f64(delta(j, k)), 1);
                    let outer_dir = Jet::constant(S::from_f64(delta(i, k)));
                    Jet::from_coeffs(vec![inner, outer_dir])
                })
                .collect();
            let v = f(&point)?.coeff(1).coeff(1);
            h[i][j] = v.clone();
            h[j][i] = v;
        }
    }
    Ok(h)
}

pub(crate) fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// Central-difference step used when the caller has no preference.
pub fn default_fd_step(order: usize) -> f64 {
    if order >= 3 {
        1e-3
    } else {
        1e-5
    }
}

fn stencil(exponent: usize) -> &'static [(i32, f64)] {
    match exponent {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        _ => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
    }
}

/// Central finite-difference estimate of `d^alpha f (p)`: a tensor product
/// of the standard per-coordinate stencils.
pub fn fd_partial<F: ScalarField>(f: &F, p: &[f64], alpha: &MultiIndex, h: f64) -> Result<f64> {
    check_dim(f.dim(), p.len())?;
    check_dim(p.len(), alpha.0.len())?;
    if alpha.order() > MAX_FD_ORDER {
        return Err(Error::OrderTooHigh {
            requested: alpha.order(),
            limit: MAX_FD_ORDER,
        });
    }
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("finite-difference step {h}")));
    }
    let axes: Vec<(usize, usize)> = alpha
        .0
        .iter()
        .enumerate()
        .filter(|(_, &a)| a > 0)
        .map(|(i, &a)| (i, a))
        .collect();
    let mut total = 0.0;
    let mut q = p.to_vec();
    fd_rec(f, &axes, 0, 1.0, &mut q, p, h, &mut total)?;
    Ok(total / h.powi(alpha.order() as i32))
}

#[allow(clippy::too_many_arguments)]
fn fd_rec<F: ScalarField>(
    f: &F,
    axes: &[(usize, usize)],
    depth: usize,
    weight: f64,
    q: &mut [f64],
    p: &[f64],
    h: f64,
    total: &mut f64,
) -> Result<()> {
    if depth == axes.len() {
        *total += weight * f.eval(q)?;
        return Ok(());
    }
    let (axis, exponent) = axes[depth];
    for &(offset, w) in stencil(exponent) {
        q[axis] = p[axis] + offset as f64 * h;
        fd_rec(f, axes, depth + 1, weight * w, q, p, h, total)?;
    }
    q[axis] = p[axis];
    Ok(())
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension { expected, got });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::scalar::{dot, norm_sq};

    /// |y|
    struct Norm(usize);
    impl ScalarField for Norm {
        fn dim(&self) -> usize {
            self.0
        }
        fn eval<S: Scalar>(&self, p: &[S]) -> Result<S> {
            norm_sq(p).sqrt()
        }
    }

    /// <y, y>
    struct Quadratic;
    impl ScalarField for Quadratic {
        fn dim(&self) -> usize {
            2
        }
        fn eval<S: Scalar>(&self, p: &[S]) -> Result<S> {
            Ok(dot(p, p))
        }
    }

    /// |y|^3
    struct Cubed;
    impl ScalarField for Cubed {
        fn dim(&self) -> usize {
            2
        }
        fn eval<S: Scalar>(&self, p: &[S]) -> Result<S> {
            norm_sq(p).sqrt()?.powi(3)
        }
    }

    /// x y^2 on R^2
    struct XySq;
    impl ScalarField for XySq {
        fn dim(&self) -> usize {
            2
        }
        fn eval<S: Scalar>(&self, p: &[S]) -> Result<S> {
            Ok(p[0].clone() * p[1].square())
        }
    }

    struct Exp;
    impl ScalarField for Exp {
        fn dim(&self) -> usize {
            1
        }
        fn eval<S: Scalar>(&self, p: &[S]) -> Result<S> {
            Ok(p[0].exp())
        }
    }

    #[test]
    fn directional_quadratic_expansion() {
        let j = taylor_directional(&Quadratic, &[1.0, 0.0], &[0.0, 1.0], 2).unwrap();
        assert_eq!(j.coeffs(), &[1.0, 0.0, 1.0]);
    }

    #[test]
    fn directional_norm_expansion() {
        let j = taylor_directional(&Norm(2), &[1.0, 0.0], &[0.0, 1.0], 2).unwrap();
        assert!((j.coeff(0) - 1.0).abs() < 1e-15);
        assert!(j.coeff(1).abs() < 1e-15);
        assert!((j.coeff(2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn directional_cubed_norm_first_coefficient() {
        let j = taylor_directional(&Cubed, &[0.6, 0.8], &[1.0, 0.0], 1).unwrap();
        assert!((j.coeff(1) - 1.8).abs() < 1e-14);
        let fd = fd_partial(&Cubed, &[0.6, 0.8], &MultiIndex::new(vec![1, 0]), 1e-5).unwrap();
        assert!((fd - 1.8).abs() < 1e-8);
    }

    #[test]
    fn mixed_partial_trivial_cases() {
        let v = mixed_partial(&XySq, &[0.3, -1.7], &MultiIndex::new(vec![1, 2])).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
        struct HalfSq;
        impl ScalarField for HalfSq {
            fn dim(&self) -> usize {
                2
            }
            fn eval<S: Scalar>(&self, p: &[S]) -> Result<S> {
                Ok(norm_sq(p) * 0.5)
            }
        }
        let v = mixed_partial(&HalfSq, &[0.4, 2.0], &MultiIndex::new(vec![2, 0])).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn mixed_partial_rejects_order_six() {
        let err = mixed_partial(&Quadratic, &[1.0, 1.0], &MultiIndex::new(vec![3, 3]));
        assert!(matches!(err, Err(Error::OrderTooHigh { .. })));
    }

    #[test]
    fn fd_gradient_of_norm() {
        let g = fd_partial(&Norm(2), &[3.0, 4.0], &MultiIndex::new(vec![1, 0]), 1e-5).unwrap();
        assert!((g - 0.6).abs() < 1e-9, "{g}");
    }

    #[test]
    fn fd_second_derivative_of_exp() {
        let v = fd_partial(&Exp, &[1.0], &MultiIndex::new(vec![2]), 1e-4).unwrap();
        assert!((v - std::f64::consts::E).abs() < 1e-7, "{v}");
    }

    #[test]
    fn fd_rejects_high_orders_and_bad_steps() {
        let a4 = MultiIndex::new(vec![2, 2]);
        assert!(fd_partial(&Quadratic, &[1.0, 1.0], &a4, 1e-3).is_err());
        let a1 = MultiIndex::new(vec![1, 0]);
        assert!(fd_partial(&Quadratic, &[1.0, 1.0], &a1, 0.0).is_err());
    }

    #[test]
    fn all_of_order_counts() {
        assert_eq!(MultiIndex::all_of_order(4, 1).len(), 4);
        assert_eq!(MultiIndex::all_of_order(4, 2).len(), 10);
        assert_eq!(MultiIndex::all_of_order(4, 3).len(), 20);
        assert!(MultiIndex::all_of_order(3, 2).iter().all(|m| m.order() == 2));
    }

    #[test]
    fn norm_at_origin_is_a_domain_error_for_jets() {
        assert!(taylor_directional(&Norm(2), &[0.0, 0.0], &[1.0, 0.0], 2).is_err());
    }
}
