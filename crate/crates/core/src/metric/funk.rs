//! The Funk metric: implicit ray solve on a general domain, closed form on
//! the unit ball.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::{dot, norm_sq, perturbation_degree, values, Jet, Scalar};
use crate::norm::{ConvexDomain, MinkowskiNorm};

pub const RESIDUAL_TOL: f64 = 1e-13;
pub const MAX_ITERATIONS: usize = 60;
const MAX_DOUBLINGS: usize = 200;

/// Diagnostics of one scalar solve of `phi(z + s y) = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NewtonSolveTrace {
    pub iterations: usize,
    /// `|phi(z + s y) - 1|` at the returned root.
    pub residual: f64,
    /// Bracket `[lo, hi]` in `s = 1/F` that contained the root.
    pub bracket: (f64, f64),
}

/// Solves `phi(z + s y) = 1` for `s > 0` given `phi(z) < 1`.
///
/// `s -> phi(z + s y)` is convex and below one at `s = 0`, so it crosses one
/// exactly once. Bracket by doubling, then Newton from the right end of the
/// bracket with a bisection fallback.
pub fn solve_ray(norm: &MinkowskiNorm, z: &[f64], y: &[f64]) -> Result<(f64, NewtonSolveTrace)> {
    let h = |s: f64| -> Result<f64> {
        let p: Vec<f64> = z.iter().zip(y).map(|(a, b)| a + s * b).collect();
        Ok(norm.value(&p)? - 1.0)
    };
    let dh = |s: f64| -> Result<(f64, f64)> {
        let p: Vec<Jet<f64>> = z
            .iter()
            .zip(y)
            .map(|(a, b)| Jet::variable(a + s * b, *b, 1))
            .collect();
        let v = norm.eval(&p)?;
        Ok((v.coeff(0) - 1.0, v.coeff(1)))
    };

    let mut lo = 0.0;
    let mut hi = 1.0 / norm.value(y)?;
    let mut doublings = 0;
    while h(hi)? <= 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_DOUBLINGS || !hi.is_finite() {
            return Err(Error::Solver(NewtonSolveTrace {
                iterations: 0,
                residual: f64::INFINITY,
                bracket: (lo, hi),
            }));
        }
    }
    let bracket = (lo, hi);

    let mut s = hi;
    let mut polished = false;
    for it in 1..=MAX_ITERATIONS {
        let (r, slope) = dh(s)?;
        if r.abs() <= RESIDUAL_TOL {
            let newton = s - r / slope;
            // one extra Newton step once the tolerance is met takes s to roundoff
            if polished || !(slope > 0.0) || newton == s {
                return Ok((
                    s,
                    NewtonSolveTrace {
                        iterations: it,
                        residual: r.abs(),
                        bracket,
                    },
                ));
            }
            polished = true;
            s = newton;
            continue;
        }
        if r > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        let mut next = if slope > 0.0 { s - r / slope } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        s = next;
    }
    let residual = h(s)?.abs();
    if residual <= RESIDUAL_TOL {
        return Ok((
            s,
            NewtonSolveTrace {
                iterations: MAX_ITERATIONS,
                residual,
                bracket,
            },
        ));
    }
    Err(Error::Solver(NewtonSolveTrace {
        iterations: MAX_ITERATIONS,
        residual,
        bracket,
    }))
}

/// Number of jet-level Newton updates needed to make every Taylor
/// coefficient of total degree `degree` exact (each update doubles it).
pub fn newton_steps_for(degree: usize) -> usize {
    let mut steps = 0;
    while (1usize << steps) <= degree {
        steps += 1;
    }
    steps
}

/// Funk metric of `domain`, defined by `phi(x - x_o + y/F) = 1`.
///
/// The root is found on plain values; the derivative coefficients are then
/// produced by Newton updates carried out in full jet arithmetic.
pub fn funk_implicit<S: Scalar>(domain: &ConvexDomain, x: &[S], y: &[S]) -> Result<S> {
    let norm = domain.norm();
    let level = domain.level(&values(x))?;
    if !(level < 1.0) {
        return Err(Error::OutsideDomain { level });
    }
    let z: Vec<S> = x
        .iter()
        .zip(domain.base_point())
        .map(|(p, o)| p.clone() - *o)
        .collect();
    let (s0, _) = solve_ray(norm, &values(&z), &values(y))?;

    let inputs: Vec<S> = x.iter().chain(y).cloned().collect();
    let degree = perturbation_degree(&inputs);
    let mut s = S::from_f64(s0);
    for _ in 0..newton_steps_for(degree) {
        let ray: Vec<Jet<S>> = z
            .iter()
            .zip(y)
            .map(|(a, b)| Jet::variable(a.clone() + s.clone() * b.clone(), b.clone(), 1))
            .collect();
        let h = norm.eval(&ray)?;
        let step = (h.coeff(0) - 1.0).checked_div(&h.coeff(1))?;
        s = s - step;
    }
    s.recip()
}

/// `|y|^2 - (|x|^2 |y|^2 - <x, y>^2)`, the radicand of the ball formulas.
pub fn ball_radicand<S: Scalar>(x: &[S], y: &[S]) -> S {
    let yy = norm_sq(y);
    let xx = norm_sq(x);
    let xy = dot(x, y);
    yy.clone() - (xx * yy - xy.square())
}

/// Closed-form Funk metric of the euclidean unit ball.
pub fn funk_ball<S: Scalar>(x: &[S], y: &[S]) -> Result<S> {
    let xx = norm_sq(x);
    if !(xx.value() < 1.0) {
        return Err(Error::OutsideDomain {
            level: xx.value().sqrt(),
        });
    }
    let root = ball_radicand(x, y).sqrt()?;
    (root + dot(x, y)).checked_div(&(-xx + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newton_step_counts() {
        assert_eq!(newton_steps_for(0), 0);
        assert_eq!(newton_steps_for(1), 1);
        assert_eq!(newton_steps_for(2), 2);
        assert_eq!(newton_steps_for(3), 2);
        assert_eq!(newton_steps_for(5), 3);
        assert_eq!(newton_steps_for(8), 4);
    }

    #[test]
    fn ray_solve_on_circle() {
        let n = MinkowskiNorm::euclidean(2);
        let (s, trace) = solve_ray(&n, &[0.5, 0.0], &[0.0, 1.0]).unwrap();
        assert!((s - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!(trace.residual <= RESIDUAL_TOL);
        assert!(trace.bracket.0 < s && s <= trace.bracket.1);
    }

    #[test]
    fn ray_solve_handles_tiny_and_huge_directions() {
        let n = MinkowskiNorm::euclidean(2);
        let (s, _) = solve_ray(&n, &[0.0, 0.0], &[1e-9, 0.0]).unwrap();
        assert!((s * 1e-9 - 1.0).abs() < 1e-14);
        let (s, _) = solve_ray(&n, &[0.3, 0.0], &[1e9, 0.0]).unwrap();
        assert!((s * 1e9 - 0.7).abs() < 1e-14);
    }

    #[test]
    fn closed_form_values() {
        assert!((funk_ball(&[0.0, 0.0], &[3.0, 4.0]).unwrap() - 5.0).abs() < 1e-15);
        assert!((funk_ball(&[0.5, 0.0], &[1.0, 0.0]).unwrap() - 2.0).abs() < 1e-15);
        assert!((funk_ball(&[0.5, 0.0], &[0.0, 1.0]).unwrap() - 2.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!(funk_ball(&[1.0, 0.0], &[0.0, 1.0]).is_err());
    }
}
