//! Integral curves of a spray, `x'' = -2 G(x, x')`, and the straightness
//! measures used to check projective flatness.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::curvature::Spray;
use crate::error::Error;
use crate::linalg::euclid_norm;
use crate::metric::FinslerMetric;

/// Integration stops, flagged, once the domain margin drops below this.
pub const BOUNDARY_MARGIN: f64 = 1e-3;
pub const MAX_STEPS: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct IntegratorStats {
    pub steps: usize,
    pub rejected: usize,
    pub max_error_estimate: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Completed,
    /// Stopped early because the margin fell below [`BOUNDARY_MARGIN`].
    BoundaryApproach,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub stats: IntegratorStats,
    pub termination: Termination,
}

#[derive(Clone, Debug, Error)]
pub enum IntegrationError {
    #[error("step size underflow at t = {t} after {} accepted steps", .partial.samples.len())]
    StepUnderflow { t: f64, partial: Trajectory },
    #[error("too many steps ({0})")]
    TooManySteps(usize),
    #[error(transparent)]
    Eval(#[from] Error),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrateOptions {
    /// Absolute and relative tolerance of the embedded error estimate.
    pub tol: f64,
    /// Upper bound on the step, which also bounds the sample spacing.
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            tol: 1e-10,
            max_step: 0.05,
            max_steps: MAX_STEPS,
        }
    }
}

impl IntegrateOptions {
    pub fn with_tol(tol: f64) -> Self {
        IntegrateOptions {
            tol,
            ..Default::default()
        }
    }
}

// Dormand-Prince 5(4) tableau; the system is autonomous so the nodes are unused.
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn rhs(spray: &Spray, state: &[f64]) -> Result<Vec<f64>, Error> {
    let n = state.len() / 2;
    let (x, v) = state.split_at(n);
    let g = spray.value(x, v)?;
    Ok(v.iter().copied().chain(g.iter().map(|c| -2.0 * c)).collect())
}

fn margin(spray: &Spray, x: &[f64]) -> Result<f64, Error> {
    Ok(spray.domain().contains(x)?.margin)
}

/// Adaptive Dormand-Prince integration of the geodesic equation of `spray`
/// from `(x0, y0)` up to `t_end`.
pub fn integrate(
    spray: &Spray,
    x0: &[f64],
    y0: &[f64],
    t_end: f64,
    opts: IntegrateOptions,
) -> Result<Trajectory, IntegrationError> {
    let n = spray.dim();
    if x0.len() != n || y0.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: x0.len().max(y0.len()),
        }
        .into());
    }
    if y0.iter().all(|&c| c == 0.0) {
        return Err(Error::UndefinedAtOrigin.into());
    }
    spray.domain().require_interior(x0)?;
    if !(t_end > 0.0) || !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter("t_end and tol must be positive".into()).into());
    }

    let mut state: Vec<f64> = x0.iter().chain(y0).copied().collect();
    let mut t = 0.0;
    let mut samples = vec![TrajectorySample {
        t,
        x: x0.to_vec(),
        v: y0.to_vec(),
    }];
    let mut stats = IntegratorStats::default();
    let mut h = (0.01 * t_end).min(opts.max_step);
    let mut k0 = rhs(spray, &state)?;
    let dim = state.len();

    let finish = |samples, stats, termination| Trajectory {
        samples,
        stats,
        termination,
    };

    while t < t_end {
        if stats.steps + stats.rejected >= opts.max_steps {
            return Err(IntegrationError::TooManySteps(opts.max_steps));
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(IntegrationError::StepUnderflow {
                t,
                partial: finish(samples, stats, Termination::Completed),
            });
        }
        h = h.min(t_end - t);

        let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
        k.push(k0.clone());
        let mut failed = false;
        for s in 1..7 {
            let stage: Vec<f64> = (0..dim)
                .map(|i| state[i] + h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>())
                .collect();
            let inside = margin(spray, &stage[..n]).map(|m| m > 0.0).unwrap_or(false);
            match inside.then(|| rhs(spray, &stage)) {
                Some(Ok(v)) => k.push(v),
                _ => {
                    failed = true;
                    break;
                }
            }
        }
        if failed {
            stats.rejected += 1;
            h *= 0.25;
            continue;
        }
        let next: Vec<f64> = (0..dim)
            .map(|i| state[i] + h * (0..7).map(|j| B5[j] * k[j][i]).sum::<f64>())
            .collect();
        let err = ((0..dim)
            .map(|i| {
                let e = h * (0..7).map(|j| (B5[j] - B4[j]) * k[j][i]).sum::<f64>();
                let sc = opts.tol + opts.tol * state[i].abs().max(next[i].abs());
                (e / sc).powi(2)
            })
            .sum::<f64>()
            / dim as f64)
            .sqrt();

        if err <= 1.0 {
            t += h;
            state = next;
            k0 = k.pop().expect("seven stages");
            stats.steps += 1;
            stats.max_error_estimate = stats.max_error_estimate.max(err * opts.tol);
            samples.push(TrajectorySample {
                t,
                x: state[..n].to_vec(),
                v: state[n..].to_vec(),
            });
            if margin(spray, &state[..n])? < BOUNDARY_MARGIN {
                return Ok(finish(samples, stats, Termination::BoundaryApproach));
            }
        } else {
            stats.rejected += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { 0.9 * err.powf(-0.2) };
        h = (h * factor.clamp(0.2, 5.0)).min(opts.max_step);
    }
    Ok(finish(samples, stats, Termination::Completed))
}

fn path_length(traj: &Trajectory) -> f64 {
    traj.samples
        .windows(2)
        .map(|w| {
            let d: Vec<f64> = w[1].x.iter().zip(&w[0].x).map(|(a, b)| a - b).collect();
            euclid_norm(&d)
        })
        .sum()
}

fn distance_to_line(p: &[f64], origin: &[f64], unit_dir: &[f64]) -> f64 {
    let d: Vec<f64> = p.iter().zip(origin).map(|(a, b)| a - b).collect();
    let along: f64 = d.iter().zip(unit_dir).map(|(a, b)| a * b).sum();
    let perp: Vec<f64> = d.iter().zip(unit_dir).map(|(a, b)| a - along * b).collect();
    euclid_norm(&perp)
}

/// Largest distance from `x(t)` to the line through `x(0)` along `x'(0)`,
/// relative to the path length. Meaningful for three or more samples.
pub fn straightness_residual(traj: &Trajectory) -> f64 {
    let Some(first) = traj.samples.first() else {
        return 0.0;
    };
    let len = path_length(traj);
    if len == 0.0 {
        return 0.0;
    }
    let speed = euclid_norm(&first.v);
    let dir: Vec<f64> = first.v.iter().map(|c| c / speed).collect();
    traj.samples
        .iter()
        .map(|s| distance_to_line(&s.x, &first.x, &dir))
        .fold(0.0, f64::max)
        / len
}

fn distance_to_polyline(p: &[f64], poly: &[&[f64]]) -> f64 {
    if poly.len() == 1 {
        let d: Vec<f64> = p.iter().zip(poly[0]).map(|(a, b)| a - b).collect();
        return euclid_norm(&d);
    }
    poly.windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let ab: Vec<f64> = b.iter().zip(a).map(|(p, q)| p - q).collect();
            let ap: Vec<f64> = p.iter().zip(a).map(|(p, q)| p - q).collect();
            let den: f64 = ab.iter().map(|c| c * c).sum();
            let s = if den == 0.0 {
                0.0
            } else {
                (ap.iter().zip(&ab).map(|(p, q)| p * q).sum::<f64>() / den).clamp(0.0, 1.0)
            };
            let diff: Vec<f64> = ap.iter().zip(&ab).map(|(p, q)| p - s * q).collect();
            euclid_norm(&diff)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Hausdorff distance between the point sets of two trajectories sharing
/// a start point, restricted to the extent they have in common along the
/// initial direction of `a`. Samples past that extent are dropped from the
/// source side only, so the other curve is never cut short mid-step.
pub fn overlap_hausdorff(a: &Trajectory, b: &Trajectory) -> f64 {
    let (Some(a0), Some(_)) = (a.samples.first(), b.samples.first()) else {
        return 0.0;
    };
    let speed = euclid_norm(&a0.v);
    let dir: Vec<f64> = a0.v.iter().map(|c| c / speed).collect();
    let proj = |x: &[f64]| -> f64 { x.iter().zip(&a0.x).zip(&dir).map(|((p, o), d)| (p - o) * d).sum() };
    let extent = |t: &Trajectory| t.samples.iter().map(|s| proj(&s.x)).fold(f64::NEG_INFINITY, f64::max);
    let common = extent(a).min(extent(b));
    let points = |t: &Trajectory| -> Vec<Vec<f64>> { t.samples.iter().map(|s| s.x.clone()).collect() };
    let (pa, pb) = (points(a), points(b));
    let ra: Vec<&[f64]> = pa.iter().map(Vec::as_slice).collect();
    let rb: Vec<&[f64]> = pb.iter().map(Vec::as_slice).collect();
    let one_sided = |from: &[&[f64]], to: &[&[f64]]| {
        from.iter()
            .filter(|p| proj(p) <= common + 1e-12)
            .map(|p| distance_to_polyline(p, to))
            .fold(0.0, f64::max)
    };
    one_sided(&ra, &rb).max(one_sided(&rb, &ra))
}

/// `max_t |F(x, x') - F(x0, x0')| / F(x0, x0')`.
pub fn speed_drift(metric: &FinslerMetric, traj: &Trajectory) -> Result<f64, Error> {
    let first = traj.samples.first().ok_or_else(|| Error::InvalidParameter("empty trajectory".into()))?;
    let f0 = metric.value(&first.x, &first.v)?;
    let mut worst: f64 = 0.0;
    for s in &traj.samples {
        worst = worst.max((metric.value(&s.x, &s.v)? - f0).abs() / f0);
    }
    Ok(worst)
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.samples.first().map_or(0, |s| s.x.len())
    }

    pub fn end(&self) -> &TrajectorySample {
        self.samples.last().expect("a trajectory always holds its start point")
    }

    /// CSV with columns `t, x1..xn, y1..yn` at 17 significant digits.
    pub fn to_csv(&self) -> String {
        let n = self.dim();
        let mut out = String::from("t");
        for i in 1..=n {
            let _ = write!(out, ",x{i}");
        }
        for i in 1..=n {
            let _ = write!(out, ",y{i}");
        }
        out.push('\n');
        for s in &self.samples {
            let _ = write!(out, "{:.16e}", s.t);
            for c in s.x.iter().chain(&s.v) {
                let _ = write!(out, ",{c:.16e}");
            }
            out.push('\n');
        }
        out
    }
}
