//! Deterministic sample generation: random interior points and the
//! structured `(x, y, u)` curvature grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::norm_sq;
use crate::norm::ConvexDomain;

/// Seeded generator shared by every sweep.
#[derive(Clone, Debug)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Euclidean unit vector, uniform on the sphere.
    pub fn unit_vector(&mut self, dim: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..dim).map(|_| self.rng.gen_range(-1.0..1.0)).collect();
            let r2 = norm_sq(&v);
            if r2 > 1e-4 && r2 <= 1.0 {
                let r = r2.sqrt();
                return v.into_iter().map(|c| c / r).collect();
            }
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    /// Point with `phi(x - x_o) <= level`, uniform in the sublevel set.
    pub fn interior_point(&mut self, domain: &ConvexDomain, level: f64) -> Result<Vec<f64>> {
        let dir = self.unit_vector(domain.dim());
        let rho = level * self.rng.gen::<f64>().powf(1.0 / domain.dim() as f64);
        point_at_level(domain, &dir, rho)
    }

    /// Orthonormal pair spanning a random 2-plane.
    pub fn orthonormal_pair(&mut self, dim: usize) -> (Vec<f64>, Vec<f64>) {
        let e = self.unit_vector(dim);
        loop {
            let w = self.unit_vector(dim);
            let c: f64 = w.iter().zip(&e).map(|(a, b)| a * b).sum();
            let f: Vec<f64> = w.iter().zip(&e).map(|(a, b)| a - c * b).collect();
            let r = norm_sq(&f).sqrt();
            if r > 0.1 {
                return (e, f.into_iter().map(|v| v / r).collect());
            }
        }
    }
}

/// `x_o + rho * dir / phi(dir)`, which sits at level `rho`.
pub fn point_at_level(domain: &ConvexDomain, dir: &[f64], rho: f64) -> Result<Vec<f64>> {
    let scale = rho / domain.norm().value(dir)?;
    Ok(domain
        .base_point()
        .iter()
        .zip(dir)
        .map(|(o, d)| o + scale * d)
        .collect())
}

/// Shape of the structured curvature grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    /// Number of radial levels, evenly spaced in `(0, max_level]`.
    pub radial_levels: usize,
    pub max_level: f64,
    pub y_angles: usize,
    pub u_angles: usize,
    /// Size of the random sweeps used by the pointwise identities.
    pub random_samples: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            radial_levels: 5,
            max_level: 0.7,
            y_angles: 5,
            u_angles: 8,
            random_samples: 100,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.radial_levels == 0 || self.y_angles == 0 || self.u_angles == 0 {
            return Err(Error::Config("grid counts must be positive".into()));
        }
        if !(self.max_level > 0.0 && self.max_level < 1.0) {
            return Err(Error::Config(format!(
                "grid.max_level must lie in (0, 1), got {}",
                self.max_level
            )));
        }
        Ok(())
    }

    pub fn flags(&self) -> usize {
        self.radial_levels * self.y_angles * self.u_angles
    }
}

/// One base point of the grid with its flag vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub flags: Vec<Vec<f64>>,
}

/// Radial levels `i/L * max_level` along seeded directions; in each level a
/// seeded 2-plane carries `y` at evenly spaced angles and the flags `u` at
/// offsets `(k + 1/2) pi / K` from `y`, so no flag is degenerate.
pub fn curvature_grid(domain: &ConvexDomain, spec: &GridSpec, seed: u64) -> Result<Vec<GridPoint>> {
    spec.validate()?;
    let mut sampler = Sampler::new(seed);
    let n = domain.dim();
    let mut out = Vec::with_capacity(spec.radial_levels * spec.y_angles);
    for i in 0..spec.radial_levels {
        let rho = spec.max_level * (i + 1) as f64 / spec.radial_levels as f64;
        let dir = sampler.unit_vector(n);
        let x = point_at_level(domain, &dir, rho)?;
        let (e, f) = sampler.orthonormal_pair(n);
        let in_plane = |angle: f64| -> Vec<f64> {
            e.iter()
                .zip(&f)
                .map(|(a, b)| angle.cos() * a + angle.sin() * b)
                .collect()
        };
        for j in 0..spec.y_angles {
            let beta = std::f64::consts::TAU * j as f64 / spec.y_angles as f64;
            let flags = (0..spec.u_angles)
                .map(|k| {
                    in_plane(beta + (k as f64 + 0.5) * std::f64::consts::PI / spec.u_angles as f64)
                })
                .collect();
            out.push(GridPoint {
                x: x.clone(),
                y: in_plane(beta),
                flags,
            });
        }
    }
    Ok(out)
}

/// `count` seeded `(x, y)` pairs with `phi(x - x_o) <= level` and unit `y`.
pub fn random_pairs(
    domain: &ConvexDomain,
    count: usize,
    level: f64,
    seed: u64,
) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    let mut sampler = Sampler::new(seed);
    (0..count)
        .map(|_| {
            let x = sampler.interior_point(domain, level)?;
            Ok((x, sampler.unit_vector(domain.dim())))
        })
        .collect()
}
