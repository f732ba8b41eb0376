//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs without the libtest harness so every line is
//! printed regardless of outcome.

use std::time::{Duration, Instant};

use finsler_core::curvature::{
    check_inverse_pde, check_rapcsak, funk_pde_residual, funk_spray, riemann, CurvatureAt, Spray,
};
use finsler_core::error::Result;
use finsler_core::geodesic::straightness_residual;
use finsler_core::jet::{default_fd_step, fd_partial, mixed_partial, MultiIndex};
use finsler_core::metric::{FinslerMetric, JointField, SeriesMetric};
use finsler_core::norm::{ConvexDomain, MinkowskiNorm};
use finsler_core::sampling::{curvature_grid, random_pairs, GridPoint, GridSpec};
use finsler_core::verify::{geodesic_starts, sweep, trace};
use rayon::prelude::*;

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

/// Residuals must all be finite and within `tol`; evaluation errors fail.
fn within(label: &str, (values, errors): (Vec<f64>, Vec<String>), tol: f64) -> Outcome {
    let worst = values.iter().fold(0.0f64, |m, &v| if v.is_nan() { f64::NAN } else { m.max(v) });
    let pass = errors.is_empty() && worst.is_finite() && worst <= tol;
    let mut detail = format!("{label}: max {worst:.3e} (tol {tol:.0e}, n={})", values.len() + errors.len());
    if let Some(e) = errors.first() {
        detail.push_str(&format!(", {} errors, first: {e}", errors.len()));
    }
    Outcome { pass, detail }
}

fn all(parts: Vec<Outcome>) -> Outcome {
    Outcome {
        pass: parts.iter().all(|p| p.pass),
        detail: parts
            .iter()
            .map(|p| format!("[{}] {}", if p.pass { "ok" } else { "FAIL" }, p.detail))
            .collect::<Vec<_>>()
            .join("; "),
    }
}

fn ellipsoid_domain() -> ConvexDomain {
    let norm = MinkowskiNorm::ellipsoid(vec![vec![2.0, 0.3], vec![0.3, 1.0]]).unwrap();
    ConvexDomain::new(norm, vec![0.1, 0.0]).unwrap()
}

fn randers_domain() -> ConvexDomain {
    let norm = MinkowskiNorm::randers(vec![0.3, 0.1]).unwrap();
    ConvexDomain::new(norm, vec![0.05, -0.05]).unwrap()
}

fn domains() -> Vec<(&'static str, ConvexDomain)> {
    vec![
        ("ball", ConvexDomain::unit_ball(2)),
        ("ellipsoid", ellipsoid_domain()),
        ("randers-norm", randers_domain()),
    ]
}

fn grid(domain: &ConvexDomain) -> Vec<GridPoint> {
    curvature_grid(domain, &GridSpec::default(), SEED).unwrap()
}

/// Curvature data per grid base point, computed once per metric.
fn curvature_data(metric: &FinslerMetric, points: &[GridPoint]) -> Vec<Result<CurvatureAt>> {
    points.par_iter().map(|p| CurvatureAt::new(metric, &p.x, &p.y)).collect()
}

/// `|K - lambda|` at every flag of the grid.
fn flag_deviation(data: &[Result<CurvatureAt>], points: &[GridPoint], lambda: f64) -> (Vec<f64>, Vec<String>) {
    let mut values = Vec::new();
    let mut errors = Vec::new();
    for (d, p) in data.iter().zip(points) {
        let d = match d {
            Ok(d) => d,
            Err(e) => {
                errors.push(e.to_string());
                continue;
            }
        };
        for u in &p.flags {
            match d.flag_curvature(u) {
                Ok(s) => values.push((s.value - lambda).abs()),
                Err(e) => errors.push(e.to_string()),
            }
        }
    }
    (values, errors)
}

fn per_point(data: &[Result<CurvatureAt>], f: impl Fn(&CurvatureAt) -> f64) -> (Vec<f64>, Vec<String>) {
    let mut values = Vec::new();
    let mut errors = Vec::new();
    for d in data {
        match d {
            Ok(d) => values.push(f(d)),
            Err(e) => errors.push(e.to_string()),
        }
    }
    (values, errors)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let domain = ConvexDomain::unit_ball(2);
    let points = grid(&domain);
    let data = curvature_data(&FinslerMetric::funk_ball(2), &points);
    let k = within("K + 1/4 on 200 flags", flag_deviation(&data, &points, -0.25), 1e-6);
    let elapsed = start.elapsed();
    let time = Outcome {
        pass: elapsed <= Duration::from_secs(30),
        detail: format!("runtime {:.2} s (limit 30 s)", elapsed.as_secs_f64()),
    };
    all(vec![k, time])
}

fn criterion_2() -> Outcome {
    let points = grid(&ConvexDomain::unit_ball(2));
    let data = curvature_data(&FinslerMetric::hilbert_ball(2), &points);
    within("K + 1 on 200 flags", flag_deviation(&data, &points, -1.0), 1e-5)
}

fn criterion_3() -> Outcome {
    all(domains()
        .into_iter()
        .map(|(name, domain)| {
            let funk = FinslerMetric::funk(&domain);
            let spray = funk_spray(&funk).unwrap();
            let pairs = random_pairs(&domain, 200, 0.7, SEED).unwrap();
            let r = sweep(&pairs, |(x, y)| {
                let f = funk.value(x, y)?;
                Ok(riemann(&spray, x, y)?.max_abs() / (f * f))
            });
            within(&format!("{name} max|R|/F^2"), r, 1e-8)
        })
        .collect())
}

fn criterion_4() -> Outcome {
    let ball = ConvexDomain::unit_ball(2);
    let points = grid(&ball);
    let funk = FinslerMetric::funk_ball(2);
    let mut parts = Vec::new();
    for anchor in [vec![0.0, 0.0], vec![0.2, 0.0]] {
        let variants = [
            ("generic", FinslerMetric::shen_k0(&ball, anchor.clone()).unwrap()),
            ("closed-form", FinslerMetric::shen_k0_ball(anchor.clone()).unwrap()),
        ];
        for (route, metric) in variants {
            let label = format!("{route} a=({}, {})", anchor[0], anchor[1]);
            let data = curvature_data(&metric, &points);
            parts.push(within(&format!("{label} |K|"), flag_deviation(&data, &points, 0.0), 1e-6));
            let pde = sweep(&points, |p| check_inverse_pde(&funk, &metric, &p.x, &p.y));
            parts.push(within(&format!("{label} inverse-problem residual"), pde, 1e-9));
            let (eigs, errors) = per_point(&data, |d| d.min_eigenvalue);
            let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
            parts.push(Outcome {
                pass: errors.is_empty() && min > 0.0,
                detail: format!("{label} min eigenvalue of g: {min:.3e}"),
            });
        }
    }
    all(parts)
}

fn criterion_5() -> Outcome {
    all(domains()
        .into_iter()
        .map(|(name, domain)| {
            let funk = FinslerMetric::funk_implicit(&domain);
            let pairs = random_pairs(&domain, 100, 0.7, SEED ^ 5).unwrap();
            within(&format!("{name} Funk PDE / F^2"), sweep(&pairs, |(x, y)| funk_pde_residual(&funk, x, y)), 1e-9)
        })
        .collect())
}

fn criterion_6() -> Outcome {
    let euclid = MinkowskiNorm::euclidean(2);
    let ball = ConvexDomain::unit_ball(2);
    let series = FinslerMetric::series(SeriesMetric::new(euclid.clone(), euclid.clone(), 12).unwrap()).unwrap();
    let closed = FinslerMetric::shen_k0_ball(vec![0.0, 0.0]).unwrap();
    let pairs = random_pairs(&ball, 20, 0.2, SEED ^ 6).unwrap();
    let agree = sweep(&pairs, |(x, y)| Ok((series.value(x, y)? - closed.value(x, y)?).abs()));
    let closed_form = within("M=12 euclidean series vs Shen ball closed form", agree, 1e-8);

    let quartic = MinkowskiNorm::quartic_perturbed(2, 0.3).unwrap();
    let perturbed = FinslerMetric::series(SeriesMetric::new(euclid, quartic, 10).unwrap()).unwrap();
    let funk = FinslerMetric::funk_ball(2);
    let ratio = sweep(&pairs, |(x, y)| {
        let tail = perturbed.series_value(x, y).unwrap()?.tail;
        Ok(check_inverse_pde(&funk, &perturbed, x, y)? / tail)
    });
    let tail = within("quartic psi, M=10: inverse-problem residual / tail", ratio, 10.0);
    all(vec![closed_form, tail])
}

fn criterion_7() -> Outcome {
    let ball = ConvexDomain::unit_ball(2);
    let mut sprays: Vec<(String, Spray)> = domains()
        .into_iter()
        .map(|(name, d)| (format!("funk-spray on {name}"), funk_spray(&FinslerMetric::funk(&d)).unwrap()))
        .collect();
    let metrics = [
        ("funk", FinslerMetric::funk_ball(2)),
        ("hilbert", FinslerMetric::hilbert(&ball)),
        ("shen-k0", FinslerMetric::shen_k0(&ball, vec![0.2, 0.0]).unwrap()),
        ("randers-funk-type", FinslerMetric::randers_funk_type(vec![0.3, 0.1]).unwrap()),
    ];
    for (name, m) in &metrics {
        sprays.push((format!("{name} metric spray"), Spray::induced(m)));
    }
    all(sprays
        .into_iter()
        .map(|(name, spray)| {
            let starts = geodesic_starts(spray.domain(), 20, 0.5, SEED).unwrap();
            let r = sweep(&starts, |(x0, y0)| Ok(straightness_residual(&trace(&spray, x0, y0, 2.0, 1e-10)?)));
            within(&format!("{name} straightness"), r, 1e-7)
        })
        .collect())
}

fn criterion_8() -> Outcome {
    let ball = ConvexDomain::unit_ball(2);
    let implicit = FinslerMetric::funk_implicit(&ball);
    let field = JointField(&implicit);
    let samples = random_pairs(&ball, 50, 0.7, SEED ^ 8).unwrap();
    let mut parts = Vec::new();
    for order in 1..=3 {
        let indices = MultiIndex::all_of_order(4, order);
        let h = default_fd_step(order);
        let r = sweep(&samples, |(x, y)| {
            let p: Vec<f64> = x.iter().chain(y).copied().collect();
            let mut worst: f64 = 0.0;
            for alpha in &indices {
                let ad = mixed_partial(&field, &p, alpha)?;
                let num = fd_partial(&field, &p, alpha, h)?;
                worst = worst.max((ad - num).abs() / ad.abs().max(1.0));
            }
            Ok(worst)
        });
        parts.push(within(&format!("AD vs FD order {order} (h = {h:e}, {} partials)", indices.len()), r, 1e-5));
    }
    let closed = FinslerMetric::funk_ball(2);
    let pairs = random_pairs(&ball, 200, 0.9, SEED ^ 88).unwrap();
    let agree = sweep(&pairs, |(x, y)| {
        let c = closed.value(x, y)?;
        Ok((implicit.value(x, y)? - c).abs() / c)
    });
    parts.push(within("closed form vs implicit Funk (relative)", agree, 1e-10));
    all(parts)
}

fn criterion_9() -> Outcome {
    let ball = ConvexDomain::unit_ball(2);
    let pairs = random_pairs(&ball, 100, 0.7, SEED ^ 9).unwrap();
    let control = FinslerMetric::negative_control(2);
    let (rapcsak, errors) = sweep(&pairs, |(x, y)| Ok(check_rapcsak(&control, x, y)?.residual));
    let worst = rapcsak.iter().cloned().fold(0.0, f64::max);
    let detected = Outcome {
        pass: errors.is_empty() && worst > 1e-9,
        detail: format!("negative-control Rapcsak residual max {worst:.3e} exceeds tol 1e-9"),
    };

    let points = grid(&ball);
    let data = curvature_data(&FinslerMetric::funk_ball(2), &points);
    let (wrong, errors) = per_point(&data, |d| d.const_curvature_residual(0.0));
    let least = wrong.iter().cloned().fold(f64::INFINITY, f64::min);
    let wrong_lambda = Outcome {
        pass: errors.is_empty() && least >= 1e-2,
        detail: format!("Funk with lambda = 0: min residual {least:.3e} over the grid (must be O(1))"),
    };

    let funk = FinslerMetric::funk_ball(2);
    let (own, errors) = sweep(&pairs, |(x, y)| check_inverse_pde(&funk, &funk, x, y));
    let least = own.iter().cloned().fold(f64::INFINITY, f64::min);
    let not_inverse = Outcome {
        pass: errors.is_empty() && least >= 1e-2,
        detail: format!("Funk itself in the inverse problem: min residual {least:.3e} (must be O(1))"),
    };
    all(vec![detected, wrong_lambda, not_inverse])
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("Funk metric has K = -1/4", criterion_1),
        ("Hilbert metric has K = -1", criterion_2),
        ("spray 2Fy is R-flat on three domains", criterion_3),
        ("Shen metric: K = 0, inverse problem, positive g", criterion_4),
        ("implicit Funk satisfies F_x = F F_y", criterion_5),
        ("series metric consistency", criterion_6),
        ("geodesics are straight lines", criterion_7),
        ("AD agrees with finite differences and closed form", criterion_8),
        ("negative controls are detected", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "criterion {} {}: {} ({:.1} s) {}",
            i + 1,
            if outcome.pass { "PASS" } else { "FAIL" },
            name,
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
