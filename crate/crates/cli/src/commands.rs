use std::fmt::Write as _;
use std::path::Path;

use finsler_core::config::{Experiment, MetricSpec, SprayChoice};
use finsler_core::curvature::{check_inverse_pde, funk_spray, Spray};
use finsler_core::geodesic::{integrate, speed_drift, straightness_residual, IntegrateOptions, IntegrationError};
use finsler_core::metric::{FinslerMetric, MetricKind};
use finsler_core::verify::{self, flag_curvature_table, geodesic_starts, series_probe};
use serde_json::{json, Value};

use crate::{Command, Unusable};

/// Runs `command`; `Ok(false)` means a tolerance was missed.
pub fn run(command: Command, mut exp: Experiment, out: &Path, tol: Option<f64>) -> Result<bool, Unusable> {
    match command {
        Command::Verify => {
            if let Some(t) = tol {
                let tols = &mut exp.config.tolerances;
                tols.flag_curvature = t;
                tols.flag_curvature_hilbert = t;
            }
            verify_cmd(&exp, out)
        }
        Command::Curvature => curvature_cmd(&exp, out, tol),
        Command::Geodesic => geodesic_cmd(&exp, out, tol),
        Command::Series => series_cmd(&exp, out, tol),
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn nums(v: &[f64]) -> String {
    v.iter().map(|c| num(*c)).collect::<Vec<_>>().join(",")
}

fn axis_header(prefix: &str, n: usize) -> String {
    (1..=n).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>().join(",")
}

fn write(out: &Path, name: &str, contents: &str) -> Result<(), Unusable> {
    let path = out.join(name);
    std::fs::write(&path, contents).map_err(|e| Unusable(format!("cannot write {}: {e}", path.display())))
}

/// Writes `summary` beside the CSV output and echoes it on stdout.
fn finish(out: &Path, name: &str, summary: &Value) -> Result<bool, Unusable> {
    let text = serde_json::to_string_pretty(summary)?;
    write(out, name, &format!("{text}\n"))?;
    println!("{text}");
    Ok(summary["pass"].as_bool().unwrap_or(false))
}

fn verify_cmd(exp: &Experiment, out: &Path) -> Result<bool, Unusable> {
    let report = verify::run(exp)?;
    for r in report.failures() {
        eprintln!(
            "FAIL {} / {}: max residual {:e} > {:e}",
            r.metric, r.check, r.max_residual, r.tolerance
        );
    }
    let text = report.to_json();
    write(out, "report.json", &format!("{text}\n"))?;
    println!("{text}");
    Ok(report.pass)
}

fn curvature_cmd(exp: &Experiment, out: &Path, tol: Option<f64>) -> Result<bool, Unusable> {
    let n = exp.config.dim;
    let mut csv = format!(
        "metric,{},{},{},K,target,deviation,within_tol\n",
        axis_header("x", n),
        axis_header("y", n),
        axis_header("u", n)
    );
    let mut metrics = Vec::new();
    let mut pass = true;
    for (spec, metric) in &exp.metrics {
        let target = spec.target_curvature();
        let tolerance = tol.unwrap_or(if matches!(spec, MetricSpec::Hilbert) {
            exp.config.tolerances.flag_curvature_hilbert
        } else {
            exp.config.tolerances.flag_curvature
        });
        let (table, error) = match flag_curvature_table(metric, &exp.config.grid, exp.config.seed) {
            Ok(t) => (t, None),
            Err(e) => (Vec::new(), Some(e.to_string())),
        };
        let mut worst: f64 = 0.0;
        let mut misses = 0usize;
        for s in &table {
            let _ = write!(csv, "{},{},{},{},{}", spec.label(), nums(&s.x), nums(&s.y), nums(&s.u), num(s.value));
            match target {
                Some(lambda) => {
                    let dev = (s.value - lambda).abs();
                    let ok = dev <= tolerance;
                    worst = if dev.is_nan() { f64::NAN } else { worst.max(dev) };
                    misses += usize::from(!ok);
                    let _ = writeln!(csv, ",{},{},{ok}", num(lambda), num(dev));
                }
                None => csv.push_str(",,,\n"),
            }
        }
        let metric_pass = error.is_none() && misses == 0;
        pass &= metric_pass;
        metrics.push(json!({
            "metric": spec.label(),
            "samples": table.len(),
            "target": target,
            "tolerance": target.map(|_| tolerance),
            "max_deviation": target.map(|_| worst),
            "misses": misses,
            "error": error,
            "pass": metric_pass,
        }));
    }
    write(out, "curvature.csv", &csv)?;
    finish(
        out,
        "curvature_summary.json",
        &json!({ "seed": exp.config.seed, "dim": n, "pass": pass, "metrics": metrics }),
    )
}

fn geodesic_cmd(exp: &Experiment, out: &Path, tol: Option<f64>) -> Result<bool, Unusable> {
    let g = &exp.config.geodesic;
    let (label, spray, metric): (String, Spray, Option<&FinslerMetric>) = match g.spray {
        SprayChoice::FunkSpray => ("funk-spray".into(), funk_spray(&FinslerMetric::funk(&exp.domain))?, None),
        SprayChoice::Induced => {
            let (spec, m) = &exp.metrics[g.metric_index];
            (spec.label().into(), Spray::induced(m), Some(m))
        }
    };
    let (x0, y0) = match (&g.x0, &g.y0) {
        (Some(x), Some(y)) => (x.clone(), y.clone()),
        (x, y) => {
            let (sx, sy) = geodesic_starts(spray.domain(), 1, g.start_level, exp.config.seed)?.remove(0);
            (x.clone().unwrap_or(sx), y.clone().unwrap_or(sy))
        }
    };
    let opts = IntegrateOptions::with_tol(tol.unwrap_or(g.tol));
    let (traj, error) = match integrate(&spray, &x0, &y0, g.t_end, opts) {
        Ok(t) => (Some(t), None),
        Err(IntegrationError::StepUnderflow { t, partial }) => {
            (Some(partial), Some(format!("step size underflow at t = {t}")))
        }
        Err(e) => (None, Some(e.to_string())),
    };
    let tols = &exp.config.tolerances;
    let mut summary = json!({
        "spray": label,
        "seed": exp.config.seed,
        "x0": x0,
        "y0": y0,
        "t_end": g.t_end,
        "tol": opts.tol,
        "error": error,
    });
    let mut pass = error.is_none();
    if let Some(traj) = &traj {
        write(out, "trajectory.csv", &traj.to_csv())?;
        let straight = straightness_residual(traj);
        pass &= straight <= tols.straightness;
        summary["termination"] = json!(traj.termination);
        summary["t_reached"] = json!(traj.end().t);
        summary["stats"] = json!(traj.stats);
        summary["straightness"] = json!({ "residual": straight, "tolerance": tols.straightness });
        if let Some(m) = metric {
            let drift = speed_drift(m, traj).map_err(|e| e.to_string());
            let ok = matches!(drift, Ok(d) if d <= tols.speed);
            pass &= ok;
            summary["speed_drift"] = match drift {
                Ok(d) => json!({ "residual": d, "tolerance": tols.speed }),
                Err(e) => json!({ "error": e }),
            };
        }
    }
    summary["pass"] = json!(pass);
    finish(out, "geodesic_summary.json", &summary)
}

fn series_cmd(exp: &Experiment, out: &Path, tol: Option<f64>) -> Result<bool, Unusable> {
    let Some((_, metric)) = exp.metrics.iter().find(|(s, _)| matches!(s, MetricSpec::Series { .. })) else {
        return Err(Unusable("the series command needs a [[metric]] of kind \"series\"".into()));
    };
    let MetricKind::Series { series } = metric.kind() else {
        unreachable!("series spec builds a series metric")
    };
    let domain = metric.domain();
    let funk = FinslerMetric::funk(domain);
    let (x, y) = series_probe(exp, domain)?;
    let closed = if series.phi().is_euclidean() && series.psi().is_euclidean() {
        Some(FinslerMetric::shen_k0_ball(vec![0.0; domain.dim()])?.value(&x, &y)?)
    } else {
        None
    };
    let tolerance = tol.unwrap_or(exp.config.tolerances.series_closed_form);
    let mut orders = exp.config.series.orders.clone();
    orders.sort_unstable();
    orders.dedup();
    let mut csv = String::from("order,sum,tail,inverse_residual,closed_form,abs_error\n");
    let mut rows = Vec::new();
    for &m in &orders {
        let truncated = FinslerMetric::series(series.with_order(m)?)?;
        let value = truncated.series_value(&x, &y).expect("series metric")?;
        let residual = check_inverse_pde(&funk, &truncated, &x, &y)?;
        let err = closed.map(|c| (value.sum - c).abs());
        let _ = writeln!(
            csv,
            "{m},{},{},{},{},{}",
            num(value.sum),
            num(value.tail),
            num(residual),
            closed.map(num).unwrap_or_default(),
            err.map(num).unwrap_or_default()
        );
        rows.push((m, value.sum, value.tail, residual, err));
    }
    write(out, "series.csv", &csv)?;
    let decreasing = rows.windows(2).all(|w| w[1].3 <= w[0].3);
    let last_error = rows.last().and_then(|r| r.4);
    let closed_ok = last_error.map_or(true, |e| e <= tolerance);
    let summary = json!({
        "seed": exp.config.seed,
        "x": x,
        "y": y,
        "orders": orders,
        "closed_form": closed,
        "highest_order_error": last_error,
        "tolerance": closed.map(|_| tolerance),
        "residual_decreasing": decreasing,
        "pass": decreasing && closed_ok,
    });
    finish(out, "series_summary.json", &summary)
}
