//! Verification records and their aggregate verdict.

use serde::Serialize;

/// Outcome of one check over a batch of samples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub metric: String,
    /// The mathematical statement being tested.
    pub anchor: String,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Evaluation failures hit while sampling; any failure fails the check.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

impl CheckRecord {
    /// Passes when every residual is finite and at most `tolerance`.
    pub fn bounded(
        check: &str,
        metric: &str,
        anchor: &str,
        residuals: &[f64],
        tolerance: f64,
        errors: Vec<String>,
    ) -> Self {
        let max_residual = if residuals.is_empty() {
            0.0
        } else {
            residuals
                .iter()
                .fold(f64::NEG_INFINITY, |m, &r| if r.is_nan() || m.is_nan() { f64::NAN } else { m.max(r) })
        };
        let pass = errors.is_empty() && max_residual.is_finite() && max_residual <= tolerance;
        CheckRecord {
            check: check.into(),
            metric: metric.into(),
            anchor: anchor.into(),
            samples: residuals.len() + errors.len(),
            max_residual,
            tolerance,
            pass,
            errors,
        }
    }

    /// Passes when every residual is finite and at least `threshold`.
    /// Used by negative controls, which must be detected.
    pub fn detected(
        check: &str,
        metric: &str,
        anchor: &str,
        residuals: &[f64],
        threshold: f64,
        errors: Vec<String>,
    ) -> Self {
        let min = residuals.iter().fold(f64::INFINITY, |m, &r| m.min(r));
        let pass = errors.is_empty() && !residuals.is_empty() && min.is_finite() && min >= threshold;
        CheckRecord {
            check: check.into(),
            metric: metric.into(),
            anchor: anchor.into(),
            samples: residuals.len() + errors.len(),
            max_residual: min,
            tolerance: threshold,
            pass,
            errors,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub dim: usize,
    pub pass: bool,
    pub failed: usize,
    pub records: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn new(seed: u64, dim: usize, records: Vec<CheckRecord>) -> Self {
        let failed = records.iter().filter(|r| !r.pass).count();
        VerificationReport {
            seed,
            dim,
            pass: failed == 0,
            failed,
            records,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.pass)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_requires_every_record() {
        let ok = CheckRecord::bounded("a", "m", "", &[1e-12], 1e-9, vec![]);
        let bad = CheckRecord::bounded("b", "m", "", &[1e-3, f64::NAN], 1e-9, vec![]);
        assert!(ok.pass && !bad.pass);
        assert!(VerificationReport::new(1, 2, vec![ok.clone()]).pass);
        let r = VerificationReport::new(1, 2, vec![ok, bad]);
        assert!(!r.pass);
        assert_eq!(r.failed, 1);
    }

    #[test]
    fn errors_fail_a_check() {
        let r = CheckRecord::bounded("a", "m", "", &[0.0], 1.0, vec!["boom".into()]);
        assert!(!r.pass);
        assert_eq!(r.samples, 2);
    }
}
