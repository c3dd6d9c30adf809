use std::fmt;
use std::path::Path;

use super::BenchRecord;
use crate::error::{Error, Result};

/// Outcome of checking one threshold-sampled record against its gap bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundCheck {
    pub row: usize,
    pub dataset: String,
    pub method: String,
    pub s: usize,
    pub epsilon: f64,
    pub gap: f64,
    pub bound_thm3: f64,
    pub initial_gap: f64,
    pub bound_thm2: f64,
    /// `g_sampled - g_full - d log(1 + delta)`; must not exceed `1e-8`.
    pub excess: f64,
}

impl BoundCheck {
    pub fn final_ok(&self) -> bool {
        self.gap < self.bound_thm3
    }

    pub fn initial_ok(&self) -> bool {
        self.initial_gap < self.bound_thm2
    }

    pub fn excess_ok(&self) -> bool {
        self.excess <= 1e-8
    }

    pub fn passed(&self) -> bool {
        self.final_ok() && self.initial_ok() && self.excess_ok()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundsReport {
    pub checks: Vec<BoundCheck>,
    /// Records that were not checked (randomized methods or failed cells).
    pub skipped: usize,
}

impl BoundsReport {
    pub fn violations(&self) -> impl Iterator<Item = &BoundCheck> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn passed(&self) -> bool {
        self.violations().next().is_none()
    }
}

impl fmt::Display for BoundsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "row\tmethod\ts\tepsilon\tgap\tbound_thm3\tinit_gap\tbound_thm2\tstatus")?;
        for c in &self.checks {
            writeln!(
                f,
                "{}\t{}\t{}\t{:.4}\t{:.6e}\t{:.6}\t{:.6}\t{:.6}\t{}",
                c.row,
                c.method,
                c.s,
                c.epsilon,
                c.gap,
                c.bound_thm3,
                c.initial_gap,
                c.bound_thm2,
                if c.passed() { "pass" } else { "FAIL" }
            )?;
        }
        let bad = self.violations().count();
        write!(
            f,
            "checked={} violations={} skipped={}",
            self.checks.len(),
            bad,
            self.skipped
        )
    }
}

/// Checks every threshold-sampled record: `gap < bound_thm3`,
/// `g_full - g_init < bound_thm2`, and that the sampled optimum does not beat
/// the full one by more than the certificate slack.
pub fn check_bounds(records: &[BenchRecord]) -> BoundsReport {
    let mut report = BoundsReport::default();
    for (row, r) in records.iter().enumerate() {
        let threshold_method = r.method == "det" || r.method == "det-approx";
        if !threshold_method || !r.error.is_empty() || !r.epsilon.is_finite() {
            report.skipped += 1;
            continue;
        }
        report.checks.push(BoundCheck {
            row: row + 1,
            dataset: r.dataset.clone(),
            method: r.method.clone(),
            s: r.s,
            epsilon: r.epsilon,
            gap: r.gap,
            bound_thm3: r.bound_thm3,
            initial_gap: r.g_full - r.g_init,
            bound_thm2: r.bound_thm2,
            excess: r.g_sampled - r.g_full - r.d as f64 * r.delta.ln_1p(),
        });
    }
    report
}

/// [`check_bounds`], failing with `BoundViolation` if any record breaks a
/// bound.
pub fn verify_bounds(records: &[BenchRecord]) -> Result<BoundsReport> {
    let report = check_bounds(records);
    if report.passed() {
        return Ok(report);
    }
    let offending: Vec<String> = report
        .violations()
        .map(|c| {
            format!(
                "row {} ({} {} s={} eps={}): gap {} vs {}, initial gap {} vs {}",
                c.row, c.dataset, c.method, c.s, c.epsilon, c.gap, c.bound_thm3, c.initial_gap, c.bound_thm2
            )
        })
        .collect();
    Err(Error::BoundViolation(offending.join("; ")))
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<BenchRecord>> {
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    reader
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}
