//! Session-level protection metrics: exact ratios of session counts.

use super::{HarnessError, SessionReport};

fn ratio(
    reports: &[SessionReport],
    predicate: impl Fn(&SessionReport) -> bool,
) -> Result<f64, HarnessError> {
    if reports.is_empty() {
        return Err(HarnessError::EmptyReports);
    }
    let hits = reports.iter().filter(|r| predicate(r)).count();
    Ok(hits as f64 / reports.len() as f64)
}

/// Fraction of sessions in which every requesting in-photo stranger's face
/// was blurred.
pub fn true_protection_rate(reports: &[SessionReport]) -> Result<f64, HarnessError> {
    ratio(reports, |r| r.outcome.all_requesting_strangers_blurred)
}

/// Fraction of sessions in which at least one non-requesting in-photo face
/// was blurred.
pub fn false_protection_rate(reports: &[SessionReport]) -> Result<f64, HarnessError> {
    ratio(reports, |r| r.outcome.false_blur)
}

/// Fraction of sessions in which the target verdicts disagree with ground
/// truth: a missed target or a stranger taken for one.
pub fn false_filtering_rate(reports: &[SessionReport]) -> Result<f64, HarnessError> {
    ratio(reports, |r| !r.outcome.filtering_correct)
}
