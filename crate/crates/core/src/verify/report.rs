use serde::{Deserialize, Serialize};

use super::SuiteConfig;
use crate::fmt::Sig17;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// One named property evaluated over all trials of a suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// The mathematical statement the check exercises.
    pub anchor: String,
    pub status: Status,
    /// Worst value over the trials (ratio, relative error or violation).
    pub measured: Sig17,
    pub tolerance: Sig17,
    /// Trial indices that failed; replay with the report seed.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failing_trials: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub config: SuiteConfig,
    pub seed: u64,
    pub trials: usize,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        crate::fmt::to_json(self).expect("report serializes")
    }
}

/// How per-trial values are judged.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Bound {
    /// Pass when every value is `<= tol`; measured is the maximum.
    AtMost(f64),
}

/// Builds a check from per-trial values (`None` marks a trial the check did not
/// apply to).
pub(crate) fn judge(name: &str, anchor: &str, values: &[Option<f64>], bound: Bound) -> Check {
    let mut failing = Vec::new();
    let mut worst: Option<f64> = None;
    for (i, v) in values.iter().enumerate() {
        let Some(v) = *v else { continue };
        let Bound::AtMost(tol) = bound;
        let (ok, better) = (v <= tol, worst.is_none_or(|w| v > w));
        if !ok || v.is_nan() {
            failing.push(i);
        }
        if better || v.is_nan() {
            worst = Some(v);
        }
    }
    let Bound::AtMost(tol) = bound;
    let status = if worst.is_none() {
        Status::Skipped
    } else if failing.is_empty() {
        Status::Pass
    } else {
        Status::Fail
    };
    Check {
        name: name.into(),
        anchor: anchor.into(),
        status,
        measured: Sig17(worst.unwrap_or(f64::NAN)),
        tolerance: Sig17(tol),
        failing_trials: failing,
        note: None,
    }
}

pub(crate) fn skipped(name: &str, anchor: &str, note: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        anchor: anchor.into(),
        status: Status::Skipped,
        measured: Sig17(f64::NAN),
        tolerance: Sig17(f64::NAN),
        failing_trials: vec![],
        note: Some(note.into()),
    }
}

impl Check {
    pub(crate) fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn measured(&self) -> f64 {
        self.measured.0
    }
}
