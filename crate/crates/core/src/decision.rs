// SPDX-License-Identifier: MIT OR Apache-2.0

//! Test outcomes with per-scale diagnostics.

use serde::{Deserialize, Serialize};

/// Shape of the scale set a test scanned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    /// The dyadic grid anchored at both ends of the sample.
    Single,
    /// Local windows `(l, t)`.
    Multi,
    /// The dyadic grid trimmed away from the boundary.
    Restricted,
}

/// One statistic and the threshold it was compared against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleDiagnostic {
    pub t: usize,
    /// Window centre for local tests.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
    /// Sparsity level of the branch, when the branch depends on one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    pub branch: String,
    pub stat: f64,
    pub threshold: f64,
    /// Number of coordinates passing the selection step.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selected_count: Option<usize>,
    pub fired: bool,
}

impl ScaleDiagnostic {
    pub fn new(t: usize, branch: impl Into<String>, stat: f64, threshold: f64) -> Self {
        Self {
            t,
            ell: None,
            s: None,
            branch: branch.into(),
            stat,
            threshold,
            selected_count: None,
            fired: stat > threshold,
        }
    }

    pub fn with_selected(mut self, count: usize) -> Self {
        self.selected_count = Some(count);
        self
    }

    pub fn with_ell(mut self, ell: usize) -> Self {
        self.ell = Some(ell);
        self
    }

    pub fn with_s(mut self, s: usize) -> Self {
        self.s = Some(s);
        self
    }

    /// `stat / threshold`, the quantity compared against 1.
    pub fn ratio(&self) -> f64 {
        self.stat / self.threshold
    }
}

/// Reject/accept flag plus everything needed to audit it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub test: String,
    pub reject: bool,
    pub grid_kind: GridKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<String>,
    /// Value of the dispatch predicate for tests that choose between procedures.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dispatch_predicate: Option<f64>,
    /// Robust estimator actually used, for tests built on one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimator: Option<String>,
    pub entries: Vec<ScaleDiagnostic>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Decision {
    /// Assembles a decision that rejects iff any entry fired.
    pub fn from_entries(test: impl Into<String>, grid_kind: GridKind, entries: Vec<ScaleDiagnostic>) -> Self {
        let reject = entries.iter().any(|e| e.fired);
        Self {
            test: test.into(),
            reject,
            grid_kind,
            branch: None,
            dispatch_predicate: None,
            estimator: None,
            entries,
            warnings: Vec::new(),
        }
    }

    /// Entries that fired.
    pub fn firing(&self) -> impl Iterator<Item = &ScaleDiagnostic> {
        self.entries.iter().filter(|e| e.fired)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("decision serializes")
    }
}
