use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::barycentre::SolverReport;

/// Round to 12 significant digits.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// One row of a verification table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRow {
    pub suite: String,
    pub check: String,
    pub passed: bool,
    /// Observed quantity the check is decided on.
    pub value: f64,
    /// Human-readable pass condition.
    pub criterion: String,
}

impl CheckRow {
    pub fn new(suite: &str, check: impl Into<String>, value: f64, passed: bool, criterion: impl Into<String>) -> Self {
        Self {
            suite: suite.to_string(),
            check: check.into(),
            passed,
            value: sig12(value),
            criterion: criterion.into(),
        }
    }

    /// `value ≤ bound`.
    pub fn at_most(suite: &str, check: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::new(suite, check, value, value <= bound, format!("<= {bound:e}"))
    }

    /// `value > bound`.
    pub fn above(suite: &str, check: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::new(suite, check, value, value > bound, format!("> {bound:e}"))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    /// SHA-256 over the input files' bytes, in argument order.
    pub inputs_digest: String,
    pub outputs: Map<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckRow>,
}

impl RunReport {
    pub fn new(command: Vec<String>, inputs: &[&[u8]]) -> Self {
        let mut hasher = Sha256::new();
        for bytes in inputs {
            hasher.update((bytes.len() as u64).to_le_bytes());
            hasher.update(bytes);
        }
        Self {
            command,
            inputs_digest: hex::encode(hasher.finalize()),
            ..Self::default()
        }
    }

    pub fn scalar(&mut self, key: &str, value: f64) {
        self.outputs.insert(key.into(), Value::from(sig12(value)));
    }

    pub fn value<T: Serialize>(&mut self, key: &str, value: &T) {
        self.outputs
            .insert(key.into(), serde_json::to_value(value).expect("report values serialize"));
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Summary for standard error.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.outputs {
            if v.is_number() || v.is_boolean() || v.is_string() {
                out.push_str(&format!("{k}: {v}\n"));
            }
        }
        if let Some(s) = &self.solver {
            out.push_str(&format!(
                "solver: {} after {} iterations, residual {:.3e}, damping {}\n",
                if s.converged { "converged" } else { "NOT converged" },
                s.iterations,
                s.final_residual,
                s.final_damping
            ));
        }
        for c in &self.checks {
            out.push_str(&format!(
                "[{}] {:<18} {:<52} {:>14} {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.suite,
                c.check,
                format!("{:.6e}", c.value),
                c.criterion
            ));
        }
        out
    }
}
