//! JSON report envelope and the mapping from library errors to exit codes.

use std::time::Duration;

use bsf_core::Error;
use serde_json::{json, Value};

/// Bumped whenever a field is renamed, removed or changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_INCOMPLETE: u8 = 2;
pub const EXIT_HYPOTHESIS: u8 = 3;

pub struct Success {
    pub result: Value,
    pub stabilization: Option<Value>,
    /// `EXIT_INCOMPLETE` when the payload is partial (open intervals, a
    /// theorem check that did not settle).
    pub code: u8,
}

impl Success {
    pub fn ok(result: Value) -> Self {
        Success {
            result,
            stabilization: None,
            code: EXIT_OK,
        }
    }
}

pub struct Failure {
    pub kind: &'static str,
    pub message: String,
    pub code: u8,
    pub partial: Option<Value>,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure {
            kind: "invalid_input",
            message: message.into(),
            code: EXIT_INPUT,
            partial: None,
        }
    }
}

pub type Outcome = Result<Success, Failure>;

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let message = err.to_string();
        let (kind, code, partial) = match &err {
            Error::NotPrime(_) => ("not_prime", EXIT_INPUT, None),
            Error::Range { .. } => ("out_of_range", EXIT_INPUT, None),
            Error::Domain(_) => ("domain", EXIT_INPUT, None),
            Error::InconsistentPeriod { .. } => ("inconsistent_period", EXIT_INPUT, None),
            Error::TerminatingExpansion => ("terminating_expansion", EXIT_INPUT, None),
            Error::Syntax { .. } => ("syntax", EXIT_INPUT, None),
            Error::UnknownVariable { .. } => ("unknown_variable", EXIT_INPUT, None),
            Error::InvalidRing(_) => ("invalid_ring", EXIT_INPUT, None),
            Error::RingMismatch => ("ring_mismatch", EXIT_INPUT, None),
            Error::NotPAdic(_) => ("not_p_adic", EXIT_INPUT, None),
            Error::Invalid(_) => ("invalid_input", EXIT_INPUT, None),
            Error::DegreeOverflow { .. } => ("degree_overflow", EXIT_INCOMPLETE, None),
            Error::ResourceLimit { .. } => ("resource_limit", EXIT_INCOMPLETE, None),
            Error::Budget(_) => ("budget", EXIT_INCOMPLETE, None),
            Error::TruncationOverflow { .. } => ("truncation_overflow", EXIT_INCOMPLETE, None),
            Error::NormalizationBudget(_) => ("normalization_budget", EXIT_INCOMPLETE, None),
            Error::NonStabilized { last, previous, .. } => (
                "non_stabilized",
                EXIT_INCOMPLETE,
                Some(json!({
                    "last": crate::commands::ideal_json(last),
                    "previous": previous.as_deref().map(crate::commands::ideal_json),
                })),
            ),
            Error::Unresolved(report) => (
                "unresolved",
                EXIT_INCOMPLETE,
                Some(crate::commands::jumps_json(report)),
            ),
            Error::ZeroHypersurface => ("zero_hypersurface", EXIT_HYPOTHESIS, None),
            Error::ZeroTwist => ("zero_twist", EXIT_HYPOTHESIS, None),
            Error::NotFPure => ("not_f_pure", EXIT_HYPOTHESIS, None),
            Error::FRegularityUnchecked => ("f_regularity_unchecked", EXIT_HYPOTHESIS, None),
        };
        Failure {
            kind,
            message,
            code,
            partial,
        }
    }
}

pub struct Report {
    command: &'static str,
    config: Value,
    outcome: Outcome,
    elapsed: Option<Duration>,
}

impl Report {
    pub fn new(command: &'static str, config: Value, outcome: Outcome) -> Self {
        Report {
            command,
            config,
            outcome,
            elapsed: None,
        }
    }

    pub fn set_elapsed(&mut self, elapsed: Duration) {
        self.elapsed = Some(elapsed);
    }

    pub fn exit_code(&self) -> u8 {
        match &self.outcome {
            Ok(s) => s.code,
            Err(f) => f.code,
        }
    }

    pub fn to_value(&self) -> Value {
        let mut out = json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "config": self.config,
            "exit_code": self.exit_code(),
        });
        let map = out.as_object_mut().expect("object literal");
        match &self.outcome {
            Ok(s) => {
                map.insert("status".into(), "ok".into());
                map.insert("result".into(), s.result.clone());
                if let Some(stab) = &s.stabilization {
                    map.insert("stabilization".into(), stab.clone());
                }
            }
            Err(f) => {
                map.insert("status".into(), "error".into());
                map.insert(
                    "error".into(),
                    json!({ "kind": f.kind, "message": f.message, "partial": f.partial }),
                );
            }
        }
        if let Some(d) = self.elapsed {
            map.insert("timing".into(), json!({ "elapsed_ms": d.as_secs_f64() * 1e3 }));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("values serialize")
    }
}
