use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

use matfactor::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Failure,
}

impl From<bool> for Outcome {
    fn from(ok: bool) -> Self {
        if ok {
            Outcome::Success
        } else {
            Outcome::Failure
        }
    }
}

/// Everything one invocation produced. Without `timing_ms` the report is a
/// pure function of the command line and the input bytes.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub inputs_digest: String,
    pub seed: u64,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub artifacts: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u128>,
}

#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub kind: &'static str,
    pub message: String,
}

impl RunReport {
    pub fn new(
        command: Vec<String>,
        inputs_digest: String,
        seed: u64,
        result: Result<(Outcome, Value), Error>,
        elapsed: Option<Duration>,
    ) -> Self {
        let (outcome, artifacts, error) = match result {
            Ok((outcome, artifacts)) => (outcome, Some(artifacts), None),
            Err(e) => (
                Outcome::Failure,
                None,
                Some(ErrorReport {
                    kind: kind_of(&e),
                    message: e.to_string(),
                }),
            ),
        };
        RunReport {
            command,
            inputs_digest,
            seed,
            outcome,
            artifacts,
            error,
            timing_ms: elapsed.map(|d| d.as_millis()),
        }
    }

    /// 0 success, 1 verification failure, 2 input error, 3 budget exhausted.
    pub fn exit_code(&self) -> u8 {
        match (&self.outcome, &self.error) {
            (Outcome::Success, _) => 0,
            (Outcome::Failure, None) => 1,
            (Outcome::Failure, Some(e)) => match e.kind {
                "budget_exhausted" => 3,
                "internal_contradiction" => 1,
                _ => 2,
            },
        }
    }
}

fn kind_of(e: &Error) -> &'static str {
    match e {
        Error::BudgetExhausted(_) => "budget_exhausted",
        Error::InternalContradiction(_) => "internal_contradiction",
        Error::Parse(_) => "parse",
        Error::PreconditionViolated(_) => "precondition",
        Error::DimensionMismatch(_) => "dimension_mismatch",
        Error::FieldMismatch(..) => "field_mismatch",
        Error::SpanDeficient => "span_deficient",
        Error::TooLarge { .. } => "too_large",
        _ => "input",
    }
}
