use std::path::PathBuf;

use thiserror::Error;

use crate::network::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter {name}: {reason} (got {value})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// A switch queue whose offered load is at or above capacity. `index` is
    /// set when the queue belongs to a scenario.
    #[error("{} is unstable: utilization {utilization} >= 1", switch_label(*.index))]
    UnstableSwitch {
        index: Option<usize>,
        utilization: f64,
    },

    #[error("controller is unstable: packet-in rate {lambda_c} >= service rate {mu_c}")]
    UnstableController { lambda_c: f64, mu_c: f64 },

    #[error("rate matrix iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("singular matrix (determinant {determinant:e})")]
    Singular { determinant: f64 },

    #[error("switch index {index} out of range for a scenario with {len} switches")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("uniform variate {0} outside the open interval (0, 1)")]
    UniformDomain(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{}", format_violations(.0))]
    Validation(Vec<Violation>),

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("empty sweep")]
    EmptySweep,
}

impl Error {
    pub fn is_instability(&self) -> bool {
        matches!(
            self,
            Error::UnstableSwitch { .. } | Error::UnstableController { .. }
        )
    }
}

fn switch_label(index: Option<usize>) -> String {
    match index {
        Some(i) => format!("switch {i}"),
        None => "switch queue".to_string(),
    }
}

fn format_violations(violations: &[Violation]) -> String {
    let mut out = format!("{} validation violation(s)", violations.len());
    for v in violations {
        out.push_str("\n  ");
        out.push_str(&v.to_string());
    }
    out
}
