//! CLI error type with a stable exit-code contract.

use causal_core::CausalError;
use graph_policy::PolicyError;
use intervention::InterventionError;
use thiserror::Error;
use transfer_env::EnvError;

/// Exit code for success.
pub const EXIT_OK: i32 = 0;
/// Exit code for usage errors: bad flags, malformed or out-of-range settings.
pub const EXIT_USAGE: i32 = 1;
/// Exit code for data errors: unreadable files, format mismatches, wrong
/// dimensions, checkpoints unfit for the requested operation.
pub const EXIT_DATA: i32 = 2;
/// Exit code for numeric failures: non-finite losses, singular systems,
/// failed statistical checks.
pub const EXIT_NUMERIC: i32 = 3;

/// Every failure the CLI can report, bucketed by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// The invocation itself is wrong: unknown flags, invalid settings.
    #[error("{0}")]
    Usage(String),

    /// Input files are missing, malformed, or inconsistent with each other.
    #[error("{0}")]
    Data(String),

    /// A computation failed numerically or a verification suite did not pass.
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    /// The process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl From<EnvError> for CliError {
    fn from(e: EnvError) -> Self {
        match e {
            EnvError::InvalidConfig(_) | EnvError::InvalidRequest(_) => {
                CliError::Usage(e.to_string())
            }
            EnvError::Io(_) | EnvError::Parse(_) => CliError::Data(e.to_string()),
            // Stepping errors surfacing through the CLI mean an episode went
            // numerically wrong, not that the user mistyped something.
            EnvError::EpisodeFinished { .. }
            | EnvError::NonFiniteAction
            | EnvError::InvalidFlags(_)
            | EnvError::ExpertFailed { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<PolicyError> for CliError {
    fn from(e: PolicyError) -> Self {
        match e {
            PolicyError::Config(_) => CliError::Usage(e.to_string()),
            PolicyError::Dim(_) | PolicyError::Data(_) | PolicyError::Io(_)
            | PolicyError::Parse(_) => CliError::Data(e.to_string()),
            PolicyError::Numeric(_) => CliError::Numeric(e.to_string()),
            PolicyError::Tensor(ref inner) => match inner {
                tensor_net::TensorError::NonFinite(_) => CliError::Numeric(e.to_string()),
                tensor_net::TensorError::InvalidSpec(_) => CliError::Usage(e.to_string()),
                _ => CliError::Data(e.to_string()),
            },
            PolicyError::Env(inner) => CliError::from(inner),
        }
    }
}

impl From<InterventionError> for CliError {
    fn from(e: InterventionError) -> Self {
        match e {
            InterventionError::Config(_) => CliError::Usage(e.to_string()),
            InterventionError::Dim(_) | InterventionError::Io(_) | InterventionError::Parse(_) => {
                CliError::Data(e.to_string())
            }
            InterventionError::Singular(_) => CliError::Numeric(e.to_string()),
            InterventionError::Policy(inner) => CliError::from(inner),
        }
    }
}

impl From<CausalError> for CliError {
    fn from(e: CausalError) -> Self {
        match e {
            CausalError::InvalidAlpha(_) | CausalError::InvalidSampleRequest(_) => {
                CliError::Usage(e.to_string())
            }
            CausalError::NonFinite(_) | CausalError::CyclicGraph => {
                CliError::Numeric(e.to_string())
            }
            other => CliError::Data(other.to_string()),
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_documented_contract() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
        assert_eq!(CliError::Data("x".into()).exit_code(), 2);
        assert_eq!(CliError::Numeric("x".into()).exit_code(), 3);
    }

    #[test]
    fn policy_errors_map_to_their_buckets() {
        assert_eq!(CliError::from(PolicyError::Config("bad".into())).exit_code(), EXIT_USAGE);
        assert_eq!(CliError::from(PolicyError::Io("gone".into())).exit_code(), EXIT_DATA);
        assert_eq!(CliError::from(PolicyError::Numeric("nan".into())).exit_code(), EXIT_NUMERIC);
    }

    #[test]
    fn intervention_singular_is_a_numeric_failure() {
        let e = InterventionError::Singular("pivot".into());
        assert_eq!(CliError::from(e).exit_code(), EXIT_NUMERIC);
    }
}
