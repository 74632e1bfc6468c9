use thiserror::Error;

/// Errors raised by the simulator and its verification harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    /// A constitutive, thermal or memory admissibility condition failed.
    #[error("validation failed: {0}")]
    Validation(String),

    #[error("grid mismatch: expected {expected} points per axis, found {found}")]
    GridMismatch { expected: usize, found: usize },

    #[error("operator arity mismatch: {0}")]
    Arity(String),

    #[error("time step {dt} exceeds stability bound {bound}")]
    StepTooLarge { dt: f64, bound: f64 },

    #[error("krylov solver stalled after {iterations} iterations (relative residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("resolvent defect {defect:.3e} exceeds bound {bound:.3e}")]
    ResolventDefect { defect: f64, bound: f64 },

    #[error("solver failure at step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    /// An emitted energy ledger broke one of its record invariants.
    #[error("ledger invariant violated: {0}")]
    LedgerInvariant(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_)
            | Error::InvalidKernel(_)
            | Error::Parse { .. }
            | Error::InvalidInput(_)
            | Error::GridMismatch { .. }
            | Error::Arity(_)
            | Error::StepTooLarge { .. } => 2,
            Error::NoConvergence { .. }
            | Error::ResolventDefect { .. }
            | Error::LedgerInvariant(_)
            | Error::AtStep { .. } => 3,
            Error::Io(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_category() {
        assert_eq!(Error::Parse { line: 3, message: "x".into() }.exit_code(), 2);
        assert_eq!(Error::StepTooLarge { dt: 1.0, bound: 0.1 }.exit_code(), 2);
        assert_eq!(Error::NoConvergence { iterations: 9, residual: 1.0 }.exit_code(), 3);
        assert_eq!(Error::LedgerInvariant("energy increased".into()).exit_code(), 3);
        assert_eq!(Error::Io(std::io::Error::other("gone")).exit_code(), 4);
    }
}
