use thiserror::Error;

/// A single violated density-matrix invariant together with its measured residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Violation {
    NonHermitian(f64),
    TraceNotOne(f64),
    NotPsd(f64),
    DimMismatch { expected: usize, found: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NonHermitian(r) => {
                write!(f, "non-Hermitian (max |a_ij - conj(a_ji)| = {r:.3e})")
            }
            Violation::TraceNotOne(r) => write!(f, "trace not one (|Tr - 1| = {r:.3e})"),
            Violation::NotPsd(r) => {
                write!(f, "not positive semidefinite (min eigenvalue = {r:.3e})")
            }
            Violation::DimMismatch { expected, found } => {
                write!(f, "dimension mismatch (expected {expected}, found {found})")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum QccError {
    #[error("invalid density matrix: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidState(Vec<Violation>),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("bad subsystem index {index} (state has {count} subsystems)")]
    BadSubsystemIndex { index: usize, count: usize },
    #[error("state has no A|B bipartition marker")]
    NotBipartite,
    #[error("matrix is not unitary (residual {0:.3e})")]
    NotUnitary(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("optimizer did not converge; best value found {best:.6e}")]
    OptimizerDidNotConverge { best: f64 },
    #[error("no restart produced a unitarily symmetric candidate (best symmetry residual {best_residual:.3e})")]
    NoSymmetricCandidateFound { best_residual: f64 },
    #[error("registry subsystem is not classical: off-block mass {0:.3e}")]
    NotClassicalOnRegistry(f64),
}

impl QccError {
    /// The violations carried by an `InvalidState` error, empty otherwise.
    pub fn violations(&self) -> &[Violation] {
        match self {
            QccError::InvalidState(v) => v,
            _ => &[],
        }
    }
}

pub type Result<T> = std::result::Result<T, QccError>;
