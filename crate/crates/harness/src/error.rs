use thiserror::Error;

/// Errors surfaced by the harness, each with a distinct process exit code.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] wbnf_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// 2 for configuration problems, 3 for capacity limits, 4 for
    /// unsatisfiable constraints, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use wbnf_core::Error as E;
        match self {
            Self::Config(_) => 2,
            Self::Core(E::InvalidParameter { .. } | E::EmptyGrid) => 2,
            Self::Core(E::CapacityExceeded { .. }) => 3,
            Self::Core(E::Unsatisfiable(_)) => 4,
            Self::Core(_) | Self::Io(_) => 1,
        }
    }
}
