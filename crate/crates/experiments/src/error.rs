use hqnc_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("missing data: {0}")]
    MissingData(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl ExperimentError {
    /// Process exit code: 2 bad arguments, 3 missing data, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::InvalidArgument(_) => 2,
            ExperimentError::MissingData(_) => 3,
            ExperimentError::Core(e) => match e {
                CoreError::Numerical(_) | CoreError::EigenConvergence | CoreError::NotNormalized(_) => 4,
                CoreError::Io(err) if err.kind() == std::io::ErrorKind::NotFound => 3,
                CoreError::InvalidArgument(_)
                | CoreError::OutOfRange { .. }
                | CoreError::TooManyQubits { .. }
                | CoreError::InsufficientClass { .. } => 2,
                _ => 1,
            },
            ExperimentError::Io(err) if err.kind() == std::io::ErrorKind::NotFound => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, ExperimentError>;
