use scars_core::classical::ClassicalError;
use scars_core::grid::GridError;
use scars_core::model::ModelError;
use scars_core::quantum::QuantumError;
use scars_core::scar::ScarError;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Classical(#[from] ClassicalError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Scar(#[from] ScarError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Line written to standard error on failure.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub kind: &'static str,
    pub message: String,
    pub exit_code: i32,
}

fn quantum_kind(e: &QuantumError) -> &'static str {
    match e {
        QuantumError::TooManySites { .. } | QuantumError::DenseBudget { .. } => "resource_limit",
        QuantumError::Model(_)
        | QuantumError::SectorSize(_)
        | QuantumError::UnsupportedSpin(_)
        | QuantumError::AsymmetricCoupling => {
            "invalid_config"
        }
        _ => "runtime",
    }
}

impl CliError {
    pub fn io(path: impl std::fmt::Display, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_string(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) | CliError::Model(_) | CliError::Grid(_) => "invalid_config",
            CliError::Classical(ClassicalError::Model(_) | ClassicalError::Invalid(_)) => "invalid_config",
            CliError::Classical(_) => "runtime",
            CliError::Quantum(q) => quantum_kind(q),
            CliError::Scar(ScarError::Quantum(q)) => quantum_kind(q),
            CliError::Scar(ScarError::Model(_) | ScarError::Invalid(_) | ScarError::EmptyFamily | ScarError::Grid(_)) => {
                "invalid_config"
            }
            CliError::Scar(_) => "runtime",
            CliError::Io { .. } => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "invalid_config" => 2,
            "resource_limit" => 3,
            _ => 1,
        }
    }

    pub fn report(&self) -> ErrorReport {
        ErrorReport {
            kind: self.kind(),
            message: self.to_string(),
            exit_code: self.exit_code(),
        }
    }
}
