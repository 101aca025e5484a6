use std::process::ExitCode;

use hadamard_core::catalog::CatalogError;
use hadamard_core::contour::QuadratureError;
use hadamard_core::ode::OdeError;
use hadamard_core::scope::ScopeError;
use hadamard_core::volterra::VolterraError;
use hadamard_core::GermError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input: exit code 2.
    #[error("{0}")]
    Precondition(String),
    /// A computation failed or produced no usable result: exit code 3.
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            Self::Precondition(_) => ExitCode::from(2),
            Self::Numerical(_) => ExitCode::from(3),
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Self::Precondition(format!("cli: {}", msg.into()))
    }
}

impl From<GermError> for CliError {
    fn from(e: GermError) -> Self {
        match e {
            GermError::NonFinite(_) => Self::Numerical(e.to_string()),
            _ => Self::Precondition(e.to_string()),
        }
    }
}

impl From<CatalogError> for CliError {
    fn from(e: CatalogError) -> Self {
        Self::Precondition(e.to_string())
    }
}

impl From<OdeError> for CliError {
    fn from(e: OdeError) -> Self {
        match e {
            OdeError::Germ(g) => g.into(),
            OdeError::PolynomialPart => Self::Precondition(format!(
                "{e} (an entire summand does not change where the inverse is singular)"
            )),
            _ => Self::Precondition(e.to_string()),
        }
    }
}

impl From<QuadratureError> for CliError {
    fn from(e: QuadratureError) -> Self {
        match e {
            QuadratureError::SeriesDiverges(_) => Self::Numerical(e.to_string()),
            _ => Self::Precondition(e.to_string()),
        }
    }
}

impl From<ScopeError> for CliError {
    fn from(e: ScopeError) -> Self {
        match e {
            ScopeError::SingularSystem { .. } | ScopeError::NonConvergence { .. } => Self::Numerical(e.to_string()),
            _ => Self::Precondition(e.to_string()),
        }
    }
}

impl From<VolterraError> for CliError {
    fn from(e: VolterraError) -> Self {
        match e {
            VolterraError::Germ(g) => g.into(),
            VolterraError::Probe(q) => q.into(),
            _ => Self::Precondition(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Precondition(format!("cli: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Precondition(format!("cli: invalid JSON: {e}"))
    }
}
