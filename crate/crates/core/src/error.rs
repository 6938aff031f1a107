use thiserror::Error;

/// Everything that can go wrong inside the engines.
///
/// Variants split into two families: input problems (bad parameters, files)
/// and numerical failures (budgets, divergences, non-convergence). The CLI
/// maps the latter to a distinct exit code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} is outside {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("evaluation budget of {budget} exceeded")]
    Budget { budget: usize },
    #[error("non-finite integrand value at x = {at}")]
    NonFinite { at: f64 },
    #[error("no stationary point for omega = {omega}")]
    NoSaddle { omega: f64 },
    #[error("stationary point for omega = {omega} is too close to the gap minimum")]
    DegenerateSaddle { omega: f64 },
    #[error("spectral density |omega|^{p} is not integrable at omega = 0 without an infrared cutoff")]
    InfraredDivergence { p: f64 },
    #[error("kernel covers |tau| <= {available}, but {needed} is required")]
    KernelRange { needed: f64, available: f64 },
    #[error("norm drift {drift:e} exceeds tolerance")]
    NormDrift { drift: f64 },
    #[error("root finding did not converge: {0}")]
    NoConvergence(String),
    #[error("{0}")]
    Io(String),
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Budget { .. }
                | Error::NonFinite { .. }
                | Error::NoSaddle { .. }
                | Error::DegenerateSaddle { .. }
                | Error::InfraredDivergence { .. }
                | Error::KernelRange { .. }
                | Error::NormDrift { .. }
                | Error::NoConvergence(_)
        )
    }

    pub(crate) fn domain(what: &'static str, value: f64, domain: &'static str) -> Self {
        Error::Domain {
            what,
            value,
            domain,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Invalid(format!("json: {e}"))
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Invalid(format!("csv: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
