use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} entries, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("filter diverged at iteration {iteration}: non-finite {quantity}")]
    Diverged {
        iteration: u64,
        quantity: &'static str,
    },

    #[error("{name} = {value} is outside the supported domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("empty ensemble: all {0} runs diverged or no runs were supplied")]
    EmptyEnsemble(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
