use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point outside the domain: {0}")]
    Domain(String),
    #[error("evaluation at the shore where the depth vanishes (rho = {rho})")]
    ShoreSingularity { rho: f64 },
    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("instability detected at step {step}: relative energy growth {growth:e}")]
    Instability { step: usize, growth: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
