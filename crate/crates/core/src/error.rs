//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("overflow evaluating |u|^p at node {node} (r = {r:e}, u = {value:e}, p = {exponent})")]
    Overflow {
        node: usize,
        r: f64,
        value: f64,
        exponent: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
