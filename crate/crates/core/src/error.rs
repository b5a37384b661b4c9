use alloc::string::String;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quadrature did not converge on [{lo}, {hi}]: estimated relative error {achieved:e} after {intervals} intervals")]
    Quadrature {
        lo: f64,
        hi: f64,
        achieved: f64,
        intervals: usize,
    },

    #[error("no sign change on [{lo}, {hi}] (g(lo) = {g_lo:e}, g(hi) = {g_hi:e})")]
    RootNotBracketed {
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },

    #[error("a {levels}-level quantizer cannot be split over {agents} agents; need agents*(K-1)+1 levels")]
    Shape { levels: usize, agents: usize },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of an iterative numerical method, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. } | Error::RootNotBracketed { .. }
        )
    }
}
