//! Linear-programming fallback: a small bounded simplex and the per-path degradation model.

mod degrade;
pub mod simplex;

use thiserror::Error;

use crate::net::ConnId;

pub use degrade::{
    build_instance, lp_provisioner, lp_sides, solve, to_candidate, LpConn, LpInstance, LpSides,
    LpSolution,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("objective is unbounded")]
    Unbounded,
    #[error("no convergence after {0} iterations")]
    IterationLimit(usize),
    #[error("malformed problem: {0}")]
    Malformed(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("connection {0} has a non-linear revenue function")]
    NonLinear(ConnId),
}
