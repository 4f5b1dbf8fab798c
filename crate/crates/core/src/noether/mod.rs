//! Variational structure of `Δ_g u + f(u) = 0`: Euler operator, Noether
//! tests for point symmetries and the resulting conserved currents.

mod current;
mod lagrangian;
mod verdict;

pub use current::{
    build_current, characteristic, characteristic_sign, closed_form_current, general_current, off_shell_control,
    verify_components_symbolic, verify_current_numeric, verify_current_symbolic, ConservedCurrent, JetPoint,
    NumericCheck, SymbolicCheck,
};
pub use lagrangian::{euler_lagrange, prolong_apply, prolong_closed, prolong_direct, prolongation_coefficient, Lagrangian};
pub use verdict::{class_potential, noether_classify, scaling_constant, NoetherKind, NoetherVerdict};

use crate::detsys::{DetError, DeterminingReport};
use crate::geom::GeomError;

#[derive(Debug, Clone, thiserror::Error)]
pub enum NoetherError {
    #[error("generator fails the determining equations (max residual {:.3e})", .0.max_residual())]
    NotSymmetry(Box<DeterminingReport>),
    #[error("generator is not a Noether symmetry ({0})")]
    NotNoether(String),
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
    #[error("too many jet samples failed to evaluate")]
    Sampling,
    #[error(transparent)]
    Det(#[from] DetError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}
