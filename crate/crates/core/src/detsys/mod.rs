//! Determining equations for point symmetries of `Δ_g u + f(u) = 0`, their
//! solution over a finite ansatz, and classification of the result.

mod class;
mod classify;
mod residuals;
mod solve;

pub use class::{critical_exponent, NonlinearityClass};
pub use classify::{
    classify, classify_generators, poisson_equation, side_checks, ClassificationTable, ClassifiedGenerator,
    GeneratorKind, PoissonEquation, SideCheck,
};
pub use residuals::{conformal_weight, determining_residuals, DeterminingReport, GeneratorDisplay, SymmetryGenerator};
pub use solve::{solve_linear_ansatz, AnsatzBasis, Candidate, SolveOptions, SolveResult};

use crate::geom::GeomError;

#[derive(Debug, Clone, thiserror::Error)]
pub enum DetError {
    #[error("determining equations need n >= 3, got n = {0}")]
    Dimension(usize),
    #[error("invalid nonlinearity: {0}")]
    Class(String),
    #[error("ansatz basis is empty")]
    EmptyBasis,
    #[error("invalid ansatz basis: {0}")]
    Basis(String),
    #[error("a and b must be functions of the coordinates only")]
    NotCanonical,
    #[error("too many sample points failed to evaluate")]
    Sampling,
    #[error(transparent)]
    Geom(#[from] GeomError),
}
