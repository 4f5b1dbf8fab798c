//! Symmetry and conservation-law analysis for semilinear Poisson equations
//! `Δ_g u + f(u) = 0` on (pseudo-)Riemannian charts.

pub mod catalog;
pub mod detsys;
pub mod exprcore;
pub mod geom;
pub mod linalg;
pub mod noether;
