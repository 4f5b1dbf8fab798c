//! Tensor calculus on a single chart.

mod fields;
mod jet;
mod metric;

pub use fields::{
    bracket_closure, conformal_check, conformal_factor, conformal_factor_of, conformal_identity_checks,
    conformal_residuals, covariant_divergence, express_in_span, field_rank, lie_bracket, lie_derivative_metric,
    vector_laplacian, ClosureReport, ConformalReport, ConformalVerdict, FieldDisplay, IdentityReport, VectorField,
};
pub use jet::{has_jets, raised_jet, total_derivative, total_divergence};
pub use metric::{GeomError, MetricSpace, Signature, JET_RANGE, U_RANGE};
