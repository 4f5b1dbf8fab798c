//! Built-in model geometries, their reference tables, and the per-fixture suite.

mod fixtures;
mod suite;
mod tables;

pub use fixtures::{load, load_all, polynomial_basis, BracketCheck, CatalogError, GeometryFixture, NAMES};
pub use suite::{
    reconcile, run_all, run_fixture_suite, suite_classes, tables_for, Agreement, Check, ClassOutcome, CurrentOutcome,
    Reconciliation, SuiteReport, CONTROL_MIN, CURRENT_SAMPLES,
};
pub use tables::{ReferenceCurrent, TABLES};
