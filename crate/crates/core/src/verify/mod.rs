//! Claim-checking harness: residuals, boundary fits, Taylor relations,
//! torsion and flux, and the compact obstruction.

mod boundary;
mod compact;
mod report;
mod residual;
mod suite;
mod torsion;

pub use boundary::{boundary_report, sample_points, BoundaryEnd, BoundaryFit, BoundaryReport, FitOptions};
pub use compact::{compact_obstruction_demo, BlowUpRow, CompactOptions, CompactReport, NO_EXTENSION};
pub use report::{Check, GridSummary, VerificationReport, SCHEMA_VERSION};
pub use residual::{closed_residual, coclosed_residual, exterior_residual, ResidualProfile};
pub use suite::{taylor_relations, verify_profiles, verify_solution, VerifyOptions};
pub use torsion::{flux_brackets, flux_monomials, tau0_relative, torsion_report, TorsionOptions, TorsionReport};
