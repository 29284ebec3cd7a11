//! Sparse exterior algebra over the invariant coframe of `I × (S³×S³)`.

mod basis;
mod derivative;
mod form;
mod hodge;

pub use basis::{BasisIndex, Monomial};
pub use derivative::{d, d_orbit, epsilon};
pub use form::{Coefficient, Form, InvariantForm, PointForm};
pub use hodge::{hodge_star, inner_product, CoframeScaling, Scaling};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExteriorError {
    #[error("wedge of degree {lhs} and {rhs} exceeds dimension 7")]
    DegreeOverflow { lhs: usize, rhs: usize },
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("coefficient of {monomial} has no derivative")]
    MissingDerivative { monomial: String },
    #[error("singular metric: scaling entry {index} is zero")]
    SingularMetric { index: usize },
}
