//! Invariant coclosed G₂-structures on `I × (S³×S³)`.
//!
//! The crate is organised bottom-up: [`scalar`] functions of `t`, the
//! invariant [`exterior`] algebra, the SU(3)/G₂ [`structures`] built from six
//! profile functions, the singular [`ode`] for the coclosed condition, exact
//! [`analytic`] families, and the [`verify`] harness.

pub mod exterior;
pub mod scalar;
pub mod structures;
pub mod numerics;
pub mod ode;
pub mod analytic;
pub mod verify;
