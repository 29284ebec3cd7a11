//! Numerical building blocks: quadrature, splines, least-squares fits,
//! an embedded Runge–Kutta integrator and verification grids.

pub mod fit;
pub mod grid;
pub mod quadrature;
pub mod rk;
pub mod spline;
