//! Numerical building blocks: explicit Runge–Kutta, adaptive quadrature, root brackets.

pub mod ode;
pub mod quad;
pub mod roots;
