//! Low-level numerical kernels: quadrature, root finding, interpolation,
//! Chebyshev differentiation, and Airy functions.

pub mod airy;
pub mod cheb;
pub mod pchip;
pub mod quad;
pub mod roots;
