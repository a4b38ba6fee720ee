//! Special functions and numerical integration.

pub mod bessel;
pub mod quadrature;

pub use bessel::{
    bessel_k0, bessel_k0_scaled, bessel_k1, bessel_k1_scaled, one_minus_xk1_exp, xk1_exp,
};
pub use quadrature::{integrate, integrate_to_infinity, QuadratureResult};
