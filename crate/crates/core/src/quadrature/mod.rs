//! Quadrature engines and the special constants built on them.

pub mod adaptive;
pub mod constants;

pub use adaptive::{integrate, integrate_pieces, integrate_to_infinity, Estimate, Rule, Tolerance};
pub use constants::{
    bose_integral, bose_integral_quadrature, c1_const, c1_const_with, c_one_dim, regularized_c, regularized_c_with,
    IntegralValue, Method, OneDimConstant,
};
