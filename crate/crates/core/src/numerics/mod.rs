//! Numerical kernels: adaptive quadrature, exponential integral, incomplete
//! beta and the binomial-coefficient machinery behind the closed forms.

pub mod combinatorics;
pub mod quadrature;
pub mod special;

pub use combinatorics::{
    alternating_binomial_sum, alternating_binomial_terms, binomial, double_alternating_terms,
    factorial_ratio, ln_factorial, pow_difference, Sign, SummationTerm,
};
pub use quadrature::{integrate, Integrator, QuadratureResult};
pub use special::{
    exp_integral_e1, exp_integral_e1_scaled, exp_integral_ei, regularized_incomplete_beta,
};
