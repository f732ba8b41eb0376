//! Truncated Taylor arithmetic ("jets") and the derivative operators built
//! on it, plus a finite-difference oracle.

mod partial;
mod scalar;
mod taylor;

pub use partial::{
    default_fd_step, fd_partial, gradient_with, hessian_with, mixed_partial, taylor_directional, MultiIndex, ScalarField,
    MAX_FD_ORDER, MAX_MIXED_ORDER,
};
pub use scalar::{constants, dot, norm_sq, perturbation_degree, values, Scalar, LEADING_EPS};
pub use taylor::{factorial, lift, lift_axis, lift_const, Jet};
