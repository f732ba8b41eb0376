//! Fundamental tensor, sprays, Riemann and flag curvature, and the residual
//! checks built on them.

mod checks;
mod riemann;
mod spray;
mod tensor;

pub use checks::{check_inverse_pde, check_rapcsak, funk_pde_residual, RapcsakReport};
pub use riemann::{
    check_self_adjoint, const_curvature_residual, flag_curvature, riemann, CurvatureAt,
    FlagCurvatureSample, RiemannOperator, DEGENERATE_FLAG_EPS,
};
pub use spray::{funk_spray, spray_coeffs, Spray};
pub use tensor::{fundamental_matrix, fundamental_tensor, FundamentalTensor, CONDITION_WARN};
