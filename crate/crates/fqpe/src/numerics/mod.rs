//! Special functions, root finding and dense Hermitian linear algebra.

pub mod dense;
pub mod eig;
pub mod roots;
pub mod special;

pub use dense::{dot, norm, quad_form, CMat};
pub use eig::{
    generalized_hermitian_eig, hermitian_eig, operator_norm, EigenDecomposition, GeneralizedEigen,
    HermitianMatrix,
};
pub use roots::find_root_bracketed;
pub use special::{bessel_i0, bessel_i0_scaled, bessel_j, bessel_j_all, chebyshev_t, lambert_w0};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub eig_residual: f64,
    pub root_tol: f64,
    pub supnorm_tol: f64,
    pub gevp_threshold: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { eig_residual: 1e-10, root_tol: 1e-12, supnorm_tol: 1e-10, gevp_threshold: 1e-12 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> crate::Result<()> {
        let all = [self.eig_residual, self.root_tol, self.supnorm_tol, self.gevp_threshold];
        if all.iter().all(|v| *v > 0.0 && v.is_finite()) {
            Ok(())
        } else {
            crate::error::invalid("tolerances must be strictly positive")
        }
    }
}
