//! Dense complex-matrix kernel shared by every other module.

mod decomp;
mod matrix;
mod tolerance;

pub use decomp::{
    approx_eq, hermitian_eigen, is_psd, is_psd_lenient, min_eigenvalue, polar_decompose,
    psd_part, psd_sqrt, range_projection, rel_residual, svd, Eigen, Polar, Svd,
};
pub(crate) use decomp::{eigh_unchecked, jacobi_columns};
pub use matrix::{CMatrix, C64};
pub use tolerance::TolerancePolicy;
