//! Dense complex linear algebra: matrices, third-order tensors, SVD,
//! the unitary DFT along the panel axis, and the complex soft threshold.

mod matrix;
mod svd;
mod tensor;

pub use matrix::ComplexMatrix;
pub use num_complex::Complex64;
pub use svd::{
    matrix_norms, nuclear_norm, singular_values, soft_threshold, spectral_norm, svd, MatrixNorms, SvdResult,
};
pub use tensor::{dft_axis3, AxisDft, ComplexTensor3};
