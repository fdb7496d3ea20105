//! Row-product and row-function matrices, random generators, and the spectral
//! and geometric measurements used to check the attack matrices empirically.

mod generate;
mod identities;
mod matrix;
mod rowfunc;
mod spectral;

pub use generate::{gen_matrix, TauRandomSpec};
pub use identities::{
    check_derivative_identity, check_pm_identity, derivative_identity_exhaustive,
    pm_identity_exhaustive,
};
pub use matrix::DenseMatrix;
pub use rowfunc::{index_tuples, row_function_matrix, row_product, RowFunction, RowOrder};
pub use spectral::{
    euclidean_ratio_probe, least_singular_value, op_norm, perturbed_matrix, perturbed_sigma_probe,
    singular_values, spectral_report, svd_residual, EuclideanProbe, SpectralReport,
};

use thiserror::Error;

/// Largest number of rows any constructed matrix may have.
pub const DEFAULT_ROW_CAP: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("entry {value} at ({row},{col}) is not on the {domain} cube")]
    Domain {
        row: usize,
        col: usize,
        value: f64,
        domain: crate::boolfunc::Domain,
    },
    #[error("row function has arity {arity} but {given} factor matrices were given")]
    Arity { arity: usize, given: usize },
    #[error("c_h undefined: the full-monomial coefficient of h is zero")]
    DegenerateKernel,
    #[error("{rows} rows exceeds the row cap of {cap}")]
    RowCap { rows: u128, cap: usize },
    #[error("cannot parse matrix: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// `base^exp` as a row count, or `RowCap` if it exceeds `cap`.
pub fn checked_row_count(base: usize, exp: usize, cap: usize) -> Result<usize, MatrixError> {
    let rows = (base as u128).checked_pow(exp as u32).unwrap_or(u128::MAX);
    if rows > cap as u128 {
        return Err(MatrixError::RowCap { rows, cap });
    }
    Ok(rows as usize)
}
