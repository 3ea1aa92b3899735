//! CSR storage and the kernels the rest of the crate is built on.

mod csr;
mod product;

pub use csr::{CsrMatrix, Pattern, SparseStructure};
pub use product::{galerkin_product, spmm, spmm_numeric, spmm_symbolic};
