//! Dense real linear algebra and polynomial routines sized for small
//! control problems (n <= 8).

mod linalg;
mod matrix;
mod poly;

pub use linalg::{
    default_rank_tol, invert, rank, rank_with_tol, solve_dense, symmetric_eigenvalues,
    SINGULAR_PIVOT,
};
pub use matrix::Matrix;
pub use poly::{
    char_poly, eigenvalues, expand_roots, poly_roots, root_set_distance, sort_roots, ComplexRoot,
    Polynomial, REAL_SNAP,
};
