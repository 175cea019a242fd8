//! Small dense/sparse complex linear algebra: enough for the generator
//! exponentials, the dense oracle and companion-matrix root finding.

mod dense;
mod expm;
mod hermitian;
mod roots;
mod sparse;

pub use dense::{CMatrix, Lu};
pub use expm::expm;
pub use hermitian::hermitian_eigenvalues;
pub use roots::{hessenberg_eigenvalues, poly_eval, polynomial_roots};
pub use sparse::CsrMatrix;
