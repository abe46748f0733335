//! Sparse complex linear algebra used by the operator and resolvent modules.

mod banded;
mod eigen;
mod gmres;
mod sparse;

pub use banded::{BandedLu, ZeroPivot};
pub use eigen::{smallest_eigenpairs, smallest_eigenvalues, EigenConfig, EigenError, Eigenpairs};
pub use gmres::{gmres_shifted, GmresConfig, GmresOutcome};
pub use sparse::CsrMatrix;

pub(crate) use gmres::{dot, norm};
