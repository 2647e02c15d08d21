//! Polynomials, monomial bases, moment matrices and SOS certificates.

mod basis;
mod moments;
mod newton;
mod poly;
mod sos;
mod sym;

pub use basis::{basis_matrices, monomial_basis, BasisMatrixTable, MonomialBasis};
pub use newton::{in_convex_hull, newton_reduce};
pub use moments::{apply_ly, moment_matrix, moment_matrix_in, MomentVector};
pub use poly::{eval_poly, exponents_of_degree, exponents_up_to, hessian, MultiIndex, SparsePolynomial};
pub use sos::{check_sos, check_sos_convex, gram_feasibility, hessian_form, GramCertificate, SosOutcome, NOT_SOS_MARGIN};
pub use sym::SymMatrix;
