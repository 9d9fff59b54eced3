//! Exact linear algebra for factoring matrices through subspaces of `M_n(F)`.
//!
//! Scalars live in `GF(p)` or `Q`. Subspaces are given by canonical bases
//! (or a normal, for hyperplanes); every factorization is re-checked before
//! it is returned.

pub mod error;
pub mod factor2;
pub mod field;
pub mod matrix;
pub mod oracle;
pub mod semigroup;
pub mod subspace;
pub mod witness;

pub use error::{Error, Result};
pub use factor2::{
    degenerate_pair_witness, hyperplane_pair_factor, n2_classify, n2_pair_factor, sum_of_products_decompose,
    two_hyperplanes_factor, Degeneracy, N2Class, N2Outcome, N2Verdict, PairFactorization, SumOfProducts,
};
pub use field::{FieldSpec, Scalar};
pub use matrix::Matrix;
pub use semigroup::{exceptional_factor, semigroup_factor, ChainFactorization, SemigroupFactorizer};
pub use subspace::{AffineSubspace, AnySubspace, Hyperplane, LinearSubspace};
pub use witness::{find_nonsingular_in_affine, find_rank_r_in_affine, inverse_pair, SearchBudget};
