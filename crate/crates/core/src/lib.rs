//! Exact computation of test modules, F-jumping numbers and Bernstein-Sato
//! polynomials of hypersurfaces in `F_p[x_1, ..., x_n]`.

pub mod arith;
pub mod bernstein;
pub mod cartier;
pub mod error;
pub mod groebner;
pub mod poly;
pub mod testmodule;
pub mod weyl;

pub use arith::{DigitVector, PAdicRational, Prime, Rational};
pub use cartier::{CartierModuleSpec, FRegularStatus, StabilizationCriterion};
pub use error::{Error, Result};
pub use groebner::{Ideal, MonomialOrder};
pub use poly::{Monomial, Ring, SparsePoly};
pub use testmodule::{JumpingNumberReport, SearchConfig, TestModuleResult};
