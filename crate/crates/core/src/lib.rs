//! Exact difference calculus and discrete orthogonal polynomial sequences.
//!
//! Everything here is computed over arbitrary-precision rationals: the two
//! difference operators `D_ω p(x) = (p(x+ω) − p(x))/ω` and
//! `D_q p(x) = (p(qx) − p(x))/((q−1)x)`, moment functionals and their
//! distributional calculus, monic orthogonal sequences built from moments,
//! Pearson (semiclassical) analysis, coherence-relation fitting between two
//! sequences, and Sobolev-type orthogonality with two independently computed,
//! exactly cross-checkable construction routes.
//!
//! No floating point is used anywhere; every identity is checked bit-exactly
//! up to an explicit degree bound.

pub mod calculus;
pub mod coherence;
pub mod error;
pub mod families;
pub mod functional;
pub mod linalg;
pub mod poly;
pub mod rational;
pub mod semiclassical;
pub mod smop;
pub mod sobolev;
pub mod verify;

pub use calculus::NuParam;
pub use error::{Error, Result};
pub use functional::MomentFunctional;
pub use poly::Poly;
pub use rational::Rational;
pub use smop::Smop;
