//! Exact computation with generalized polynomials and functional identities
//! over finite-dimensional unital algebras of prime characteristic.
//!
//! The crate is organized along the pipeline most computations follow:
//!
//! * [`fp`] / [`fppoly`] — scalar and matrix arithmetic over the prime field
//!   F_p, and dense univariate polynomials over F_p (including irreducible
//!   modulus selection for field extensions).
//! * [`algebra`] — algebras described by structure constants: construction
//!   and validation, element arithmetic, inverses, unit enumeration, centers
//!   and centralizers. Galois fields GF(p^k) and matrix algebras M_n(GF(p^k))
//!   come with ready-made constructors.
//! * [`genpoly`] — generalized polynomials in A{X_1,...,X_m}: sums of
//!   monomials `a_1 X a_2 X ... a_s X a_{s+1}` with coefficients interleaved
//!   between the variables, kept in a canonical tensor normal form over the
//!   center of A. Degree, homogeneous decomposition, evaluation, and the
//!   iterated-difference linearization operators live here.
//! * [`identity`] — deciding whether candidate identities hold on a given
//!   algebra, with reproducible witnesses: polynomial identities, Hua's
//!   identity, and residual checks for functional identities.
//! * [`solver`] — compiling functional identities into exact linear systems
//!   over F_p on the matrix entries of the unknown additive maps, solving
//!   them, and analyzing the solution space.
//! * [`numtheory`] — binomial arithmetic mod p via Lucas' theorem and the
//!   special polynomials used to classify power identities.
//! * [`expr`] — the textual expression grammar shared by the CLI and the
//!   JSON template format.
//!
//! A note on scope: no finite noncommutative division ring exists, so matrix
//! algebras over finite fields serve as desk-scale proxies. Their unit group
//! is a proper subset of the nonzero elements, which is why unit-domain and
//! whole-algebra-domain checks are kept distinct throughout.

pub mod addmap;
pub mod algebra;
pub mod error;
pub mod expr;
pub mod fp;
pub mod fppoly;
pub mod genpoly;
pub mod identity;
pub mod numtheory;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};

/// Default cap on the number of elements any exhaustive enumeration may
/// visit (units, assignment spaces, identity domains). Callers can raise or
/// lower it explicitly; everything above must use sampled modes.
pub const DEFAULT_BUDGET: u64 = 1 << 24;
