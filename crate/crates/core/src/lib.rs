//! Exact arithmetic over cyclotomic fields, Laurent polynomials and rational functions, with
//! decomposition of Laurent polynomials under composition, a catalogue of bidecomposition
//! identities, and chains of complete decompositions joined by local moves.

pub mod chains;
pub mod cyclofield;
pub mod decompose;
pub mod dickson;
pub mod ratfunc;
pub mod ritt_catalog;
pub mod selftest;

pub use chains::{connect, verify_chain, ChainError, ChainProof, Connector, Move};
pub use cyclofield::{CycloScalar, FieldError, Rational};
pub use decompose::{
    complete_decompositions, is_indecomposable, DecomposeError, Decomposer, Limits, SplitKind,
    SplitResult,
};
pub use dickson::{dickson, dickson1, dickson_second, BivariatePoly};
pub use ratfunc::{
    compose_all, Decomposition, LaurentPoly, Mobius, Poly, RatFunc, Side, Substitution,
};
pub use ritt_catalog::{AzCase, Bidecomposition, CatalogueError, MoveKind, TwistedPair};
