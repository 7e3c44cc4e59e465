//! Contextual categories built from term monads and their left modules.
//!
//! The library is layered:
//!
//! * [`syntax`] and [`parse`]: nominal signatures and alpha-normal terms.
//! * [`monad`], [`builtin`], [`sigmonad`]: monads on finite variable sets,
//!   left modules over them, and the term monads of signatures.
//! * [`csystem`]: contexts, morphisms and sections of the contextual
//!   category a module presents, with its weakening, substitution and
//!   generic-section operations.
//! * [`subsystem`]: bounded closure rules and checkers for subsets of
//!   contexts and sections.
//! * [`congruence`]: equality judgements, the congruence conditions, the
//!   induced equivalence relations and the quotient construction.
//! * [`laws`], [`gen`]: randomized law suites and generators.
//! * [`files`]: the on-disk judgement and equation formats.

pub mod builtin;
pub mod congruence;
pub mod csystem;
pub mod error;
pub mod files;
pub mod gen;
pub mod laws;
#[cfg(feature = "testkit")]
pub mod testkit;
pub mod monad;
pub mod parse;
pub mod sigmonad;
pub mod subsystem;
pub mod syntax;
pub mod value;

pub use error::{Error, Result};
