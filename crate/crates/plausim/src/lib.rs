//! Multi-agent plausibility models and the logics of conditional, degree-graded,
//! and safe belief over them.
//!
//! The heart of the crate is a notion of bisimulation tuned to these logics:
//! instead of the raw plausibility order, it compares worlds through the
//! order derived from how each agent would rank them after quotienting by
//! the relation itself. [`bisim`] computes the largest such autobisimulation,
//! contractions, and normal forms; [`semantics`] model-checks the three
//! languages under both the normal and the raw reading of safe belief;
//! [`translate`] rewrites conditional belief into safe belief and into
//! degrees of belief; [`distinguish`] synthesizes a conditional-belief
//! formula separating any two non-bisimilar worlds. [`oracle`] carries a
//! brute-force reference implementation and seeded generators for
//! differential tests, and [`fixtures`] the worked examples used throughout.

mod bits;
mod partition;

pub mod bisim;
pub mod distinguish;
pub mod fixtures;
pub mod formula;
pub mod model;
pub mod oracle;
pub mod parser;
pub mod semantics;
pub mod translate;

pub use formula::{Formula, LanguageTag};
pub use model::{Agent, PlausibilityModel, Prop, WorldId};
pub use semantics::SemanticsMode;
