//! Learning ASP programs with weak constraints from ordered answer sets.
//!
//! The crate bundles a small ASP language core (parser, grounder, native
//! solver, weak-constraint semantics), a mode-bias hypothesis space builder,
//! the learning-task judgements, the meta-level encodings, the learning loop
//! itself, and a benchmark protocol for preference-learning accuracy.

pub mod asp;
pub mod bench;
pub mod space;
pub mod engine;
pub mod meta;
pub mod micro;
pub mod task;
pub mod taskfile;
pub mod error;
pub mod ground;
pub mod parser;
pub mod reduct;
pub mod solve;
pub mod syntax;
pub mod weak;

pub use error::{AspError, BenchError, EngineError, MetaError, SpaceError, TaskError};
pub use syntax::{Atom, BodyElem, Interpretation, Literal, Program, Rule, Sym, Term};
