//! Rule synthesis from highlighted examples.
//!
//! Given a handful of `(sentence, highlighted spans)` pairs, the synthesizer
//! searches a small token-pattern language for a single rule whose matches are
//! exactly the highlights. The crate is `no_std` (it needs `alloc`) and holds
//! every algorithmic piece:
//!
//! - [`corpus`]: annotated sentences, spans, specifications, dependency paths
//! - [`pattern`]: the rule AST with placeholders, the expansion grammar,
//!   parsing and printing
//! - [`matcher`]: exact-span matching, leftmost-longest scanning, pruning
//! - [`search`]: the best-first branch-and-bound synthesizer
//! - [`scoring`]: static, augmented and learned (hashed-feature) scorers
//! - [`selfsup`]: random rule/specification generation and Oracle derivations
//! - [`evalkit`]: intrinsic and few-shot relation-extraction evaluation
//!
//! File formats, the CLI and the HTTP service live in the `ruleforge` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod corpus;
mod error;
pub mod evalkit;
mod hash;
pub mod matcher;
pub mod pattern;
pub mod scoring;
pub mod search;
pub mod selfsup;

pub use corpus::{AnnotatedSentence, Dependency, Field, Span, SpecEntry, SpecMode, Specification, Token};
pub use error::{Error, Result};
pub use hash::fnv1a64;
pub use matcher::MatchSet;
pub use pattern::{Constraint, Pattern, Quantifier, State};
pub use scoring::{Scorer, ScorerError};
pub use search::{synthesize, SearchConfig, SearchReport};
