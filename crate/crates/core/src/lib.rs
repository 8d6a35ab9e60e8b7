//! Semi-open relation extraction over dependency-parsed scientific text.
//!
//! The crate is `no_std` (it needs `alloc`) and holds the algorithmic core:
//!
//! - [`corpus`]: CoNLL-U and standoff ingestion, section filtering.
//! - [`tradeoff`]: trigger matching and rule-based extraction of trade-off
//!   structures (trigger, arguments, argument modifiers).
//! - [`spans`] and [`metrics`]: span enumeration, beam pruning, P/R/F1 and
//!   Cohen's kappa.
//! - [`embedding`]: subword vocabulary, IDF, IDF-weighted phrase vectors.
//! - [`cluster`]: seeded k-means, noisy-cluster detection, cluster summaries.
//! - [`oie`]: Open IE tuples and a small clause-pattern extractor.
//! - [`filter`]: cluster-based filtering of Open IE tuples and retention
//!   statistics.
//!
//! File IO, the command line and the staged pipeline live in the `sore`
//! crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod cluster;
pub mod corpus;
pub mod embedding;
pub mod filter;
pub mod metrics;
pub mod oie;
pub mod spans;
pub mod tradeoff;
pub mod tree;

pub use corpus::{GoldAnnotation, ParsedDocument, ParsedSentence, Section, Token};
pub use tradeoff::{RelationLabel, RelationStructure, Source, Span, TriggerLexicon};

/// Maximum argument span width in tokens.
pub const MAX_SPAN_WIDTH: usize = 14;

/// Default beam ratio for span pruning.
pub const DEFAULT_BEAM_RATIO: f64 = 0.8;

/// Default number of argument clusters.
pub const DEFAULT_CLUSTERS: usize = 50;

/// Default subword vocabulary budget.
pub const DEFAULT_VOCAB_SIZE: usize = 16_000;
