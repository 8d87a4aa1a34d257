//! Cross-lingual re-inflection of dependency treebanks.
//!
//! The pipeline: train an inflector on UniMorph data for a low-resource
//! target language, convert a related rich-resource UD treebank's
//! morphological features to the UniMorph schema, re-inflect its word
//! forms with the target-language inflector, and train/evaluate dependency
//! parsers on the result in zero- and few-shot setups.
//!
//! Modules, in pipeline order:
//!
//! * [`conllu`] — lossless CoNLL-U data model, reader/writer, tree
//!   validation, treebank merging.
//! * [`unimorph`] — UniMorph lexicons, dialect concatenation, seeded
//!   80-10-10 splits, POS coverage.
//! * [`schema`] — UD→UniMorph tag conversion and post-editing rule
//!   induction.
//! * [`inflector`] — suffix-transduction inflector with memorization and
//!   tag backoff.
//! * [`pipeline`] — x-inflection of treebanks.
//! * [`parser`] — 2-planar sequence-labeling and graph-based (MST)
//!   parsers over averaged linear models.
//! * [`eval`] — UAS/LAS attachment scoring.
//! * [`experiment`] — zero-/few-shot drivers and overlap statistics.
//! * [`analysis`] — Pearson correlation of score deltas against data-size
//!   and overlap features.

pub mod analysis;
pub mod conllu;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod inflector;
pub mod parser;
pub mod pipeline;
pub mod rng;
pub mod schema;
pub mod unimorph;

pub use error::{Error, Result};
