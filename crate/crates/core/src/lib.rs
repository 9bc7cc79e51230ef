//! Text generation as text editing.
//!
//! Targets are produced from sources by tagging each source token with
//! `KEEP` or `DELETE`, optionally inserting a phrase from a small vocabulary
//! before it. The crate covers the full pipeline: learning the phrase
//! vocabulary from a parallel corpus, converting targets into tag sequences,
//! training a tagger, realizing predicted tags as text and scoring outputs.
//!
//! ```
//! use editkit::tags::convert_with_swap;
//! use editkit::text::{detokenize, tokenize};
//! use editkit::vocab::PhraseVocabulary;
//!
//! let source = tokenize("Dylan won Nobel prize . Dylan is an American musician .");
//! let target = tokenize("Dylan , an American musician , won Nobel prize .");
//! let vocab = PhraseVocabulary::new([vec![",".to_string()]]);
//! let tags = convert_with_swap(&source, &target, &vocab);
//! let out = editkit::realize::realize(&source, &tags).unwrap();
//! assert_eq!(detokenize(&out), "Dylan, an American musician, won Nobel prize.");
//! ```

pub mod align;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod metrics;
pub mod model;
pub mod realize;
pub mod tags;
pub mod text;
pub mod vocab;

pub use error::{Error, Result};
