//! Multilingual, ontology-driven retrieval of administrative e-services.
//!
//! The crate is organised along the retrieval pipeline:
//!
//! - [`ontology`]: concepts, expressions and variants, validation, sectoral merge,
//!   surface-form lookup and weighted expansion, canonical JSON and Turtle export
//! - [`catalog`]: the descriptive service records and their inverted index
//! - [`reformulate`]: query filtering followed by ontology enrichment
//! - [`search`]: scoring, personalised ranking and explanations
//! - [`profile`]: interaction journals, interest weights and recommendations
//!
//! Text handling shared by all of them lives in [`text`].

pub mod catalog;
pub mod error;
pub mod exec;
pub mod lang;
pub mod ontology;
pub mod profile;
pub mod reformulate;
pub mod search;
pub mod text;

pub use error::{CoreError, Result};
pub use exec::Execution;
pub use lang::LanguageCode;
