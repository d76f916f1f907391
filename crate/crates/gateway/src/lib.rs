//! HTTP API and command-line front end binding ontology, catalog,
//! reformulation, search and profiles into a running service.

pub mod bundle;
pub mod config;
pub mod engine;
pub mod error;
pub mod http;

pub use config::EngineConfig;
pub use engine::{Engine, SearchRequest, SearchResponse, Settings};
pub use error::{ApiError, GatewayError};
