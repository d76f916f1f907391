//! Engine configuration, read from a TOML file.
//!
//! Relative paths are resolved against the directory holding the file.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use ontoserv_core::ontology::ExpansionPolicy;
use ontoserv_core::profile::ProfileConfig;
use ontoserv_core::search::FieldWeights;
use ontoserv_core::LanguageCode;
use serde::Deserialize;

use crate::error::GatewayError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineConfig {
    /// Sectoral ontology files in canonical JSON.
    pub ontologies: Vec<PathBuf>,
    /// Service catalog, JSON array or CSV.
    pub catalog: PathBuf,
    /// Directory of per-user journals; profiles are kept in memory only when absent.
    #[serde(default)]
    pub profile_dir: Option<PathBuf>,
    #[serde(default)]
    pub default_language: LanguageCode,
    #[serde(default)]
    pub reference_language: LanguageCode,
    #[serde(default = "default_listen")]
    pub listen: String,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_k")]
    pub default_k: usize,
    #[serde(default = "default_max_k")]
    pub max_k: usize,
    /// Spread index construction and term resolution over the thread pool.
    #[serde(default = "yes")]
    pub parallel: bool,
    /// Write the catalog back to `catalog` after every admin mutation.
    #[serde(default)]
    pub persist_catalog: bool,
    /// Stopword override files by language.
    #[serde(default)]
    pub stopwords: BTreeMap<LanguageCode, PathBuf>,
    #[serde(default)]
    pub expansion: ExpansionPolicy,
    #[serde(default)]
    pub field_weights: FieldWeights,
    #[serde(default)]
    pub profile: ProfileConfig,
}

fn default_listen() -> String {
    "127.0.0.1:8080".into()
}

fn default_alpha() -> f64 {
    0.25
}

fn default_k() -> usize {
    10
}

fn default_max_k() -> usize {
    100
}

fn yes() -> bool {
    true
}

impl EngineConfig {
    /// Minimal configuration over the given files, defaults elsewhere.
    pub fn new(ontologies: Vec<PathBuf>, catalog: PathBuf) -> Self {
        EngineConfig {
            ontologies,
            catalog,
            profile_dir: None,
            default_language: LanguageCode::FR,
            reference_language: LanguageCode::FR,
            listen: default_listen(),
            alpha: default_alpha(),
            default_k: default_k(),
            max_k: default_max_k(),
            parallel: true,
            persist_catalog: false,
            stopwords: BTreeMap::new(),
            expansion: ExpansionPolicy::default(),
            field_weights: FieldWeights::default(),
            profile: ProfileConfig::default(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, GatewayError> {
        let text = std::fs::read_to_string(path).map_err(|e| GatewayError::io(path, e))?;
        let mut config: EngineConfig = toml::from_str(&text).map_err(|e| GatewayError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve(base);
        config.check().map_err(|message| GatewayError::Config {
            path: path.to_path_buf(),
            message,
        })?;
        Ok(config)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.ontologies.iter_mut().for_each(fix);
        fix(&mut self.catalog);
        if let Some(p) = self.profile_dir.as_mut() {
            fix(p);
        }
        self.stopwords.values_mut().for_each(fix);
    }

    pub fn listen_addr(&self) -> Result<SocketAddr, String> {
        let addr: SocketAddr = self
            .listen
            .parse()
            .map_err(|e| format!("listen address {:?}: {e}", self.listen))?;
        if addr.port() == 0 {
            return Err("listen port must lie in [1, 65535]".into());
        }
        Ok(addr)
    }

    pub fn check(&self) -> Result<(), String> {
        if self.ontologies.is_empty() {
            return Err("at least one ontology file is required".into());
        }
        self.listen_addr()?;
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(format!("alpha must be a non-negative number, got {}", self.alpha));
        }
        if self.max_k == 0 || self.default_k > self.max_k {
            return Err("default_k must not exceed max_k, and max_k must be positive".into());
        }
        self.expansion.check()?;
        self.field_weights.check()?;
        self.profile.check()?;
        Ok(())
    }
}
