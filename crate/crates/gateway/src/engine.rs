//! The running engine: an immutable ontology, a swappable catalog snapshot and
//! the user profiles, with the operations the HTTP API and the CLI expose.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use chrono::{DateTime, SubsecRound, Utc};
use ontoserv_core::catalog::{Catalog, IndexedCatalog, ServiceRecord, Upsert};
use ontoserv_core::ontology::{import_canonical_with, merge, ExpansionPolicy, ExpressionId, Ontology, Provenance};
use ontoserv_core::profile::{check_user_id, InteractionEvent, ProfileConfig, ProfileStore, UserProfile};
use ontoserv_core::reformulate::{reformulate, RawQuery, Term};
use ontoserv_core::search::{explain, rank, ExplanationLine, RankOptions};
use ontoserv_core::text::Analyzer;
use ontoserv_core::{CoreError, Execution, LanguageCode};
use serde::{Deserialize, Serialize};

use crate::config::EngineConfig;
use crate::error::{ApiError, GatewayError};

/// Tunables fixed for the lifetime of an engine.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub expansion: ExpansionPolicy,
    pub rank: RankOptions,
    pub max_k: usize,
    pub profile: ProfileConfig,
    pub exec: Execution,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            expansion: ExpansionPolicy::default(),
            rank: RankOptions::default(),
            max_k: 100,
            profile: ProfileConfig::default(),
            exec: Execution::default(),
        }
    }
}

impl Settings {
    pub fn from_config(config: &EngineConfig) -> Self {
        Settings {
            expansion: config.expansion,
            rank: RankOptions {
                field_weights: config.field_weights,
                alpha: config.alpha,
                k: config.default_k,
            },
            max_k: config.max_k,
            profile: config.profile,
            exec: if config.parallel { Execution::Parallel } else { Execution::Sequential },
        }
    }
}

/// What one request sees: the ontology plus a coherent catalog and index.
#[derive(Debug)]
pub struct Snapshot {
    pub ontology: Arc<Ontology>,
    pub services: IndexedCatalog,
}

#[derive(Debug)]
pub struct Engine {
    settings: Settings,
    snapshot: RwLock<Arc<Snapshot>>,
    writer: Mutex<()>,
    profiles: Mutex<BTreeMap<String, UserProfile>>,
    store: Option<ProfileStore>,
    catalog_file: Option<PathBuf>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

/// Builds the analyzer shared by the ontology, the index and the queries.
pub fn analyzer_for(config: &EngineConfig) -> Result<Analyzer, GatewayError> {
    let mut analyzer = Analyzer::new(config.default_language);
    for (&language, path) in &config.stopwords {
        analyzer
            .load_stopwords_file(language, path)
            .map_err(|e| GatewayError::load(path, e))?;
    }
    Ok(analyzer)
}

/// Imports and validates every sectoral file, then merges them.
pub fn load_ontology(paths: &[PathBuf], reference_language: LanguageCode, analyzer: &Analyzer) -> Result<Ontology, GatewayError> {
    let mut sectorals = Vec::with_capacity(paths.len());
    for path in paths {
        let text = std::fs::read_to_string(path).map_err(|e| GatewayError::io(path, e))?;
        let o = import_canonical_with(&text, analyzer).map_err(|e| GatewayError::load(path, e))?;
        let report = o.validate();
        if report.has_errors() {
            return Err(GatewayError::Invalid {
                path: path.clone(),
                report,
            });
        }
        for w in report.warnings() {
            tracing::warn!(file = %path.display(), "{w}");
        }
        sectorals.push(o);
    }
    Ok(merge(&sectorals, reference_language, analyzer)?)
}

pub fn load_catalog(path: &std::path::Path) -> Result<Catalog, GatewayError> {
    let text = std::fs::read_to_string(path).map_err(|e| GatewayError::io(path, e))?;
    Catalog::ingest(&text).map_err(|e| GatewayError::load(path, e))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
pub struct SearchRequest {
    pub q: String,
    #[serde(default)]
    pub lang: Option<LanguageCode>,
    #[serde(default)]
    pub user: Option<String>,
    #[serde(default)]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultItem {
    pub id: String,
    pub title: String,
    pub url: String,
    pub administration: String,
    pub sector: String,
    pub score: f64,
    pub base_score: f64,
    pub personalization_factor: f64,
    pub explanation: Vec<ExplanationLine>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResponse {
    pub query: String,
    pub language: LanguageCode,
    pub results: Vec<ResultItem>,
    pub enriched_terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct Feedback {
    pub user: String,
    pub service_id: String,
    #[serde(default)]
    pub query: Option<String>,
    #[serde(default)]
    pub language: Option<LanguageCode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub id: String,
    pub title: String,
    pub url: String,
    pub interest: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendations {
    pub user: String,
    pub recommendations: Vec<Recommendation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpandedTerm {
    pub expression: ExpressionId,
    pub lemma: String,
    pub language: LanguageCode,
    pub weight: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpandMatch {
    pub expression: ExpressionId,
    pub lemma: String,
    pub expansions: Vec<ExpandedTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpandResponse {
    pub term: String,
    pub language: LanguageCode,
    pub matches: Vec<ExpandMatch>,
}

/// Title in `language`, else in the reference language, else the first one.
fn title_in(record: &ServiceRecord, language: LanguageCode, reference: LanguageCode) -> String {
    record
        .titles
        .get(&language)
        .or_else(|| record.titles.get(&reference))
        .or_else(|| record.titles.values().next())
        .cloned()
        .unwrap_or_default()
}

impl Engine {
    pub fn new(ontology: Ontology, services: IndexedCatalog, settings: Settings) -> Self {
        Engine {
            settings,
            snapshot: RwLock::new(Arc::new(Snapshot {
                ontology: Arc::new(ontology),
                services,
            })),
            writer: Mutex::new(()),
            profiles: Mutex::new(BTreeMap::new()),
            store: None,
            catalog_file: None,
        }
    }

    /// Attaches a journal directory and loads every profile in it.
    pub fn with_profile_store(mut self, store: ProfileStore) -> Result<Self, GatewayError> {
        let loaded = store.load_all(&self.settings.profile)?;
        *lock(&self.profiles) = loaded;
        self.store = Some(store);
        Ok(self)
    }

    /// Imports, validates and merges the ontologies, indexes the catalog and
    /// loads the profiles named by `config`.
    pub fn start(config: &EngineConfig) -> Result<Self, GatewayError> {
        let settings = Settings::from_config(config);
        let analyzer = analyzer_for(config)?;
        let ontology = load_ontology(&config.ontologies, config.reference_language, &analyzer)?;
        let catalog = load_catalog(&config.catalog)?;
        for w in catalog.check_annotations(&ontology).warnings() {
            tracing::warn!(file = %config.catalog.display(), "{w}");
        }
        let services = IndexedCatalog::new(catalog, analyzer, settings.exec);
        let mut engine = Engine::new(ontology, services, settings);
        if config.persist_catalog {
            engine.catalog_file = Some(config.catalog.clone());
        }
        match &config.profile_dir {
            Some(dir) => engine.with_profile_store(ProfileStore::open(dir)?),
            None => Ok(engine),
        }
    }

    pub fn settings(&self) -> &Settings {
        &self.settings
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshot.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    fn k(&self, k: Option<usize>) -> Result<usize, ApiError> {
        match k {
            None => Ok(self.settings.rank.k),
            Some(k) if k <= self.settings.max_k => Ok(k),
            Some(k) => Err(ApiError::bad_request(format!("k = {k} exceeds the limit of {}", self.settings.max_k))),
        }
    }

    pub fn profile(&self, user: &str) -> Option<UserProfile> {
        lock(&self.profiles).get(user).cloned()
    }

    pub fn search(&self, req: &SearchRequest) -> Result<SearchResponse, ApiError> {
        let k = self.k(req.k)?;
        if let Some(user) = &req.user {
            check_user_id(user)?;
        }
        let snap = self.snapshot();
        let raw = RawQuery {
            text: req.q.clone(),
            language: req.lang,
        };
        let enriched = reformulate(&raw, &snap.ontology, &self.settings.expansion)?;
        let profile = req.user.as_deref().and_then(|u| self.profile(u));
        let options = RankOptions { k, ..self.settings.rank };
        let ranked = rank(&enriched, &snap.services, profile.as_ref(), &options, self.settings.exec);

        let reference = snap.ontology.reference_language();
        let results = ranked
            .iter()
            .filter_map(|r| {
                let record = snap.services.catalog().get(&r.service)?;
                Some(ResultItem {
                    id: r.service.clone(),
                    title: title_in(record, enriched.language, reference),
                    url: record.url.clone(),
                    administration: record.administration.clone(),
                    sector: record.sector.clone(),
                    score: r.score,
                    base_score: r.base_score,
                    personalization_factor: r.personalization_factor,
                    explanation: explain(r, &options.field_weights).lines,
                })
            })
            .collect();

        if let Some(user) = &req.user {
            let language = Some(enriched.language);
            self.record(user, &snap.services, |ts| InteractionEvent::query(user.as_str(), ts, req.q.trim(), language))?;
        }

        Ok(SearchResponse {
            query: req.q.trim().to_string(),
            language: enriched.language,
            results,
            enriched_terms: enriched.terms,
        })
    }

    /// Folds one event into a user's profile and appends it to their journal.
    fn record(
        &self,
        user: &str,
        services: &IndexedCatalog,
        event: impl FnOnce(DateTime<Utc>) -> InteractionEvent,
    ) -> Result<(), ApiError> {
        let mut profiles = lock(&self.profiles);
        let profile = match profiles.get_mut(user) {
            Some(p) => p,
            None => profiles.entry(user.to_string()).or_insert(UserProfile::new(user)?),
        };
        let now = Utc::now().trunc_subsecs(0);
        let ts = profile.events.last().map_or(now, |e| e.timestamp.max(now));
        profile.record_event(event(ts), services.catalog(), &self.settings.profile)?;
        if let Some(store) = &self.store {
            let appended = store.append(profile.events.last().expect("event just recorded"));
            if let Err(e) = appended {
                // the journal is authoritative; drop the in-memory fold
                *profile = store.load(user, &self.settings.profile).unwrap_or(UserProfile::new(user)?);
                return Err(ApiError::internal(e.to_string()));
            }
        }
        Ok(())
    }

    pub fn feedback(&self, fb: &Feedback) -> Result<(), ApiError> {
        check_user_id(&fb.user)?;
        let snap = self.snapshot();
        if snap.services.catalog().get(&fb.service_id).is_none() {
            return Err(CoreError::UnknownServiceId(fb.service_id.clone()).into());
        }
        self.record(&fb.user, &snap.services, |ts| {
            let e = InteractionEvent::click(fb.user.as_str(), ts, fb.service_id.as_str()).with_language(fb.language);
            match &fb.query {
                Some(q) => e.with_query(q.as_str()),
                None => e,
            }
        })
    }

    pub fn recommend(&self, user: &str, k: Option<usize>) -> Result<Recommendations, ApiError> {
        check_user_id(user)?;
        let k = self.k(k)?;
        let snap = self.snapshot();
        let catalog = snap.services.catalog();
        let recommendations = match self.profile(user) {
            None => Vec::new(),
            Some(p) => {
                let language = p.preferred_language.unwrap_or(snap.ontology.reference_language());
                p.recommend(catalog, k, &self.settings.profile)
                    .into_iter()
                    .filter_map(|id| {
                        let r = catalog.get(&id)?;
                        Some(Recommendation {
                            title: title_in(r, language, snap.ontology.reference_language()),
                            url: r.url.clone(),
                            interest: p.interest(r),
                            id,
                        })
                    })
                    .collect()
            }
        };
        Ok(Recommendations {
            user: user.to_string(),
            recommendations,
        })
    }

    pub fn service(&self, id: &str) -> Result<ServiceRecord, ApiError> {
        self.snapshot()
            .services
            .catalog()
            .get(id)
            .cloned()
            .ok_or_else(|| CoreError::UnknownServiceId(id.to_string()).into())
    }

    /// Applies a catalog mutation to a copy of the current snapshot and
    /// publishes the copy. Writers are serialized; readers are never blocked
    /// for longer than the pointer swap.
    fn mutate<T>(&self, f: impl FnOnce(&mut IndexedCatalog) -> Result<T, CoreError>) -> Result<T, ApiError> {
        let _writer = lock(&self.writer);
        let current = self.snapshot();
        let mut next = current.services.clone();
        let out = f(&mut next)?;
        if let Some(path) = &self.catalog_file {
            let tmp = path.with_extension("json.tmp");
            std::fs::write(&tmp, next.catalog().to_json())
                .and_then(|_| std::fs::rename(&tmp, path))
                .map_err(|e| ApiError::internal(format!("{}: {e}", path.display())))?;
        }
        let published = Arc::new(Snapshot {
            ontology: current.ontology.clone(),
            services: next,
        });
        *self.snapshot.write().unwrap_or_else(|e| e.into_inner()) = published;
        Ok(out)
    }

    pub fn put_service(&self, id: &str, record: ServiceRecord) -> Result<Upsert, ApiError> {
        if record.id != id {
            return Err(ApiError::bad_request(format!(
                "record id {:?} does not match the path id {id:?}",
                record.id
            )));
        }
        self.mutate(|s| s.upsert(record))
    }

    pub fn create_service(&self, record: ServiceRecord) -> Result<(), ApiError> {
        self.mutate(|s| s.create(record))
    }

    pub fn delete_service(&self, id: &str) -> Result<ServiceRecord, ApiError> {
        self.mutate(|s| s.remove(id))
    }

    pub fn expand(&self, term: &str, lang: Option<LanguageCode>) -> Result<ExpandResponse, ApiError> {
        let snap = self.snapshot();
        let o = &snap.ontology;
        let term = term.trim();
        let language = match lang {
            Some(l) => l,
            None => o.analyzer().detect_language(term)?,
        };
        let mut matches = Vec::new();
        for id in o.lookup_surface(term, language) {
            let Some(seed) = o.expression(&id) else { continue };
            let expansions = o
                .expand(&id, &self.settings.expansion)?
                .into_iter()
                .skip(1)
                .filter_map(|x| {
                    let e = o.expression(&x.expression)?;
                    Some(ExpandedTerm {
                        expression: x.expression,
                        lemma: e.lemma.clone(),
                        language: e.language,
                        weight: x.weight,
                        provenance: x.provenance,
                    })
                })
                .collect();
            matches.push(ExpandMatch {
                expression: id.clone(),
                lemma: seed.lemma.clone(),
                expansions,
            });
        }
        Ok(ExpandResponse {
            term: term.to_string(),
            language,
            matches,
        })
    }
}
