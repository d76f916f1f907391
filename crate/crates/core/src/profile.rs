//! User interaction journal, interest weights and recommendations.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, ServiceRecord};
use crate::error::{CoreError, Result};
use crate::lang::LanguageCode;
use crate::ontology::ConceptId;

pub const MAX_USER_ID_LEN: usize = 128;

pub fn check_user_id(user: &str) -> Result<()> {
    let valid = (1..=MAX_USER_ID_LEN).contains(&user.len())
        && user.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-');
    if valid {
        Ok(())
    } else {
        Err(CoreError::InvalidUserId(user.to_string()))
    }
}

mod seconds {
    use chrono::{DateTime, SecondsFormat, SubsecRound, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&t.to_rfc3339_opts(SecondsFormat::Secs, true))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let s = String::deserialize(d)?;
        DateTime::parse_from_rfc3339(&s)
            .map(|t| t.with_timezone(&Utc).trunc_subsecs(0))
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Action {
    Query {
        query: String,
    },
    /// The clicked service's annotations and sector are captured when the
    /// click is recorded, so replay needs no catalog.
    Click {
        service: String,
        #[serde(default)]
        sector: String,
        #[serde(default)]
        concepts: BTreeSet<ConceptId>,
        /// Query the result was clicked from, when known.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        query: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionEvent {
    pub user: String,
    #[serde(with = "seconds")]
    pub timestamp: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<LanguageCode>,
    #[serde(flatten)]
    pub action: Action,
}

impl InteractionEvent {
    pub fn query(user: impl Into<String>, timestamp: DateTime<Utc>, query: impl Into<String>, language: Option<LanguageCode>) -> Self {
        InteractionEvent {
            user: user.into(),
            timestamp: timestamp.trunc_subsecs(0),
            language,
            action: Action::Query { query: query.into() },
        }
    }

    /// A click whose snapshot is filled in by [`UserProfile::record_event`].
    pub fn click(user: impl Into<String>, timestamp: DateTime<Utc>, service: impl Into<String>) -> Self {
        InteractionEvent {
            user: user.into(),
            timestamp: timestamp.trunc_subsecs(0),
            language: None,
            action: Action::Click {
                service: service.into(),
                sector: String::new(),
                concepts: BTreeSet::new(),
                query: None,
            },
        }
    }

    pub fn with_query(mut self, text: impl Into<String>) -> Self {
        if let Action::Click { query, .. } = &mut self.action {
            *query = Some(text.into());
        }
        self
    }

    pub fn with_language(mut self, language: Option<LanguageCode>) -> Self {
        self.language = language;
        self
    }

    pub fn clicked_service(&self) -> Option<&str> {
        match &self.action {
            Action::Click { service, .. } => Some(service),
            Action::Query { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileConfig {
    /// Increment applied to touched interests on a click.
    pub eta: f64,
    /// Factor applied to every untouched interest on a click.
    pub decay: f64,
    pub exclude_clicked: bool,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig {
            eta: 0.1,
            decay: 0.99,
            exclude_clicked: true,
        }
    }
}

impl ProfileConfig {
    pub fn check(&self) -> std::result::Result<(), String> {
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(format!("eta must lie in [0, 1], got {}", self.eta));
        }
        if !(0.0..=1.0).contains(&self.decay) {
            return Err(format!("decay must lie in [0, 1], got {}", self.decay));
        }
        Ok(())
    }
}

/// Weights are kept on a 1e-12 grid so that repeated increments land on exact
/// decimal values and replay is bit-for-bit stable.
fn quantize(w: f64) -> f64 {
    ((w * 1e12).round() / 1e12).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    pub user: String,
    /// Language of the most recent event that carried one.
    pub preferred_language: Option<LanguageCode>,
    pub interests: BTreeMap<ConceptId, f64>,
    pub sector_interests: BTreeMap<String, f64>,
    pub events: Vec<InteractionEvent>,
}

impl UserProfile {
    pub fn new(user: impl Into<String>) -> Result<Self> {
        let user = user.into();
        check_user_id(&user)?;
        Ok(UserProfile {
            user,
            preferred_language: None,
            interests: BTreeMap::new(),
            sector_interests: BTreeMap::new(),
            events: Vec::new(),
        })
    }

    /// Folds an event log from an empty profile.
    pub fn replay(user: &str, events: impl IntoIterator<Item = InteractionEvent>, config: &ProfileConfig) -> Result<Self> {
        let mut profile = UserProfile::new(user)?;
        for e in events {
            profile.apply(e, config)?;
        }
        Ok(profile)
    }

    /// Validates `event` against the catalog, snapshots click targets and folds it in.
    pub fn record_event(&mut self, mut event: InteractionEvent, catalog: &Catalog, config: &ProfileConfig) -> Result<()> {
        if let Action::Click { service, sector, concepts, .. } = &mut event.action {
            let record = catalog
                .get(service)
                .ok_or_else(|| CoreError::UnknownServiceId(service.clone()))?;
            *sector = record.sector.clone();
            *concepts = record.concepts.clone();
        }
        self.apply(event, config)
    }

    fn apply(&mut self, event: InteractionEvent, config: &ProfileConfig) -> Result<()> {
        if event.user != self.user {
            return Err(CoreError::ForeignEvent {
                profile_user: self.user.clone(),
                event_user: event.user,
            });
        }
        if self.events.last().is_some_and(|last| event.timestamp < last.timestamp) {
            return Err(CoreError::NonMonotonicTimestamp { user: self.user.clone() });
        }
        if let Action::Click { sector, concepts, .. } = &event.action {
            for (c, w) in self.interests.iter_mut() {
                if !concepts.contains(c) {
                    *w = quantize(*w * config.decay);
                }
            }
            for (s, w) in self.sector_interests.iter_mut() {
                if s != sector {
                    *w = quantize(*w * config.decay);
                }
            }
            for c in concepts {
                let w = self.interests.entry(c.clone()).or_insert(0.0);
                *w = quantize((*w + config.eta).min(1.0));
            }
            if !sector.is_empty() {
                let w = self.sector_interests.entry(sector.clone()).or_insert(0.0);
                *w = quantize((*w + config.eta).min(1.0));
            }
        }
        if event.language.is_some() {
            self.preferred_language = event.language;
        }
        self.events.push(event);
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn clicked(&self) -> BTreeSet<&str> {
        self.events.iter().filter_map(InteractionEvent::clicked_service).collect()
    }

    /// Highest interest among the record's concepts and its sector.
    pub fn interest(&self, record: &ServiceRecord) -> f64 {
        record
            .concepts
            .iter()
            .filter_map(|c| self.interests.get(c))
            .chain(self.sector_interests.get(&record.sector))
            .fold(0.0, |a, &b| f64::max(a, b))
    }

    /// Services by interest descending, then id; zero-interest services and, by
    /// default, already clicked services are left out.
    pub fn recommend(&self, catalog: &Catalog, k: usize, config: &ProfileConfig) -> Vec<String> {
        let clicked = self.clicked();
        let mut scored: Vec<(f64, &str)> = catalog
            .iter()
            .filter(|r| !(config.exclude_clicked && clicked.contains(r.id.as_str())))
            .map(|r| (self.interest(r), r.id.as_str()))
            .filter(|(w, _)| *w > 0.0)
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        scored.into_iter().take(k).map(|(_, id)| id.to_string()).collect()
    }
}

/// Directory of per-user JSON-lines journals, `<user>.jsonl`.
#[derive(Debug, Clone)]
pub struct ProfileStore {
    dir: PathBuf,
}

impl ProfileStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| CoreError::io(&dir, e))?;
        Ok(ProfileStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn journal_path(&self, user: &str) -> Result<PathBuf> {
        check_user_id(user)?;
        Ok(self.dir.join(format!("{user}.jsonl")))
    }

    pub fn append(&self, event: &InteractionEvent) -> Result<()> {
        let path = self.journal_path(&event.user)?;
        let mut line = serde_json::to_string(event).expect("event serializes");
        line.push('\n');
        fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .and_then(|mut f| f.write_all(line.as_bytes()))
            .map_err(|e| CoreError::io(&path, e))
    }

    /// Replays one user's journal; a missing journal is an empty profile.
    pub fn load(&self, user: &str, config: &ProfileConfig) -> Result<UserProfile> {
        let path = self.journal_path(user)?;
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
            Err(e) => return Err(CoreError::io(&path, e)),
        };
        let mut profile = UserProfile::new(user)?;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let journal_err = |column: usize, message: String| CoreError::Journal {
                path: path.clone(),
                line: i + 1,
                column,
                message,
            };
            let event: InteractionEvent =
                serde_json::from_str(line).map_err(|e| journal_err(e.column(), e.to_string()))?;
            profile.apply(event, config).map_err(|e| journal_err(1, e.to_string()))?;
        }
        Ok(profile)
    }

    pub fn users(&self) -> Result<Vec<String>> {
        let entries = fs::read_dir(&self.dir).map_err(|e| CoreError::io(&self.dir, e))?;
        let mut users = Vec::new();
        for entry in entries {
            let path = entry.map_err(|e| CoreError::io(&self.dir, e))?.path();
            if path.extension().is_some_and(|x| x == "jsonl") {
                if let Some(user) = path.file_stem().and_then(|s| s.to_str()) {
                    if check_user_id(user).is_ok() {
                        users.push(user.to_string());
                    }
                }
            }
        }
        users.sort();
        Ok(users)
    }

    pub fn load_all(&self, config: &ProfileConfig) -> Result<BTreeMap<String, UserProfile>> {
        self.users()?
            .into_iter()
            .map(|u| Ok((u.clone(), self.load(&u, config)?)))
            .collect()
    }

    /// Rewrites the journal of every given profile.
    pub fn save_all<'a>(&self, profiles: impl IntoIterator<Item = &'a UserProfile>) -> Result<()> {
        for p in profiles {
            let path = self.journal_path(&p.user)?;
            let mut text = String::new();
            for e in &p.events {
                text.push_str(&serde_json::to_string(e).expect("event serializes"));
                text.push('\n');
            }
            let tmp = path.with_extension("jsonl.tmp");
            fs::write(&tmp, text).map_err(|e| CoreError::io(&tmp, e))?;
            fs::rename(&tmp, &path).map_err(|e| CoreError::io(&path, e))?;
        }
        Ok(())
    }

    /// Forgets a user by removing their journal.
    pub fn delete(&self, user: &str) -> Result<bool> {
        let path = self.journal_path(user)?;
        match fs::remove_file(&path) {
            Ok(()) => Ok(true),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(false),
            Err(e) => Err(CoreError::io(&path, e)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn t(s: i64) -> DateTime<Utc> {
        Utc.timestamp_opt(1_700_000_000 + s, 0).unwrap()
    }

    fn catalog() -> Catalog {
        let json = serde_json::json!([
            {"id":"a","sector":"customs","administration":"ADII","url":"https://a.ma/","titles":{"fr":"a"},"concepts":["customs:duty_free"]},
            {"id":"b","sector":"customs","administration":"ADII","url":"https://b.ma/","titles":{"fr":"b"},"concepts":["customs:duty_free"]},
            {"id":"c","sector":"tourism","administration":"ONMT","url":"https://c.ma/","titles":{"fr":"c"},"concepts":["tourism:hotel","tourism:visa"]},
        ]);
        Catalog::ingest(&json.to_string()).unwrap()
    }

    fn cid(s: &str) -> ConceptId {
        s.parse().unwrap()
    }

    #[test]
    fn first_click_sets_point_one() {
        let mut p = UserProfile::new("u1").unwrap();
        p.record_event(InteractionEvent::click("u1", t(0), "a"), &catalog(), &ProfileConfig::default())
            .unwrap();
        assert_eq!(p.interests[&cid("customs:duty_free")], 0.1);
        assert_eq!(p.sector_interests["customs"], 0.1);
    }

    #[test]
    fn query_events_only_log() {
        let mut p = UserProfile::new("u1").unwrap();
        let cfg = ProfileConfig::default();
        p.record_event(InteractionEvent::click("u1", t(0), "a"), &catalog(), &cfg).unwrap();
        let before = p.interests.clone();
        p.record_event(InteractionEvent::query("u1", t(1), "visa", Some(LanguageCode::FR)), &catalog(), &cfg)
            .unwrap();
        assert_eq!(p.interests, before);
        assert_eq!(p.events.len(), 2);
        assert_eq!(p.preferred_language, Some(LanguageCode::FR));
    }

    #[test]
    fn ten_clicks_reach_exactly_one() {
        let mut p = UserProfile::new("u1").unwrap();
        for i in 0..10 {
            p.record_event(InteractionEvent::click("u1", t(i), "a"), &catalog(), &ProfileConfig::default())
                .unwrap();
        }
        assert_eq!(p.interests[&cid("customs:duty_free")], 1.0);
        p.record_event(InteractionEvent::click("u1", t(11), "a"), &catalog(), &ProfileConfig::default())
            .unwrap();
        assert_eq!(p.interests[&cid("customs:duty_free")], 1.0);
    }

    #[test]
    fn untouched_keys_decay() {
        let mut p = UserProfile::new("u1").unwrap();
        let cfg = ProfileConfig::default();
        p.record_event(InteractionEvent::click("u1", t(0), "a"), &catalog(), &cfg).unwrap();
        p.record_event(InteractionEvent::click("u1", t(1), "c"), &catalog(), &cfg).unwrap();
        assert_eq!(p.interests[&cid("customs:duty_free")], 0.099);
        assert_eq!(p.sector_interests["customs"], 0.099);
        assert_eq!(p.interests[&cid("tourism:visa")], 0.1);
    }

    #[test]
    fn click_on_unknown_service_and_bad_order() {
        let mut p = UserProfile::new("u1").unwrap();
        let cfg = ProfileConfig::default();
        assert!(matches!(
            p.record_event(InteractionEvent::click("u1", t(0), "zz"), &catalog(), &cfg),
            Err(CoreError::UnknownServiceId(_))
        ));
        p.record_event(InteractionEvent::click("u1", t(5), "a"), &catalog(), &cfg).unwrap();
        assert!(matches!(
            p.record_event(InteractionEvent::click("u1", t(4), "a"), &catalog(), &cfg),
            Err(CoreError::NonMonotonicTimestamp { .. })
        ));
        assert!(matches!(
            p.record_event(InteractionEvent::click("u2", t(6), "a"), &catalog(), &cfg),
            Err(CoreError::ForeignEvent { .. })
        ));
        assert!(p.record_event(InteractionEvent::click("u1", t(5), "b"), &catalog(), &cfg).is_ok());
    }

    #[test]
    fn interest_is_max_over_annotations_and_sector() {
        let cat = catalog();
        let mut p = UserProfile::new("u1").unwrap();
        assert_eq!(p.interest(cat.get("c").unwrap()), 0.0);
        p.interests.insert(cid("tourism:hotel"), 0.2);
        p.interests.insert(cid("tourism:visa"), 0.5);
        assert_eq!(p.interest(cat.get("c").unwrap()), 0.5);
        p.sector_interests.insert("tourism".into(), 0.7);
        assert_eq!(p.interest(cat.get("c").unwrap()), 0.7);
    }

    #[test]
    fn recommendations_skip_clicked() {
        let cat = catalog();
        let cfg = ProfileConfig::default();
        let mut p = UserProfile::new("u1").unwrap();
        assert!(p.recommend(&cat, 5, &cfg).is_empty());
        p.record_event(InteractionEvent::click("u1", t(0), "a"), &cat, &cfg).unwrap();
        assert_eq!(p.recommend(&cat, 5, &cfg), vec!["b"]);
        assert!(p.recommend(&cat, 0, &cfg).is_empty());
        let keep = ProfileConfig { exclude_clicked: false, ..cfg };
        assert_eq!(p.recommend(&cat, 5, &keep), vec!["a", "b"]);
    }

    #[test]
    fn user_ids() {
        assert!(check_user_id("alice_01").is_ok());
        assert!(check_user_id("").is_err());
        assert!(check_user_id("../etc").is_err());
        assert!(check_user_id(&"x".repeat(129)).is_err());
    }

    #[test]
    fn store_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = ProfileStore::open(dir.path()).unwrap();
        let cfg = ProfileConfig::default();
        assert!(store.load_all(&cfg).unwrap().is_empty());

        let cat = catalog();
        let mut p = UserProfile::new("u1").unwrap();
        for e in [
            InteractionEvent::query("u1", t(0), "franchise", Some(LanguageCode::FR)),
            InteractionEvent::click("u1", t(1), "a"),
            InteractionEvent::click("u1", t(2), "c"),
        ] {
            p.record_event(e, &cat, &cfg).unwrap();
        }
        store.save_all([&p]).unwrap();
        let loaded = store.load_all(&cfg).unwrap();
        assert_eq!(loaded.len(), 1);
        assert_eq!(loaded["u1"], p);

        store.append(&InteractionEvent::query("u1", t(3), "visa", None)).unwrap();
        assert_eq!(store.load("u1", &cfg).unwrap().events.len(), 4);
        assert!(store.delete("u1").unwrap());
        assert!(store.load("u1", &cfg).unwrap().is_empty());
    }

    #[test]
    fn corrupted_journal_names_line_and_column() {
        let dir = tempfile::tempdir().unwrap();
        let store = ProfileStore::open(dir.path()).unwrap();
        store.append(&InteractionEvent::query("u1", t(0), "a", None)).unwrap();
        let path = store.journal_path("u1").unwrap();
        let mut text = fs::read_to_string(&path).unwrap();
        text.push_str("{\"user\":\"u1\",\"timestamp\":\n");
        fs::write(&path, text).unwrap();
        match store.load("u1", &ProfileConfig::default()) {
            Err(CoreError::Journal { line, column, path: p, .. }) => {
                assert_eq!(line, 2);
                assert!(column > 0);
                assert_eq!(p, path);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn event_json_shape() {
        let e = InteractionEvent::click("u1", t(0), "a");
        let v = serde_json::to_value(&e).unwrap();
        assert_eq!(v["kind"], "click");
        assert_eq!(v["timestamp"], "2023-11-14T22:13:20Z");
        let back: InteractionEvent = serde_json::from_value(v).unwrap();
        assert_eq!(back, e);
    }
}
