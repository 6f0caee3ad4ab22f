//! The agent's world model: page models and Thing catalogs keyed by origin,
//! with a flat affordance index and JSON persistence.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use affordance_transducer::dom_transducer::{AffordanceKind, PageAffordanceModel};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::td_affordances::{catalog_diff, AffordanceCatalog, ChangeSet, InteractionKind, OpVerb};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, thiserror::Error)]
pub enum MapError {
    #[error("percept has no origin ({0})")]
    MissingOrigin(&'static str),
    #[error("query needs at least one of text, kind or origin")]
    EmptyQuery,
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("map file schema version {found}, expected {expected}")]
    SchemaVersionMismatch { found: u64, expected: u64 },
    #[error("corrupt map file at byte {offset}: {message}")]
    CorruptFile { offset: usize, message: String },
}

/// One structured percept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "model", rename_all = "snake_case")]
#[non_exhaustive]
#[allow(clippy::large_enum_variant)]
pub enum Percept {
    Page(PageAffordanceModel),
    Thing(AffordanceCatalog),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    /// The module that produced the percept.
    pub source: String,
    pub recorded_at: DateTime<Utc>,
}

impl Provenance {
    pub fn now(source: &str) -> Self {
        Provenance {
            source: source.to_string(),
            recorded_at: Utc::now(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapEntry {
    pub origin: String,
    pub percept: Percept,
    pub provenance: Provenance,
    pub revision: u64,
    /// Catalog changes relative to the previous revision.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_diff: Option<ChangeSet>,
}

/// Affordance kinds across both percept types, in index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HitKind {
    Link,
    Button,
    TextInput,
    Select,
    Textarea,
    Form,
    Checkbox,
    Radio,
    Submit,
    Property,
    Action,
    Event,
}

impl HitKind {
    pub const ALL: [HitKind; 12] = [
        HitKind::Link,
        HitKind::Button,
        HitKind::TextInput,
        HitKind::Select,
        HitKind::Textarea,
        HitKind::Form,
        HitKind::Checkbox,
        HitKind::Radio,
        HitKind::Submit,
        HitKind::Property,
        HitKind::Action,
        HitKind::Event,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            HitKind::Property => "property",
            HitKind::Action => "action",
            HitKind::Event => "event",
            other => other.page_kind().map(AffordanceKind::as_str).unwrap_or(""),
        }
    }

    pub fn parse(s: &str) -> Option<HitKind> {
        HitKind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    fn page_kind(self) -> Option<AffordanceKind> {
        Some(match self {
            HitKind::Link => AffordanceKind::Link,
            HitKind::Button => AffordanceKind::Button,
            HitKind::TextInput => AffordanceKind::TextInput,
            HitKind::Select => AffordanceKind::Select,
            HitKind::Textarea => AffordanceKind::Textarea,
            HitKind::Form => AffordanceKind::Form,
            HitKind::Checkbox => AffordanceKind::Checkbox,
            HitKind::Radio => AffordanceKind::Radio,
            HitKind::Submit => AffordanceKind::Submit,
            _ => return None,
        })
    }
}

impl From<AffordanceKind> for HitKind {
    fn from(k: AffordanceKind) -> Self {
        match k {
            AffordanceKind::Link => HitKind::Link,
            AffordanceKind::Button => HitKind::Button,
            AffordanceKind::TextInput => HitKind::TextInput,
            AffordanceKind::Select => HitKind::Select,
            AffordanceKind::Textarea => HitKind::Textarea,
            AffordanceKind::Form => HitKind::Form,
            AffordanceKind::Checkbox => HitKind::Checkbox,
            AffordanceKind::Radio => HitKind::Radio,
            AffordanceKind::Submit => HitKind::Submit,
        }
    }
}

impl From<InteractionKind> for HitKind {
    fn from(k: InteractionKind) -> Self {
        match k {
            InteractionKind::Property => HitKind::Property,
            InteractionKind::Action => HitKind::Action,
            InteractionKind::Event => HitKind::Event,
        }
    }
}

impl fmt::Display for HitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What an agent can do with an affordance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Capability {
    Navigate,
    Activate,
    Input,
    Submit,
    Read,
    Write,
    ReadWrite,
    Observe,
    Invoke,
    Subscribe,
}

fn page_capability(k: AffordanceKind) -> Capability {
    match k {
        AffordanceKind::Link => Capability::Navigate,
        AffordanceKind::Button => Capability::Activate,
        AffordanceKind::Form | AffordanceKind::Submit => Capability::Submit,
        AffordanceKind::TextInput
        | AffordanceKind::Select
        | AffordanceKind::Textarea
        | AffordanceKind::Checkbox
        | AffordanceKind::Radio => Capability::Input,
    }
}

fn property_capability(c: &AffordanceCatalog, name: &str) -> Capability {
    let forms = c.forms_of(InteractionKind::Property, name).unwrap_or(&[]);
    let has = |op| forms.iter().any(|f| f.ops.contains(&op));
    match (has(OpVerb::ReadProperty), has(OpVerb::WriteProperty)) {
        (true, true) => Capability::ReadWrite,
        (true, false) => Capability::Read,
        (false, true) => Capability::Write,
        (false, false) => Capability::Observe,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IndexEntry {
    pub origin: String,
    pub kind: HitKind,
    /// Affordance name for Things, label for page elements.
    pub name: String,
    pub capability: Capability,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffordanceQuery {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<HitKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<String>,
}

impl AffordanceQuery {
    pub fn text(t: &str) -> Self {
        AffordanceQuery {
            text: Some(t.to_string()),
            ..Default::default()
        }
    }

    pub fn kind(k: HitKind) -> Self {
        AffordanceQuery {
            kind: Some(k),
            ..Default::default()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.text.is_none() && self.kind.is_none() && self.origin.is_none()
    }

    pub fn matches(&self, e: &IndexEntry) -> bool {
        self.kind.is_none_or(|k| k == e.kind)
            && self.origin.as_deref().is_none_or(|o| o == e.origin)
            && self
                .text
                .as_deref()
                .is_none_or(|t| e.name.to_lowercase().contains(&t.to_lowercase()))
    }
}

/// The flattened index contribution of one entry, unsorted.
pub fn index_of(entry: &MapEntry) -> Vec<IndexEntry> {
    let origin = &entry.origin;
    match &entry.percept {
        Percept::Page(pam) => pam
            .affordances
            .iter()
            .map(|a| IndexEntry {
                origin: origin.clone(),
                kind: a.kind.into(),
                name: a.label.clone(),
                capability: page_capability(a.kind),
            })
            .collect(),
        Percept::Thing(c) => c
            .names()
            .into_iter()
            .map(|(kind, name, _)| IndexEntry {
                origin: origin.clone(),
                kind: kind.into(),
                name: name.to_string(),
                capability: match kind {
                    InteractionKind::Property => property_capability(c, name),
                    InteractionKind::Action => Capability::Invoke,
                    InteractionKind::Event => Capability::Subscribe,
                },
            })
            .collect(),
    }
}

#[derive(Serialize, Deserialize)]
struct MapFile {
    schema_version: u64,
    version: u64,
    entries: BTreeMap<String, MapEntry>,
}

/// Mutations need `&mut`; queries may share `&`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CognitiveMap {
    entries: BTreeMap<String, MapEntry>,
    index: Vec<IndexEntry>,
    version: u64,
}

impl CognitiveMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn entries(&self) -> &BTreeMap<String, MapEntry> {
        &self.entries
    }

    pub fn get(&self, origin: &str) -> Option<&MapEntry> {
        self.entries.get(origin)
    }

    /// The catalog stored under `thing_id`, if that origin holds one.
    pub fn catalog(&self, thing_id: &str) -> Option<&AffordanceCatalog> {
        match &self.entries.get(thing_id)?.percept {
            Percept::Thing(c) => Some(c),
            _ => None,
        }
    }

    pub fn index(&self) -> &[IndexEntry] {
        &self.index
    }

    /// The index computed from scratch.
    pub fn rebuild_index(&self) -> Vec<IndexEntry> {
        let mut idx: Vec<_> = self.entries.values().flat_map(index_of).collect();
        idx.sort();
        idx
    }

    pub fn upsert_pam(&mut self, pam: PageAffordanceModel) -> Result<u64, MapError> {
        self.upsert_pam_with(pam, Provenance::now("dom_transducer"))
    }

    pub fn upsert_pam_with(&mut self, pam: PageAffordanceModel, provenance: Provenance) -> Result<u64, MapError> {
        let origin = pam
            .source_url
            .clone()
            .filter(|u| !u.is_empty())
            .ok_or(MapError::MissingOrigin("page model has no source_url"))?;
        Ok(self.put(origin, Percept::Page(pam), provenance, None))
    }

    pub fn upsert_catalog(&mut self, catalog: AffordanceCatalog) -> Result<u64, MapError> {
        self.upsert_catalog_with(catalog, Provenance::now("td_affordances"))
    }

    pub fn upsert_catalog_with(&mut self, catalog: AffordanceCatalog, provenance: Provenance) -> Result<u64, MapError> {
        if catalog.thing_id.is_empty() {
            return Err(MapError::MissingOrigin("catalog has no thing_id"));
        }
        let origin = catalog.thing_id.clone();
        let empty = AffordanceCatalog {
            properties: Default::default(),
            actions: Default::default(),
            events: Default::default(),
            ..catalog.clone()
        };
        let previous = match self.entries.get(&origin).map(|e| &e.percept) {
            Some(Percept::Thing(old)) => old,
            _ => &empty,
        };
        let diff = catalog_diff(previous, &catalog).expect("same origin means same thing_id");
        Ok(self.put(origin, Percept::Thing(catalog), provenance, Some(diff)))
    }

    fn put(&mut self, origin: String, percept: Percept, provenance: Provenance, last_diff: Option<ChangeSet>) -> u64 {
        let revision = self.entries.get(&origin).map_or(1, |e| e.revision + 1);
        let entry = MapEntry {
            origin: origin.clone(),
            percept,
            provenance,
            revision,
            last_diff,
        };
        self.index.retain(|e| e.origin != origin);
        self.index.extend(index_of(&entry));
        self.index.sort();
        self.entries.insert(origin, entry);
        self.version += 1;
        revision
    }

    /// Hits ordered by origin, kind, then name.
    pub fn query(&self, q: &AffordanceQuery) -> Result<Vec<IndexEntry>, MapError> {
        if q.is_empty() {
            return Err(MapError::EmptyQuery);
        }
        Ok(self.index.iter().filter(|e| q.matches(e)).cloned().collect())
    }

    pub fn to_json(&self) -> String {
        let file = MapFile {
            schema_version: SCHEMA_VERSION,
            version: self.version,
            entries: self.entries.clone(),
        };
        serde_json::to_string_pretty(&file).expect("map serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, MapError> {
        let header: Value = serde_json::from_str(text).map_err(|e| corrupt(text, &e))?;
        let found = header
            .get("schema_version")
            .and_then(Value::as_u64)
            .ok_or_else(|| MapError::CorruptFile {
                offset: 0,
                message: "missing schema_version".into(),
            })?;
        if found != SCHEMA_VERSION {
            return Err(MapError::SchemaVersionMismatch {
                found,
                expected: SCHEMA_VERSION,
            });
        }
        let file: MapFile = serde_json::from_str(text).map_err(|e| corrupt(text, &e))?;
        for (k, e) in &file.entries {
            if *k != e.origin {
                return Err(MapError::CorruptFile {
                    offset: 0,
                    message: format!("entry key `{k}` differs from its origin `{}`", e.origin),
                });
            }
        }
        let mut map = CognitiveMap {
            entries: file.entries,
            index: Vec::new(),
            version: file.version,
        };
        map.index = map.rebuild_index();
        Ok(map)
    }

    pub fn persist(&self, path: &Path) -> Result<(), MapError> {
        fs::write(path, self.to_json()).map_err(|source| MapError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, MapError> {
        let bytes = fs::read(path).map_err(|source| MapError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let text = std::str::from_utf8(&bytes).map_err(|e| MapError::CorruptFile {
            offset: e.valid_up_to(),
            message: "not UTF-8".into(),
        })?;
        Self::from_json(text)
    }
}

fn corrupt(text: &str, e: &serde_json::Error) -> MapError {
    MapError::CorruptFile {
        offset: byte_offset(text, e.line(), e.column()),
        message: e.to_string(),
    }
}

/// serde_json reports 1-based lines and columns counted in bytes.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let start: usize = text
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum();
    (start + column.saturating_sub(1)).min(text.len())
}
