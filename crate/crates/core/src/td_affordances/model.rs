use std::collections::BTreeSet;
use std::fmt;

use chrono::{DateTime, Utc};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const DEFAULT_CONTENT_TYPE: &str = "application/json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JsonType {
    Null,
    Boolean,
    Integer,
    Number,
    String,
    Object,
    Array,
}

impl JsonType {
    pub fn parse(s: &str) -> Option<JsonType> {
        Some(match s {
            "null" => JsonType::Null,
            "boolean" => JsonType::Boolean,
            "integer" => JsonType::Integer,
            "number" => JsonType::Number,
            "string" => JsonType::String,
            "object" => JsonType::Object,
            "array" => JsonType::Array,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            JsonType::Null => "null",
            JsonType::Boolean => "boolean",
            JsonType::Integer => "integer",
            JsonType::Number => "number",
            JsonType::String => "string",
            JsonType::Object => "object",
            JsonType::Array => "array",
        }
    }

    /// The type of a JSON value. Whole numbers report `integer`.
    pub fn of(v: &Value) -> JsonType {
        match v {
            Value::Null => JsonType::Null,
            Value::Bool(_) => JsonType::Boolean,
            Value::Number(n) if n.is_i64() || n.is_u64() => JsonType::Integer,
            Value::Number(n) if n.as_f64().is_some_and(|f| f.fract() == 0.0) => JsonType::Integer,
            Value::Number(_) => JsonType::Number,
            Value::String(_) => JsonType::String,
            Value::Array(_) => JsonType::Array,
            Value::Object(_) => JsonType::Object,
        }
    }

    /// Whether a value of type `observed` is acceptable where `self` is expected.
    pub fn accepts(self, observed: JsonType) -> bool {
        self == observed || (self == JsonType::Number && observed == JsonType::Integer)
    }
}

impl fmt::Display for JsonType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Value typing for properties, action inputs and outputs, and event data.
/// `json_type` is `None` when the description leaves the type open.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DataSchema {
    pub json_type: Option<JsonType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minimum: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maximum: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enum_values: Option<Vec<Value>>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub properties: IndexMap<String, DataSchema>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpVerb {
    ReadProperty,
    WriteProperty,
    ObserveProperty,
    InvokeAction,
    SubscribeEvent,
    UnsubscribeEvent,
}

impl OpVerb {
    pub const ALL: [OpVerb; 6] = [
        OpVerb::ReadProperty,
        OpVerb::WriteProperty,
        OpVerb::ObserveProperty,
        OpVerb::InvokeAction,
        OpVerb::SubscribeEvent,
        OpVerb::UnsubscribeEvent,
    ];

    pub fn parse(s: &str) -> Option<OpVerb> {
        OpVerb::ALL.into_iter().find(|v| v.as_str() == s)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OpVerb::ReadProperty => "readproperty",
            OpVerb::WriteProperty => "writeproperty",
            OpVerb::ObserveProperty => "observeproperty",
            OpVerb::InvokeAction => "invokeaction",
            OpVerb::SubscribeEvent => "subscribeevent",
            OpVerb::UnsubscribeEvent => "unsubscribeevent",
        }
    }
}

impl fmt::Display for OpVerb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Http,
    Https,
    Mqtt,
    Other,
}

impl Scheme {
    pub fn classify(scheme: &str) -> Scheme {
        match scheme.to_ascii_lowercase().as_str() {
            "http" => Scheme::Http,
            "https" => Scheme::Https,
            "mqtt" | "mqtts" => Scheme::Mqtt,
            _ => Scheme::Other,
        }
    }

    pub fn is_http(self) -> bool {
        matches!(self, Scheme::Http | Scheme::Https)
    }
}

/// A protocol binding: where and how to perform some operations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Form {
    pub href: String,
    pub ops: BTreeSet<OpVerb>,
    pub content_type: String,
    /// Set once `href` is known to resolve to an absolute URI.
    pub scheme: Option<Scheme>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyAffordance {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    pub data_schema: DataSchema,
    pub read_only: bool,
    pub write_only: bool,
    pub forms: Vec<Form>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionAffordance {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    pub input_schema: Option<DataSchema>,
    pub output_schema: Option<DataSchema>,
    pub forms: Vec<Form>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventAffordance {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    pub data_schema: Option<DataSchema>,
    pub forms: Vec<Form>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InteractionKind {
    Property,
    Action,
    Event,
}

impl InteractionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InteractionKind::Property => "property",
            InteractionKind::Action => "action",
            InteractionKind::Event => "event",
        }
    }
}

impl fmt::Display for InteractionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything a Thing Description says a Thing can do.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffordanceCatalog {
    pub thing_id: String,
    pub title: String,
    pub base: Option<String>,
    pub properties: IndexMap<String, PropertyAffordance>,
    pub actions: IndexMap<String, ActionAffordance>,
    pub events: IndexMap<String, EventAffordance>,
    /// `@context`, kept as written.
    pub context: Option<Value>,
    /// `security` and `securityDefinitions`, kept as written and not enforced.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub security: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub security_definitions: Option<Value>,
    pub fetched_from: Option<String>,
    pub fetched_at: Option<DateTime<Utc>>,
}

impl AffordanceCatalog {
    pub fn forms_of(&self, kind: InteractionKind, name: &str) -> Option<&[Form]> {
        match kind {
            InteractionKind::Property => self.properties.get(name).map(|p| p.forms.as_slice()),
            InteractionKind::Action => self.actions.get(name).map(|a| a.forms.as_slice()),
            InteractionKind::Event => self.events.get(name).map(|e| e.forms.as_slice()),
        }
    }

    pub fn affordance_count(&self) -> usize {
        self.properties.len() + self.actions.len() + self.events.len()
    }

    /// `(kind, name, title)` for every affordance, properties first, each map
    /// in document order.
    pub fn names(&self) -> Vec<(InteractionKind, &str, Option<&str>)> {
        let p = self
            .properties
            .values()
            .map(|a| (InteractionKind::Property, a.name.as_str(), a.title.as_deref()));
        let a = self
            .actions
            .values()
            .map(|a| (InteractionKind::Action, a.name.as_str(), a.title.as_deref()));
        let e = self
            .events
            .values()
            .map(|a| (InteractionKind::Event, a.name.as_str(), a.title.as_deref()));
        p.chain(a).chain(e).collect()
    }

    /// The URI relative hrefs resolve against: `base`, else where the
    /// document was fetched from.
    pub fn resolution_base(&self) -> Option<&str> {
        self.base.as_deref().or(self.fetched_from.as_deref())
    }
}
