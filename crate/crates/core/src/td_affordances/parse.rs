use std::collections::BTreeSet;

use chrono::{DateTime, Utc};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use url::Url;
use uuid::Uuid;

use super::model::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationCode {
    JsonSyntax,
    NotAnObject,
    MissingTitle,
    InvalidType,
    MissingId,
    MissingContext,
    MissingForms,
    MissingHref,
    UnknownOp,
    UnknownDataType,
    ReadWriteConflict,
    RangeInverted,
    UnresolvableHref,
    TooLarge,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::JsonSyntax => "json_syntax",
            ViolationCode::NotAnObject => "not_an_object",
            ViolationCode::MissingTitle => "missing_title",
            ViolationCode::InvalidType => "invalid_type",
            ViolationCode::MissingId => "missing_id",
            ViolationCode::MissingContext => "missing_context",
            ViolationCode::MissingForms => "missing_forms",
            ViolationCode::MissingHref => "missing_href",
            ViolationCode::UnknownOp => "unknown_op",
            ViolationCode::UnknownDataType => "unknown_data_type",
            ViolationCode::ReadWriteConflict => "read_write_conflict",
            ViolationCode::RangeInverted => "range_inverted",
            ViolationCode::UnresolvableHref => "unresolvable_href",
            ViolationCode::TooLarge => "too_large",
        }
    }
}

/// One finding about a Thing Description. `path` is a JSON pointer into the
/// input document; problems about an absent member point at its parent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TdViolation {
    pub path: String,
    pub severity: Severity,
    pub code: ViolationCode,
    pub message: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Strict,
    #[default]
    Lenient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TdLimits {
    pub max_bytes: usize,
    pub max_affordances: usize,
}

impl Default for TdLimits {
    fn default() -> Self {
        TdLimits {
            max_bytes: 1 << 20,
            max_affordances: 512,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    pub mode: Mode,
    pub limits: TdLimits,
    /// Where the document came from; relative hrefs resolve against it when
    /// the document has no `base`.
    pub fetched_from: Option<Url>,
    pub fetched_at: Option<DateTime<Utc>>,
}

impl ParseOptions {
    pub fn new(mode: Mode) -> Self {
        ParseOptions {
            mode,
            ..Default::default()
        }
    }

    pub fn fetched(mut self, from: Url, at: DateTime<Utc>) -> Self {
        self.fetched_from = Some(from);
        self.fetched_at = Some(at);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTd {
    pub catalog: AffordanceCatalog,
    /// Warnings, including any repairs made in lenient mode.
    pub warnings: Vec<TdViolation>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TdError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid Thing Description ({} error(s))", .violations.iter().filter(|v| v.severity == Severity::Error).count())]
    Invalid { violations: Vec<TdViolation> },
}

impl TdError {
    pub fn violations(&self) -> Vec<TdViolation> {
        match self {
            TdError::Json { line, column, message } => vec![json_violation(*line, *column, message)],
            TdError::Invalid { violations } => violations.clone(),
        }
    }
}

fn json_violation(line: usize, column: usize, message: &str) -> TdViolation {
    TdViolation {
        path: String::new(),
        severity: Severity::Error,
        code: ViolationCode::JsonSyntax,
        message: format!("line {line}, column {column}: {message}"),
    }
}

/// Parses leniently: repairable problems become warnings.
pub fn parse_td(document: &str) -> Result<ParsedTd, TdError> {
    parse_td_with(document, &ParseOptions::default())
}

pub fn parse_td_with(document: &str, opts: &ParseOptions) -> Result<ParsedTd, TdError> {
    let (violations, catalog) = analyze(document, opts)?;
    if violations.iter().any(|v| v.severity == Severity::Error) {
        return Err(TdError::Invalid { violations });
    }
    Ok(ParsedTd {
        catalog: catalog.expect("no errors implies a catalog"),
        warnings: violations,
    })
}

/// Every violation in document order. Never fails.
pub fn validate_td(document: &str, mode: Mode) -> Vec<TdViolation> {
    validate_td_with(document, &ParseOptions::new(mode))
}

pub fn validate_td_with(document: &str, opts: &ParseOptions) -> Vec<TdViolation> {
    match analyze(document, opts) {
        Ok((v, _)) => v,
        Err(e) => e.violations(),
    }
}

/// Escapes one reference token of a JSON pointer.
pub fn pointer_token(s: &str) -> String {
    s.replace('~', "~0").replace('/', "~1")
}

struct Analyzer<'a> {
    opts: &'a ParseOptions,
    declared_base: Option<Url>,
    /// `declared_base`, else `fetched_from`.
    base: Option<Url>,
    out: Vec<TdViolation>,
}

impl Analyzer<'_> {
    fn fatal(&mut self, path: &str, code: ViolationCode, message: impl Into<String>) {
        self.push(path, Severity::Error, code, message);
    }

    fn repairable(&mut self, path: &str, code: ViolationCode, message: impl Into<String>) {
        let sev = match self.opts.mode {
            Mode::Strict => Severity::Error,
            Mode::Lenient => Severity::Warning,
        };
        self.push(path, sev, code, message);
    }

    fn warn(&mut self, path: &str, code: ViolationCode, message: impl Into<String>) {
        self.push(path, Severity::Warning, code, message);
    }

    fn push(&mut self, path: &str, severity: Severity, code: ViolationCode, message: impl Into<String>) {
        self.out.push(TdViolation {
            path: path.to_string(),
            severity,
            code,
            message: message.into(),
        });
    }
}

fn analyze(document: &str, opts: &ParseOptions) -> Result<(Vec<TdViolation>, Option<AffordanceCatalog>), TdError> {
    let mut a = Analyzer {
        opts,
        declared_base: None,
        base: None,
        out: Vec::new(),
    };
    if document.len() > opts.limits.max_bytes {
        a.fatal(
            "",
            ViolationCode::TooLarge,
            format!(
                "document is {} bytes, limit is {}",
                document.len(),
                opts.limits.max_bytes
            ),
        );
        return Ok((a.out, None));
    }
    let value: Value = serde_json::from_str(document).map_err(|e| TdError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let Value::Object(root) = &value else {
        a.fatal(
            "",
            ViolationCode::NotAnObject,
            "a Thing Description must be a JSON object",
        );
        return Ok((a.out, None));
    };

    let count: usize = ["properties", "actions", "events"]
        .iter()
        .filter_map(|k| root.get(*k).and_then(Value::as_object))
        .map(Map::len)
        .sum();
    if count > opts.limits.max_affordances {
        a.fatal(
            "",
            ViolationCode::TooLarge,
            format!("{count} affordances, limit is {}", opts.limits.max_affordances),
        );
        return Ok((a.out, None));
    }

    if !root.contains_key("title") {
        a.fatal("", ViolationCode::MissingTitle, "missing required member `title`");
    }
    if !root.contains_key("id") {
        a.warn(
            "",
            ViolationCode::MissingId,
            "no `id`; a urn:uuid identifier is synthesized",
        );
    }
    if opts.mode == Mode::Strict && !root.contains_key("@context") {
        a.warn("", ViolationCode::MissingContext, "no `@context`");
    }

    let base = match root.get("base") {
        Some(Value::String(s)) => match Url::parse(s) {
            Ok(u) => Some(u),
            Err(_) => {
                a.fatal("/base", ViolationCode::InvalidType, "`base` must be an absolute URI");
                None
            }
        },
        Some(_) => {
            a.fatal("/base", ViolationCode::InvalidType, "`base` must be a string");
            None
        }
        None => None,
    };
    a.declared_base = base.clone();
    a.base = base.clone().or_else(|| opts.fetched_from.clone());

    let mut title = None;
    let mut thing_id = None;
    let mut properties = IndexMap::new();
    let mut actions = IndexMap::new();
    let mut events = IndexMap::new();
    for (key, v) in root {
        let path = format!("/{}", pointer_token(key));
        match key.as_str() {
            "title" => match v.as_str() {
                Some(s) => title = Some(s.to_string()),
                None => a.fatal(&path, ViolationCode::InvalidType, "`title` must be a string"),
            },
            "id" => match v.as_str() {
                Some(s) => thing_id = Some(s.to_string()),
                None => a.fatal(&path, ViolationCode::InvalidType, "`id` must be a string"),
            },
            "properties" => {
                for (name, aff, p) in affordance_map(&mut a, v, &path) {
                    if let Some(prop) = property(&mut a, name, aff, &p) {
                        properties.insert(name.to_string(), prop);
                    }
                }
            }
            "actions" => {
                for (name, aff, p) in affordance_map(&mut a, v, &path) {
                    if let Some(act) = action(&mut a, name, aff, &p) {
                        actions.insert(name.to_string(), act);
                    }
                }
            }
            "events" => {
                for (name, aff, p) in affordance_map(&mut a, v, &path) {
                    if let Some(ev) = event(&mut a, name, aff, &p) {
                        events.insert(name.to_string(), ev);
                    }
                }
            }
            _ => {}
        }
    }

    let catalog = title.map(|title| AffordanceCatalog {
        thing_id: thing_id.unwrap_or_else(|| synthesized_id(document)),
        title,
        base: base.map(String::from),
        properties,
        actions,
        events,
        context: root.get("@context").cloned(),
        security: root.get("security").cloned(),
        security_definitions: root.get("securityDefinitions").cloned(),
        fetched_from: opts.fetched_from.as_ref().map(|u| u.to_string()),
        fetched_at: opts.fetched_at,
    });
    Ok((a.out, catalog))
}

fn synthesized_id(document: &str) -> String {
    format!("urn:uuid:{}", Uuid::new_v5(&Uuid::NAMESPACE_URL, document.as_bytes()))
}

fn affordance_map<'v>(
    a: &mut Analyzer<'_>,
    v: &'v Value,
    path: &str,
) -> Vec<(&'v str, &'v Map<String, Value>, String)> {
    let Some(map) = v.as_object() else {
        a.fatal(path, ViolationCode::InvalidType, "affordance map must be an object");
        return Vec::new();
    };
    let mut out = Vec::new();
    for (name, aff) in map {
        let p = format!("{path}/{}", pointer_token(name));
        match aff.as_object() {
            Some(obj) => out.push((name.as_str(), obj, p)),
            None => a.fatal(&p, ViolationCode::InvalidType, "affordance must be an object"),
        }
    }
    out
}

fn opt_string(obj: &Map<String, Value>, key: &str) -> Option<String> {
    obj.get(key).and_then(Value::as_str).map(str::to_string)
}

fn flag(a: &mut Analyzer<'_>, obj: &Map<String, Value>, key: &str, path: &str) -> bool {
    match obj.get(key) {
        None => false,
        Some(Value::Bool(b)) => *b,
        Some(_) => {
            a.fatal(
                &format!("{path}/{key}"),
                ViolationCode::InvalidType,
                format!("`{key}` must be a boolean"),
            );
            false
        }
    }
}

fn property(a: &mut Analyzer<'_>, name: &str, obj: &Map<String, Value>, path: &str) -> Option<PropertyAffordance> {
    let read_only = flag(a, obj, "readOnly", path);
    let mut write_only = flag(a, obj, "writeOnly", path);
    if read_only && write_only {
        a.repairable(
            path,
            ViolationCode::ReadWriteConflict,
            "both `readOnly` and `writeOnly` are set; `writeOnly` is ignored",
        );
        write_only = false;
    }
    let data_schema = schema(a, obj, path);
    let defaults: BTreeSet<OpVerb> = if read_only {
        [OpVerb::ReadProperty].into()
    } else if write_only {
        [OpVerb::WriteProperty].into()
    } else {
        [OpVerb::ReadProperty, OpVerb::WriteProperty].into()
    };
    let forms = forms(a, obj, path, &defaults)?;
    Some(PropertyAffordance {
        name: name.to_string(),
        title: opt_string(obj, "title"),
        data_schema,
        read_only,
        write_only,
        forms,
    })
}

fn action(a: &mut Analyzer<'_>, name: &str, obj: &Map<String, Value>, path: &str) -> Option<ActionAffordance> {
    let input_schema = sub_schema(a, obj, "input", path);
    let output_schema = sub_schema(a, obj, "output", path);
    let forms = forms(a, obj, path, &[OpVerb::InvokeAction].into())?;
    Some(ActionAffordance {
        name: name.to_string(),
        title: opt_string(obj, "title"),
        input_schema,
        output_schema,
        forms,
    })
}

fn event(a: &mut Analyzer<'_>, name: &str, obj: &Map<String, Value>, path: &str) -> Option<EventAffordance> {
    let data_schema = sub_schema(a, obj, "data", path);
    let forms = forms(a, obj, path, &[OpVerb::SubscribeEvent].into())?;
    Some(EventAffordance {
        name: name.to_string(),
        title: opt_string(obj, "title"),
        data_schema,
        forms,
    })
}

fn sub_schema(a: &mut Analyzer<'_>, obj: &Map<String, Value>, key: &str, path: &str) -> Option<DataSchema> {
    let p = format!("{path}/{key}");
    match obj.get(key)? {
        Value::Object(s) => Some(schema(a, s, &p)),
        _ => {
            a.fatal(
                &p,
                ViolationCode::InvalidType,
                format!("`{key}` must be a data schema object"),
            );
            None
        }
    }
}

fn schema(a: &mut Analyzer<'_>, obj: &Map<String, Value>, path: &str) -> DataSchema {
    let json_type = match obj.get("type") {
        None => None,
        Some(Value::String(t)) => match JsonType::parse(t) {
            Some(t) => Some(t),
            None => {
                a.repairable(
                    &format!("{path}/type"),
                    ViolationCode::UnknownDataType,
                    format!("unknown data type `{t}`; treated as untyped"),
                );
                None
            }
        },
        Some(_) => {
            a.fatal(
                &format!("{path}/type"),
                ViolationCode::InvalidType,
                "`type` must be a string",
            );
            None
        }
    };
    let mut minimum = obj.get("minimum").and_then(Value::as_f64);
    let mut maximum = obj.get("maximum").and_then(Value::as_f64);
    if let (Some(lo), Some(hi)) = (minimum, maximum) {
        if lo > hi {
            a.repairable(
                path,
                ViolationCode::RangeInverted,
                format!("`minimum` {lo} exceeds `maximum` {hi}; both are ignored"),
            );
            minimum = None;
            maximum = None;
        }
    }
    let mut properties = IndexMap::new();
    if let Some(Value::Object(props)) = obj.get("properties") {
        for (name, sub) in props {
            if let Value::Object(sub) = sub {
                let p = format!("{path}/properties/{}", pointer_token(name));
                properties.insert(name.clone(), schema(a, sub, &p));
            }
        }
    }
    DataSchema {
        json_type,
        unit: opt_string(obj, "unit"),
        minimum,
        maximum,
        enum_values: obj.get("enum").and_then(Value::as_array).cloned(),
        properties,
    }
}

fn forms(a: &mut Analyzer<'_>, obj: &Map<String, Value>, path: &str, defaults: &BTreeSet<OpVerb>) -> Option<Vec<Form>> {
    let mut out = Vec::new();
    match obj.get("forms") {
        None => {}
        Some(Value::Array(items)) => {
            for (i, f) in items.iter().enumerate() {
                let p = format!("{path}/forms/{i}");
                match f.as_object() {
                    Some(fo) => {
                        if let Some(form) = form(a, fo, &p, defaults) {
                            out.push(form);
                        }
                    }
                    None => a.repairable(&p, ViolationCode::InvalidType, "form must be an object; dropped"),
                }
            }
        }
        Some(_) => {
            a.fatal(
                &format!("{path}/forms"),
                ViolationCode::InvalidType,
                "`forms` must be an array",
            );
            return None;
        }
    }
    if out.is_empty() {
        match a.declared_base.clone() {
            Some(base) => {
                a.warn(
                    path,
                    ViolationCode::MissingForms,
                    "no usable forms; defaulting to `base`",
                );
                out.push(Form {
                    href: base.to_string(),
                    ops: defaults.clone(),
                    content_type: DEFAULT_CONTENT_TYPE.to_string(),
                    scheme: Some(Scheme::classify(base.scheme())),
                });
            }
            None => {
                a.fatal(
                    path,
                    ViolationCode::MissingForms,
                    "affordance has no usable forms and the document no `base`",
                );
                return None;
            }
        }
    }
    Some(out)
}

fn form(a: &mut Analyzer<'_>, obj: &Map<String, Value>, path: &str, defaults: &BTreeSet<OpVerb>) -> Option<Form> {
    let href = match obj.get("href") {
        Some(Value::String(s)) if !s.is_empty() => s.clone(),
        _ => {
            a.repairable(path, ViolationCode::MissingHref, "form has no `href`; dropped");
            return None;
        }
    };

    let mut ops = BTreeSet::new();
    let mut bad = Vec::new();
    let raw_ops: Vec<&Value> = match obj.get("op") {
        None => Vec::new(),
        Some(Value::Array(items)) => items.iter().collect(),
        Some(v) => vec![v],
    };
    for v in raw_ops {
        match v.as_str().and_then(OpVerb::parse) {
            Some(op) => {
                ops.insert(op);
            }
            None => bad.push(v.to_string()),
        }
    }
    if !bad.is_empty() {
        a.repairable(
            path,
            ViolationCode::UnknownOp,
            format!("unknown operation {}; ignored", bad.join(", ")),
        );
    }
    if ops.is_empty() {
        ops = defaults.clone();
    }

    let scheme = match Url::parse(&href) {
        Ok(u) => Some(Scheme::classify(u.scheme())),
        Err(url::ParseError::RelativeUrlWithoutBase) => match &a.base {
            Some(b) => b.join(&href).ok().map(|u| Scheme::classify(u.scheme())),
            None => {
                a.repairable(
                    path,
                    ViolationCode::UnresolvableHref,
                    format!("relative href `{href}` with no `base` to resolve against"),
                );
                None
            }
        },
        Err(_) => {
            a.repairable(
                path,
                ViolationCode::UnresolvableHref,
                format!("href `{href}` is not a valid URI reference"),
            );
            None
        }
    };

    Some(Form {
        href,
        ops,
        content_type: opt_string(obj, "contentType").unwrap_or_else(|| DEFAULT_CONTENT_TYPE.to_string()),
        scheme,
    })
}
