//! Exercising catalog affordances over their HTTP bindings. Every request
//! goes to a URL taken from one of the catalog's forms.

use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize, Serializer};
use serde_json::Value;
use url::Url;

use crate::td_affordances::{AffordanceCatalog, DataSchema, Form, InteractionKind, JsonType, OpVerb, Scheme};
use crate::transport::{HttpLimits, HttpRequest, HttpResponse, HttpTransport, Method, TransportError, UreqTransport};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClientError {
    #[error("no {kind} named `{name}`")]
    NoSuchAffordance { kind: InteractionKind, name: String },
    #[error("no usable binding for `{name}` ({op}): {detail}")]
    NoSupportedBinding { name: String, op: OpVerb, detail: String },
    #[error("schema mismatch: expected {expected}, got {observed}")]
    SchemaMismatch { expected: String, observed: String },
    #[error("property `{0}` is read-only")]
    ReadOnly(String),
    #[error("property `{0}` is write-only")]
    WriteOnly(String),
    #[error("{0} is not supported")]
    UnsupportedOperation(String),
    #[error("network error: {0}")]
    Network(String),
    #[error("protocol error (HTTP {status}): {message}")]
    Protocol { status: u16, message: String },
    #[error("response body exceeds {limit} bytes")]
    BodyTooLarge { limit: usize },
}

impl From<TransportError> for ClientError {
    fn from(e: TransportError) -> Self {
        match e {
            TransportError::Network(m) => ClientError::Network(m),
            TransportError::BodyTooLarge { limit } => ClientError::BodyTooLarge { limit },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionReason {
    FirstSupported,
    OnlyForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BindingSelection {
    pub affordance_name: String,
    /// With `href` resolved to an absolute URI.
    pub chosen_form: Form,
    pub reason: SelectionReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteractionResult {
    pub status: Status,
    pub value: Option<Value>,
    pub media_type: String,
    #[serde(rename = "latency_ms", serialize_with = "millis")]
    pub latency: Duration,
}

fn millis<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1000.0)
}

/// Picks the first form, in document order, that supports `op` over HTTP.
pub fn select_form(
    catalog: &AffordanceCatalog,
    kind: InteractionKind,
    name: &str,
    op: OpVerb,
) -> Result<BindingSelection, ClientError> {
    let forms = catalog
        .forms_of(kind, name)
        .ok_or_else(|| ClientError::NoSuchAffordance {
            kind,
            name: name.to_string(),
        })?;
    let mut seen = Vec::new();
    for form in forms.iter().filter(|f| f.ops.contains(&op)) {
        match catalog.resolve(form) {
            Ok(r) if r.scheme.is_some_and(Scheme::is_http) => {
                return Ok(BindingSelection {
                    affordance_name: name.to_string(),
                    chosen_form: r,
                    reason: if forms.len() == 1 {
                        SelectionReason::OnlyForm
                    } else {
                        SelectionReason::FirstSupported
                    },
                });
            }
            Ok(r) => seen.push(r.href),
            Err(e) => seen.push(e.to_string()),
        }
    }
    Err(ClientError::NoSupportedBinding {
        name: name.to_string(),
        op,
        detail: if seen.is_empty() {
            "no form declares this operation".into()
        } else {
            format!("only non-HTTP forms: {}", seen.join(", "))
        },
    })
}

/// Type-level check of `value` against `schema`: JSON type, enum membership
/// and numeric bounds.
pub fn check_value(schema: &DataSchema, value: &Value) -> Result<(), ClientError> {
    let observed = JsonType::of(value);
    if let Some(t) = schema.json_type {
        if !t.accepts(observed) {
            return Err(ClientError::SchemaMismatch {
                expected: t.to_string(),
                observed: observed.to_string(),
            });
        }
    }
    if let Some(allowed) = &schema.enum_values {
        if !allowed.contains(value) {
            return Err(ClientError::SchemaMismatch {
                expected: format!("one of {}", Value::Array(allowed.clone())),
                observed: value.to_string(),
            });
        }
    }
    if let Some(x) = value.as_f64() {
        if let Some(lo) = schema.minimum.filter(|lo| x < *lo) {
            return Err(ClientError::SchemaMismatch {
                expected: format!("number >= {lo}"),
                observed: value.to_string(),
            });
        }
        if let Some(hi) = schema.maximum.filter(|hi| x > *hi) {
            return Err(ClientError::SchemaMismatch {
                expected: format!("number <= {hi}"),
                observed: value.to_string(),
            });
        }
    }
    Ok(())
}

fn is_json(media_type: &str) -> bool {
    media_type == "application/json" || media_type.ends_with("+json")
}

#[derive(Clone)]
pub struct ProtocolClient {
    transport: Arc<dyn HttpTransport>,
    pub limits: HttpLimits,
}

impl Default for ProtocolClient {
    fn default() -> Self {
        Self::with_transport(Arc::new(UreqTransport::default()))
    }
}

impl ProtocolClient {
    pub fn with_transport(transport: Arc<dyn HttpTransport>) -> Self {
        ProtocolClient {
            transport,
            limits: HttpLimits::default(),
        }
    }

    pub fn read_property(&self, catalog: &AffordanceCatalog, name: &str) -> Result<InteractionResult, ClientError> {
        let prop = catalog
            .properties
            .get(name)
            .ok_or_else(|| ClientError::NoSuchAffordance {
                kind: InteractionKind::Property,
                name: name.to_string(),
            })?;
        if prop.write_only {
            return Err(ClientError::WriteOnly(name.to_string()));
        }
        let sel = select_form(catalog, InteractionKind::Property, name, OpVerb::ReadProperty)?;
        let form = &sel.chosen_form;
        let req = self.request(Method::Get, form).header("Accept", &form.content_type);
        let (resp, latency) = self.send(&req)?;
        let value = decode(&resp, &form.content_type)?;
        match &value {
            Some(v) => check_value(&prop.data_schema, v)?,
            None => {
                return Err(ClientError::SchemaMismatch {
                    expected: prop.data_schema.json_type.map_or("a value".into(), |t| t.to_string()),
                    observed: "empty body".into(),
                })
            }
        }
        Ok(ok(value, &resp, &form.content_type, latency))
    }

    pub fn write_property(
        &self,
        catalog: &AffordanceCatalog,
        name: &str,
        value: &Value,
    ) -> Result<InteractionResult, ClientError> {
        let prop = catalog
            .properties
            .get(name)
            .ok_or_else(|| ClientError::NoSuchAffordance {
                kind: InteractionKind::Property,
                name: name.to_string(),
            })?;
        if prop.read_only {
            return Err(ClientError::ReadOnly(name.to_string()));
        }
        check_value(&prop.data_schema, value)?;
        let sel = select_form(catalog, InteractionKind::Property, name, OpVerb::WriteProperty)?;
        let form = &sel.chosen_form;
        let req = self
            .request(Method::Put, form)
            .header("Content-Type", &form.content_type)
            .body(value.to_string().into_bytes());
        let (resp, latency) = self.send(&req)?;
        let value = decode(&resp, &form.content_type)?;
        Ok(ok(value, &resp, &form.content_type, latency))
    }

    pub fn invoke_action(
        &self,
        catalog: &AffordanceCatalog,
        name: &str,
        input: Option<&Value>,
    ) -> Result<InteractionResult, ClientError> {
        let action = catalog.actions.get(name).ok_or_else(|| ClientError::NoSuchAffordance {
            kind: InteractionKind::Action,
            name: name.to_string(),
        })?;
        if let Some(schema) = &action.input_schema {
            match input {
                Some(v) => check_value(schema, v)?,
                None if schema.json_type.is_some_and(|t| t != JsonType::Null) => {
                    return Err(ClientError::SchemaMismatch {
                        expected: schema.json_type.unwrap().to_string(),
                        observed: "no input".into(),
                    })
                }
                None => {}
            }
        }
        let sel = select_form(catalog, InteractionKind::Action, name, OpVerb::InvokeAction)?;
        let form = &sel.chosen_form;
        let mut req = self.request(Method::Post, form);
        if let Some(v) = input {
            req = req
                .header("Content-Type", &form.content_type)
                .body(v.to_string().into_bytes());
        }
        let (resp, latency) = self.send(&req)?;
        let value = decode(&resp, &form.content_type)?;
        if let (Some(schema), Some(v)) = (&action.output_schema, &value) {
            check_value(schema, v)?;
        }
        Ok(ok(value, &resp, &form.content_type, latency))
    }

    /// Events are recognized and cataloged but have no transport.
    pub fn subscribe_event(&self, _catalog: &AffordanceCatalog, name: &str) -> Result<InteractionResult, ClientError> {
        Err(ClientError::UnsupportedOperation(format!(
            "subscribing to event `{name}`"
        )))
    }

    fn request(&self, method: Method, form: &Form) -> HttpRequest {
        let url = Url::parse(&form.href).expect("selected forms carry absolute hrefs");
        HttpRequest::new(method, url, self.limits)
    }

    fn send(&self, req: &HttpRequest) -> Result<(HttpResponse, Duration), ClientError> {
        let start = Instant::now();
        let resp = self.transport.send(req)?;
        let latency = start.elapsed();
        if !resp.is_success() {
            let message = String::from_utf8_lossy(&resp.body).chars().take(200).collect();
            return Err(ClientError::Protocol {
                status: resp.status,
                message,
            });
        }
        Ok((resp, latency))
    }
}

fn decode(resp: &HttpResponse, declared: &str) -> Result<Option<Value>, ClientError> {
    if resp.body.iter().all(u8::is_ascii_whitespace) {
        return Ok(None);
    }
    let media = resp.media_type().unwrap_or_else(|| declared.to_ascii_lowercase());
    if is_json(&media) {
        serde_json::from_slice(&resp.body)
            .map(Some)
            .map_err(|e| ClientError::Protocol {
                status: resp.status,
                message: format!("invalid JSON body: {e}"),
            })
    } else {
        Ok(Some(Value::String(String::from_utf8_lossy(&resp.body).into_owned())))
    }
}

fn ok(value: Option<Value>, resp: &HttpResponse, declared: &str, latency: Duration) -> InteractionResult {
    InteractionResult {
        status: Status::Ok,
        value,
        media_type: resp.media_type().unwrap_or_else(|| declared.to_string()),
        latency,
    }
}
