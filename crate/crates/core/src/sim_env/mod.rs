//! Loopback test doubles: a mock HTTP Thing, a Thing Description Directory
//! and a static page server.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use tiny_http::{Header, Method, Request, Response, Server};
use url::Url;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("port {port} unavailable: {message}")]
    PortUnavailable { port: u16, message: String },
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid mock configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockProperty {
    pub initial: Value,
    /// Data schema members as they appear in a Thing Description.
    pub schema: Value,
    #[serde(default)]
    pub read_only: bool,
}

/// What invoking an action does to the Thing's state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Effect {
    Nothing,
    AssignInput { property: String },
    AssignConst { property: String, value: Value },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockAction {
    pub input: Option<Value>,
    pub effect: Effect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockThingConfig {
    pub title: String,
    pub id: Option<String>,
    pub properties: IndexMap<String, MockProperty>,
    pub actions: IndexMap<String, MockAction>,
    /// 0 picks an ephemeral port.
    #[serde(default)]
    pub port: u16,
}

impl MockThingConfig {
    /// A hotel room: `thermostat` starts at 21.0 and `setTemperature`
    /// assigns its input to it.
    pub fn room() -> Self {
        let celsius = json!({"type": "number", "unit": "celsius", "minimum": 5, "maximum": 30});
        MockThingConfig {
            title: "Smart Room Controls".into(),
            id: Some("urn:dev:hotel:room-101".into()),
            properties: IndexMap::from([(
                "thermostat".to_string(),
                MockProperty {
                    initial: json!(21.0),
                    schema: celsius.clone(),
                    read_only: false,
                },
            )]),
            actions: IndexMap::from([(
                "setTemperature".to_string(),
                MockAction {
                    input: Some(celsius),
                    effect: Effect::AssignInput {
                        property: "thermostat".into(),
                    },
                },
            )]),
            port: 0,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for (name, a) in &self.actions {
            let target = match &a.effect {
                Effect::Nothing => continue,
                Effect::AssignInput { property } | Effect::AssignConst { property, .. } => property,
            };
            if !self.properties.contains_key(target) {
                return Err(SimError::InvalidConfig(format!(
                    "action `{name}` assigns unknown property `{target}`"
                )));
            }
        }
        Ok(())
    }

    /// The Thing Description this mock serves, with hrefs relative to `base`.
    pub fn thing_description(&self, base: &Url) -> Value {
        let mut props = Map::new();
        for (name, p) in &self.properties {
            let mut entry = p.schema.as_object().cloned().unwrap_or_default();
            if p.read_only {
                entry.insert("readOnly".into(), json!(true));
            }
            entry.insert(
                "forms".into(),
                json!([{"href": format!("properties/{name}"), "contentType": "application/json"}]),
            );
            props.insert(name.clone(), Value::Object(entry));
        }
        let mut actions = Map::new();
        for (name, a) in &self.actions {
            let mut entry = Map::new();
            if let Some(input) = &a.input {
                entry.insert("input".into(), input.clone());
            }
            entry.insert(
                "forms".into(),
                json!([{"href": format!("actions/{name}"), "contentType": "application/json"}]),
            );
            actions.insert(name.clone(), Value::Object(entry));
        }
        let id = self
            .id
            .clone()
            .unwrap_or_else(|| format!("urn:sim:{}", slug(&self.title)));
        json!({
            "@context": "https://www.w3.org/2022/wot/td/v1.1",
            "id": id,
            "title": self.title,
            "base": base.as_str(),
            "securityDefinitions": {"nosec_sc": {"scheme": "nosec"}},
            "security": "nosec_sc",
            "properties": props,
            "actions": actions,
        })
    }
}

fn slug(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '-'
            }
        })
        .collect()
}

/// A server running on a background thread. Stops when dropped.
pub struct RunningServer {
    pub base_url: Url,
    server: Arc<Server>,
    worker: Option<JoinHandle<()>>,
}

impl RunningServer {
    pub fn url(&self, path: &str) -> Url {
        self.base_url
            .join(path.trim_start_matches('/'))
            .expect("path joins onto base")
    }

    pub fn shutdown(mut self) {
        self.stop();
    }

    fn stop(&mut self) {
        self.server.unblock();
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}

impl Drop for RunningServer {
    fn drop(&mut self) {
        self.stop();
    }
}

fn serve<F>(port: u16, handler: F) -> Result<RunningServer, SimError>
where
    F: Fn(&mut Request) -> Response<std::io::Cursor<Vec<u8>>> + Send + Sync + 'static,
{
    let server = Server::http(("127.0.0.1", port)).map_err(|e| SimError::PortUnavailable {
        port,
        message: e.to_string(),
    })?;
    let addr = server
        .server_addr()
        .to_ip()
        .ok_or_else(|| SimError::InvalidConfig("not an IP listener".into()))?;
    let base_url = Url::parse(&format!("http://{addr}/")).expect("socket address forms a URL");
    let server = Arc::new(server);
    let handler = Arc::new(handler);
    let s = Arc::clone(&server);
    let worker = thread::spawn(move || {
        for mut req in s.incoming_requests() {
            let h = Arc::clone(&handler);
            thread::spawn(move || {
                let resp = h(&mut req);
                let _ = req.respond(resp);
            });
        }
    });
    Ok(RunningServer {
        base_url,
        server,
        worker: Some(worker),
    })
}

type Body = Response<std::io::Cursor<Vec<u8>>>;

fn header(name: &str, value: &str) -> Header {
    Header::from_bytes(name.as_bytes(), value.as_bytes()).expect("static header is valid")
}

fn json_response(status: u16, v: &Value, media_type: &str) -> Body {
    Response::from_data(v.to_string().into_bytes())
        .with_status_code(status)
        .with_header(header("Content-Type", media_type))
}

fn empty(status: u16) -> Body {
    Response::from_data(Vec::new()).with_status_code(status)
}

fn text(status: u16, msg: &str) -> Body {
    Response::from_data(msg.as_bytes().to_vec())
        .with_status_code(status)
        .with_header(header("Content-Type", "text/plain; charset=utf-8"))
}

fn read_json(req: &mut Request) -> Result<Option<Value>, Body> {
    let mut buf = Vec::new();
    req.as_reader()
        .read_to_end(&mut buf)
        .map_err(|e| text(400, &e.to_string()))?;
    if buf.iter().all(u8::is_ascii_whitespace) {
        return Ok(None);
    }
    serde_json::from_slice(&buf)
        .map(Some)
        .map_err(|e| text(400, &e.to_string()))
}

/// A running mock Thing; its state is shared with the serving threads.
pub struct MockThing {
    pub server: RunningServer,
    pub td: Value,
    state: Arc<Mutex<IndexMap<String, Value>>>,
}

impl MockThing {
    pub fn td_url(&self) -> Url {
        self.server.url(".well-known/wot")
    }

    pub fn property(&self, name: &str) -> Option<Value> {
        self.state.lock().unwrap().get(name).cloned()
    }
}

pub fn start_mock_thing(config: MockThingConfig) -> Result<MockThing, SimError> {
    config.validate()?;
    let state: Arc<Mutex<IndexMap<String, Value>>> = Arc::new(Mutex::new(
        config
            .properties
            .iter()
            .map(|(k, p)| (k.clone(), p.initial.clone()))
            .collect(),
    ));
    let td_slot: Arc<Mutex<Value>> = Arc::new(Mutex::new(Value::Null));

    let (st, td, cfg) = (Arc::clone(&state), Arc::clone(&td_slot), config.clone());
    let server = serve(config.port, move |req| {
        let path = req.url().split('?').next().unwrap_or("").to_string();
        let segments: Vec<&str> = path.trim_start_matches('/').split('/').collect();
        match (req.method(), segments.as_slice()) {
            (Method::Get, [".well-known", "wot"]) => json_response(200, &td.lock().unwrap(), "application/td+json"),
            (Method::Get, ["properties", name]) => match st.lock().unwrap().get(*name) {
                Some(v) => json_response(200, v, "application/json"),
                None => text(404, "no such property"),
            },
            (Method::Put, ["properties", name]) => {
                let Some(p) = cfg.properties.get(*name) else {
                    return text(404, "no such property");
                };
                if p.read_only {
                    return text(405, "property is read-only");
                }
                match read_json(req) {
                    Ok(Some(v)) => {
                        st.lock().unwrap().insert(name.to_string(), v);
                        empty(204)
                    }
                    Ok(None) => text(400, "missing body"),
                    Err(resp) => resp,
                }
            }
            (Method::Post, ["actions", name]) => {
                let Some(a) = cfg.actions.get(*name) else {
                    return text(404, "no such action");
                };
                let input = match read_json(req) {
                    Ok(v) => v,
                    Err(resp) => return resp,
                };
                match &a.effect {
                    Effect::Nothing => {}
                    Effect::AssignConst { property, value } => {
                        st.lock().unwrap().insert(property.clone(), value.clone());
                    }
                    Effect::AssignInput { property } => match input {
                        Some(v) => {
                            st.lock().unwrap().insert(property.clone(), v);
                        }
                        None => return text(400, "action needs an input"),
                    },
                }
                empty(204)
            }
            _ => text(404, "not found"),
        }
    })?;
    let description = config.thing_description(&server.base_url);
    *td_slot.lock().unwrap() = description.clone();
    Ok(MockThing {
        server,
        td: description,
        state,
    })
}

/// A Thing Description Directory answering `GET /things`.
pub struct MockDirectory {
    pub server: RunningServer,
    tds: Arc<Mutex<Vec<Value>>>,
    status: Arc<Mutex<u16>>,
}

impl MockDirectory {
    pub fn register(&self, td: Value) {
        self.tds.lock().unwrap().push(td);
    }

    /// Makes the listing answer with `status` (and no body) unless it is 200.
    pub fn set_status(&self, status: u16) {
        *self.status.lock().unwrap() = status;
    }
}

pub fn start_mock_directory(tds: Vec<Value>, port: u16) -> Result<MockDirectory, SimError> {
    let tds = Arc::new(Mutex::new(tds));
    let status = Arc::new(Mutex::new(200u16));
    let (t, s) = (Arc::clone(&tds), Arc::clone(&status));
    let server = serve(port, move |req| {
        let path = req.url().split('?').next().unwrap_or("");
        match (req.method(), path) {
            (Method::Get, "/things") => {
                let code = *s.lock().unwrap();
                if code != 200 {
                    return text(code, "directory unavailable");
                }
                json_response(200, &Value::Array(t.lock().unwrap().clone()), "application/json")
            }
            _ => text(404, "not found"),
        }
    })?;
    Ok(MockDirectory { server, tds, status })
}

#[derive(Debug, Clone, Default)]
pub struct PageServerConfig {
    pub dir: PathBuf,
    /// `{{name}}` in served pages is replaced by the value.
    pub vars: BTreeMap<String, String>,
    pub port: u16,
}

impl PageServerConfig {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        PageServerConfig {
            dir: dir.into(),
            ..Default::default()
        }
    }

    pub fn var(mut self, name: &str, value: &str) -> Self {
        self.vars.insert(name.to_string(), value.to_string());
        self
    }
}

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()) {
        Some("html" | "htm") => "text/html; charset=utf-8",
        Some("json") => "application/json",
        Some("jsonld") => "application/ld+json",
        Some("css") => "text/css",
        Some("txt") => "text/plain; charset=utf-8",
        _ => "application/octet-stream",
    }
}

/// Serves the top level of `config.dir`. Files are read and templated at
/// startup.
pub fn start_page_server(config: PageServerConfig) -> Result<RunningServer, SimError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| SimError::Io { path, source }
    };
    let mut files = BTreeMap::new();
    for entry in fs::read_dir(&config.dir).map_err(io(&config.dir))? {
        let path = entry.map_err(io(&config.dir))?.path();
        if !path.is_file() {
            continue;
        }
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let mut bytes = fs::read(&path).map_err(io(&path))?;
        if content_type(&path).starts_with("text/") {
            let mut s = String::from_utf8_lossy(&bytes).into_owned();
            for (k, v) in &config.vars {
                s = s.replace(&format!("{{{{{k}}}}}"), v);
            }
            bytes = s.into_bytes();
        }
        files.insert(format!("/{name}"), (bytes, content_type(&path)));
    }
    serve(config.port, move |req| {
        let path = req.url().split('?').next().unwrap_or("");
        match (req.method(), files.get(path)) {
            (Method::Get, Some((bytes, ct))) => Response::from_data(bytes.clone())
                .with_status_code(200)
                .with_header(header("Content-Type", ct)),
            _ => text(404, "not found"),
        }
    })
}
