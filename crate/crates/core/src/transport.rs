//! Blocking HTTP with a timeout and a response size cap on every request.

use std::io::Read;
use std::sync::Mutex;
use std::time::Duration;

use url::Url;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Get,
    Put,
    Post,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Get => "GET",
            Method::Put => "PUT",
            Method::Post => "POST",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HttpLimits {
    pub timeout: Duration,
    pub max_body: usize,
}

impl Default for HttpLimits {
    fn default() -> Self {
        HttpLimits {
            timeout: Duration::from_secs(5),
            max_body: 1 << 20,
        }
    }
}

impl HttpLimits {
    pub fn is_valid(&self) -> bool {
        !self.timeout.is_zero() && self.max_body > 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HttpRequest {
    pub method: Method,
    pub url: Url,
    pub headers: Vec<(String, String)>,
    pub body: Option<Vec<u8>>,
    pub limits: HttpLimits,
}

impl HttpRequest {
    pub fn new(method: Method, url: Url, limits: HttpLimits) -> Self {
        HttpRequest {
            method,
            url,
            headers: Vec::new(),
            body: None,
            limits,
        }
    }

    pub fn header(mut self, name: &str, value: &str) -> Self {
        self.headers.push((name.to_string(), value.to_string()));
        self
    }

    pub fn body(mut self, body: Vec<u8>) -> Self {
        self.body = Some(body);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HttpResponse {
    pub status: u16,
    pub content_type: Option<String>,
    pub body: Vec<u8>,
}

impl HttpResponse {
    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }

    /// The media type without parameters, lowercased.
    pub fn media_type(&self) -> Option<String> {
        self.content_type
            .as_deref()
            .map(|c| c.split(';').next().unwrap_or("").trim().to_ascii_lowercase())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransportError {
    #[error("network error: {0}")]
    Network(String),
    #[error("response body exceeds {limit} bytes")]
    BodyTooLarge { limit: usize },
}

pub trait HttpTransport: Send + Sync {
    fn send(&self, req: &HttpRequest) -> Result<HttpResponse, TransportError>;
}

/// The default transport. Proxies come from the usual environment
/// variables; redirects are not followed, so every request goes to a URL
/// the caller chose.
pub struct UreqTransport {
    agent: ureq::Agent,
}

impl Default for UreqTransport {
    fn default() -> Self {
        let agent = ureq::AgentBuilder::new().try_proxy_from_env(true).redirects(0).build();
        UreqTransport { agent }
    }
}

impl HttpTransport for UreqTransport {
    fn send(&self, req: &HttpRequest) -> Result<HttpResponse, TransportError> {
        let mut r = self
            .agent
            .request_url(req.method.as_str(), &req.url)
            .timeout(req.limits.timeout);
        for (k, v) in &req.headers {
            r = r.set(k, v);
        }
        let result = match &req.body {
            Some(b) => r.send_bytes(b),
            None => r.call(),
        };
        let resp = match result {
            Ok(resp) | Err(ureq::Error::Status(_, resp)) => resp,
            Err(ureq::Error::Transport(t)) => return Err(TransportError::Network(t.to_string())),
        };
        let status = resp.status();
        let content_type = resp.header("content-type").map(str::to_string);
        let limit = req.limits.max_body;
        let mut body = Vec::new();
        resp.into_reader()
            .take(limit as u64 + 1)
            .read_to_end(&mut body)
            .map_err(|e| TransportError::Network(e.to_string()))?;
        if body.len() > limit {
            return Err(TransportError::BodyTooLarge { limit });
        }
        Ok(HttpResponse {
            status,
            content_type,
            body,
        })
    }
}

/// Wraps a transport and remembers every request URL, in order.
pub struct RecordingTransport<T> {
    inner: T,
    seen: Mutex<Vec<(Method, Url)>>,
}

impl<T: HttpTransport> RecordingTransport<T> {
    pub fn new(inner: T) -> Self {
        RecordingTransport {
            inner,
            seen: Mutex::new(Vec::new()),
        }
    }

    pub fn requests(&self) -> Vec<(Method, Url)> {
        self.seen.lock().unwrap().clone()
    }
}

impl<T: HttpTransport> HttpTransport for RecordingTransport<T> {
    fn send(&self, req: &HttpRequest) -> Result<HttpResponse, TransportError> {
        self.seen.lock().unwrap().push((req.method, req.url.clone()));
        self.inner.send(req)
    }
}

impl<T: HttpTransport + ?Sized> HttpTransport for std::sync::Arc<T> {
    fn send(&self, req: &HttpRequest) -> Result<HttpResponse, TransportError> {
        (**self).send(req)
    }
}
