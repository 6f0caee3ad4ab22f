//! Finding Thing Descriptions: directory listings, direct fetches and links
//! on transduced pages.

use std::collections::BTreeSet;
use std::sync::Arc;

use affordance_transducer::dom_transducer::{AffordanceKind, PageAffordanceModel};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use url::Url;

use crate::td_affordances::{Mode, ParseOptions};
use crate::transport::{HttpLimits, HttpRequest, HttpTransport, Method, TransportError, UreqTransport};

pub const TD_ACCEPT: &str = "application/td+json, application/json";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DiscoveryError {
    #[error("network error: {0}")]
    Network(String),
    #[error("protocol error{}: {message}", .status.map(|s| format!(" (HTTP {s})")).unwrap_or_default())]
    Protocol { status: Option<u16>, message: String },
    #[error("response body exceeds {limit} bytes")]
    BodyTooLarge { limit: usize },
    #[error("unsupported URL scheme `{0}`")]
    UnsupportedScheme(String),
    #[error("invalid client configuration: {0}")]
    InvalidConfig(String),
}

impl From<TransportError> for DiscoveryError {
    fn from(e: TransportError) -> Self {
        match e {
            TransportError::Network(m) => DiscoveryError::Network(m),
            TransportError::BodyTooLarge { limit } => DiscoveryError::BodyTooLarge { limit },
        }
    }
}

/// Client for a Thing Description Directory exposing `GET {base}/things`.
#[derive(Clone)]
pub struct DirectoryClient {
    pub base_url: Url,
    pub limits: HttpLimits,
    transport: Arc<dyn HttpTransport>,
}

impl DirectoryClient {
    pub fn new(base_url: Url) -> Self {
        Self::with_transport(base_url, Arc::new(UreqTransport::default()))
    }

    pub fn with_transport(base_url: Url, transport: Arc<dyn HttpTransport>) -> Self {
        DirectoryClient {
            base_url,
            limits: HttpLimits::default(),
            transport,
        }
    }

    pub fn limits(mut self, limits: HttpLimits) -> Self {
        self.limits = limits;
        self
    }

    fn things_url(&self) -> Result<Url, DiscoveryError> {
        let s = format!("{}/things", self.base_url.as_str().trim_end_matches('/'));
        Url::parse(&s).map_err(|e| DiscoveryError::InvalidConfig(e.to_string()))
    }
}

/// Lists the directory. Each element is returned as its original JSON text.
pub fn list_things(client: &DirectoryClient) -> Result<Vec<String>, DiscoveryError> {
    if !client.limits.is_valid() {
        return Err(DiscoveryError::InvalidConfig(
            "timeout and max_body must be positive".into(),
        ));
    }
    let url = client.things_url()?;
    let req = HttpRequest::new(Method::Get, url, client.limits).header("Accept", "application/json");
    let resp = client.transport.send(&req)?;
    if resp.status != 200 {
        return Err(DiscoveryError::Protocol {
            status: Some(resp.status),
            message: "directory listing failed".into(),
        });
    }
    let text = std::str::from_utf8(&resp.body).map_err(|e| DiscoveryError::Protocol {
        status: Some(resp.status),
        message: format!("body is not UTF-8: {e}"),
    })?;
    let items: Vec<Box<RawValue>> = serde_json::from_str(text).map_err(|e| DiscoveryError::Protocol {
        status: Some(resp.status),
        message: format!("expected a JSON array of Thing Descriptions: {e}"),
    })?;
    Ok(items.into_iter().map(|r| r.get().to_string()).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FetchedTd {
    pub text: String,
    pub url: Url,
    pub fetched_at: DateTime<Utc>,
}

impl FetchedTd {
    /// Parse options carrying where and when this document was fetched.
    pub fn parse_options(&self, mode: Mode) -> ParseOptions {
        ParseOptions::new(mode).fetched(self.url.clone(), self.fetched_at)
    }
}

pub fn fetch_td(url: &str, limits: &HttpLimits) -> Result<FetchedTd, DiscoveryError> {
    fetch_td_via(&UreqTransport::default(), url, limits)
}

pub fn fetch_td_via(
    transport: &dyn HttpTransport,
    url: &str,
    limits: &HttpLimits,
) -> Result<FetchedTd, DiscoveryError> {
    if !limits.is_valid() {
        return Err(DiscoveryError::InvalidConfig(
            "timeout and max_body must be positive".into(),
        ));
    }
    let parsed = Url::parse(url).map_err(|e| DiscoveryError::InvalidConfig(format!("`{url}`: {e}")))?;
    if !matches!(parsed.scheme(), "http" | "https") {
        return Err(DiscoveryError::UnsupportedScheme(parsed.scheme().to_string()));
    }
    let req = HttpRequest::new(Method::Get, parsed.clone(), *limits).header("Accept", TD_ACCEPT);
    let resp = transport.send(&req)?;
    if !resp.is_success() {
        return Err(DiscoveryError::Protocol {
            status: Some(resp.status),
            message: format!("fetching {parsed} failed"),
        });
    }
    let text = String::from_utf8(resp.body).map_err(|e| DiscoveryError::Protocol {
        status: Some(resp.status),
        message: format!("body is not UTF-8: {e}"),
    })?;
    Ok(FetchedTd {
        text,
        url: parsed,
        fetched_at: Utc::now(),
    })
}

/// Fetches a web page for transduction; the starting point of discovery.
pub fn fetch_page_via(
    transport: &dyn HttpTransport,
    url: &str,
    limits: &HttpLimits,
) -> Result<Vec<u8>, DiscoveryError> {
    let parsed = Url::parse(url).map_err(|e| DiscoveryError::InvalidConfig(format!("`{url}`: {e}")))?;
    if !matches!(parsed.scheme(), "http" | "https") {
        return Err(DiscoveryError::UnsupportedScheme(parsed.scheme().to_string()));
    }
    let req = HttpRequest::new(Method::Get, parsed.clone(), *limits).header("Accept", "text/html, */*;q=0.1");
    let resp = transport.send(&req)?;
    if !resp.is_success() {
        return Err(DiscoveryError::Protocol {
            status: Some(resp.status),
            message: format!("fetching {parsed} failed"),
        });
    }
    Ok(resp.body)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSource {
    Directory,
    PamLink,
    Manual,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TdCandidate {
    pub url: String,
    pub source: CandidateSource,
    pub label: Option<String>,
}

/// Which page links count as pointers to Thing Descriptions. A link
/// qualifies if any one rule matches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinkRules {
    pub media_types: Vec<String>,
    pub path_suffixes: Vec<String>,
    pub path_segments: Vec<String>,
    pub rels: Vec<String>,
}

impl Default for LinkRules {
    fn default() -> Self {
        LinkRules {
            media_types: vec!["application/td+json".into()],
            path_suffixes: vec![".td.json".into(), ".jsonld".into()],
            path_segments: vec!["/things/".into()],
            rels: vec!["describedby".into()],
        }
    }
}

impl LinkRules {
    fn matches(&self, url: &Url, media_type: Option<&str>, rel: Option<&str>) -> bool {
        let path = url.path();
        media_type.is_some_and(|m| self.media_types.iter().any(|t| m.trim().eq_ignore_ascii_case(t)))
            || self.path_suffixes.iter().any(|s| path.ends_with(s.as_str()))
            || self.path_segments.iter().any(|s| path.contains(s.as_str()))
            || rel.is_some_and(|r| {
                r.split_ascii_whitespace()
                    .any(|tok| self.rels.iter().any(|x| tok.eq_ignore_ascii_case(x)))
            })
    }
}

pub fn find_td_links(pam: &PageAffordanceModel) -> Vec<TdCandidate> {
    find_td_links_with(pam, &LinkRules::default())
}

/// Link affordances that look like Thing Descriptions, resolved against the
/// page URL, in document order, first occurrence of each URL kept.
pub fn find_td_links_with(pam: &PageAffordanceModel, rules: &LinkRules) -> Vec<TdCandidate> {
    let page = pam.source_url.as_deref().and_then(|u| Url::parse(u).ok());
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for a in &pam.affordances {
        if a.kind != AffordanceKind::Link {
            continue;
        }
        let Some(target) = a.target.as_deref() else { continue };
        let url = match &page {
            Some(p) => p.join(target),
            None => Url::parse(target),
        };
        let Ok(url) = url else { continue };
        if !matches!(url.scheme(), "http" | "https") {
            continue;
        }
        if !rules.matches(&url, a.media_type_hint.as_deref(), a.rel.as_deref()) {
            continue;
        }
        if seen.insert(url.to_string()) {
            out.push(TdCandidate {
                url: url.into(),
                source: CandidateSource::PamLink,
                label: Some(a.label.clone()).filter(|l| !l.is_empty()),
            });
        }
    }
    out
}
