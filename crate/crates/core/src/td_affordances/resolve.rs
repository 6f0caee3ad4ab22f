use url::Url;

use super::model::{AffordanceCatalog, Form, Scheme};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot resolve href `{href}`: {reason}")]
pub struct UnresolvableHref {
    pub href: String,
    pub reason: String,
}

/// Resolves `form.href` against `base` (RFC 3986) and classifies its scheme.
/// Absolute hrefs pass through unchanged.
pub fn resolve_form(base: Option<&str>, form: &Form) -> Result<Form, UnresolvableHref> {
    let err = |reason: &str| UnresolvableHref {
        href: form.href.clone(),
        reason: reason.to_string(),
    };
    if form.href.is_empty() {
        return Err(err("empty href"));
    }
    let url = match Url::parse(&form.href) {
        Ok(u) => u,
        Err(url::ParseError::RelativeUrlWithoutBase) => {
            let base = base.ok_or_else(|| err("relative href and no base"))?;
            let base = Url::parse(base).map_err(|e| err(&format!("bad base `{base}`: {e}")))?;
            base.join(&form.href).map_err(|e| err(&e.to_string()))?
        }
        Err(e) => return Err(err(&e.to_string())),
    };
    let mut out = form.clone();
    out.scheme = Some(Scheme::classify(url.scheme()));
    out.href = url.into();
    Ok(out)
}

impl AffordanceCatalog {
    /// [`resolve_form`] against this catalog's resolution base.
    pub fn resolve(&self, form: &Form) -> Result<Form, UnresolvableHref> {
        resolve_form(self.resolution_base(), form)
    }
}
