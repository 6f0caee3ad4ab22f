//! C ABI over the transducer, the Thing Description parser, the protocol
//! client and the cognitive map.
//!
//! Structured values cross the boundary as UTF-8 JSON strings. Strings
//! returned through `out_json` parameters are owned by the caller and must be
//! released with [`aff_string_free`]. Every fallible function returns an
//! [`AffStatus`]; on failure [`aff_last_error`] describes what went wrong.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use affordance_core::cognitive_map::{AffordanceQuery, CognitiveMap, MapError};
use affordance_core::protocol_client::{ClientError, InteractionResult, ProtocolClient};
use affordance_core::td_affordances::{parse_td_with, validate_td, AffordanceCatalog, Mode, ParseOptions, TdError};
use affordance_transducer::dom_transducer::{transduce, PageAffordanceModel, TaskContext, TransducerSettings};
use serde_json::Value;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AffStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidJson = 3,
    InvalidInput = 4,
    InvalidTd = 5,
    Config = 6,
    Network = 7,
    NotFound = 8,
    SchemaMismatch = 9,
    Unsupported = 10,
    Io = 11,
    CorruptFile = 12,
    SchemaVersion = 13,
    Panic = 14,
}

/// Opaque handle to a cognitive map.
pub struct AffMap {
    map: CognitiveMap,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Fail(AffStatus, String);

impl From<MapError> for Fail {
    fn from(e: MapError) -> Self {
        let status = match e {
            MapError::Io { .. } => AffStatus::Io,
            MapError::CorruptFile { .. } => AffStatus::CorruptFile,
            MapError::SchemaVersionMismatch { .. } => AffStatus::SchemaVersion,
            _ => AffStatus::InvalidInput,
        };
        Fail(status, e.to_string())
    }
}

impl From<ClientError> for Fail {
    fn from(e: ClientError) -> Self {
        let status = match e {
            ClientError::NoSuchAffordance { .. } => AffStatus::NotFound,
            ClientError::SchemaMismatch { .. } => AffStatus::SchemaMismatch,
            ClientError::Network(_) | ClientError::Protocol { .. } | ClientError::BodyTooLarge { .. } => {
                AffStatus::Network
            }
            _ => AffStatus::Unsupported,
        };
        Fail(status, e.to_string())
    }
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> AffStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AffStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            AffStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(AffStatus::NullArgument, format!("`{name}` is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail(AffStatus::InvalidUtf8, format!("`{name}`: {e}")))
}

unsafe fn optional_text<'a>(p: *const c_char, name: &str) -> Result<Option<&'a str>, Fail> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, name).map(Some)
    }
}

fn json<T: serde::de::DeserializeOwned>(s: &str, name: &str) -> Result<T, Fail> {
    serde_json::from_str(s).map_err(|e| Fail(AffStatus::InvalidJson, format!("`{name}`: {e}")))
}

unsafe fn put(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(AffStatus::NullArgument, "`out_json` is NULL".into()));
    }
    let c = CString::new(s).map_err(|_| Fail(AffStatus::InvalidInput, "output contains a NUL byte".into()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn put_json<T: serde::Serialize>(out: *mut *mut c_char, v: &T) -> Result<(), Fail> {
    put(out, serde_json::to_string(v).expect("values serialize"))
}

unsafe fn map_ref<'a>(map: *const AffMap) -> Result<&'a AffMap, Fail> {
    map.as_ref()
        .ok_or_else(|| Fail(AffStatus::NullArgument, "`map` is NULL".into()))
}

unsafe fn map_mut<'a>(map: *mut AffMap) -> Result<&'a mut AffMap, Fail> {
    map.as_mut()
        .ok_or_else(|| Fail(AffStatus::NullArgument, "`map` is NULL".into()))
}

fn catalog<'a>(m: &'a AffMap, thing: &str) -> Result<&'a AffordanceCatalog, Fail> {
    m.map
        .catalog(thing)
        .ok_or_else(|| Fail(AffStatus::NotFound, format!("no Thing `{thing}` in the map")))
}

fn mode(strict: bool) -> Mode {
    if strict {
        Mode::Strict
    } else {
        Mode::Lenient
    }
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn aff_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn aff_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn aff_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Transduces `html_len` bytes of HTML into a page affordance model.
/// `source_url` and `settings_json` may be NULL.
///
/// # Safety
/// `html` must point to `html_len` readable bytes; string arguments must be
/// NUL-terminated; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aff_transduce(
    html: *const u8,
    html_len: usize,
    source_url: *const c_char,
    task: *const c_char,
    settings_json: *const c_char,
    out_json: *mut *mut c_char,
) -> AffStatus {
    guard(|| {
        if html.is_null() {
            return Err(Fail(AffStatus::NullArgument, "`html` is NULL".into()));
        }
        let raw = std::slice::from_raw_parts(html, html_len);
        let url = optional_text(source_url, "source_url")?;
        let task = text(task, "task")?;
        let settings: TransducerSettings = match optional_text(settings_json, "settings_json")? {
            Some(s) => TransducerSettings::from_json_str(s).map_err(|e| Fail(AffStatus::Config, e.to_string()))?,
            None => TransducerSettings::default(),
        };
        let pam = transduce(raw, url, &TaskContext::new(task), &settings.into())
            .map_err(|e| Fail(AffStatus::InvalidInput, e.to_string()))?;
        put_json(out_json, &pam)
    })
}

/// Parses a Thing Description into `{"catalog": ..., "warnings": [...]}`.
///
/// # Safety
/// `td` must be NUL-terminated; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aff_parse_td(td: *const c_char, strict: bool, out_json: *mut *mut c_char) -> AffStatus {
    guard(|| {
        let td = text(td, "td")?;
        match parse_td_with(td, &ParseOptions::new(mode(strict))) {
            Ok(p) => put_json(
                out_json,
                &serde_json::json!({"catalog": p.catalog, "warnings": p.warnings}),
            ),
            Err(e @ TdError::Json { .. }) => Err(Fail(AffStatus::InvalidTd, e.to_string())),
            Err(TdError::Invalid { violations }) => Err(Fail(
                AffStatus::InvalidTd,
                serde_json::to_string(&violations).expect("violations serialize"),
            )),
        }
    })
}

/// Every violation in a Thing Description, as a JSON array.
///
/// # Safety
/// `td` must be NUL-terminated; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aff_validate_td(td: *const c_char, strict: bool, out_json: *mut *mut c_char) -> AffStatus {
    guard(|| put_json(out_json, &validate_td(text(td, "td")?, mode(strict))))
}

/// A new, empty map. Free with [`aff_map_free`].
#[no_mangle]
pub extern "C" fn aff_map_new() -> *mut AffMap {
    Box::into_raw(Box::new(AffMap {
        map: CognitiveMap::new(),
    }))
}

/// # Safety
/// `map` must come from this library and not have been freed. NULL is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn aff_map_free(map: *mut AffMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Loads a map file into a new handle.
///
/// # Safety
/// `path` must be NUL-terminated; `out_map` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aff_map_load(path: *const c_char, out_map: *mut *mut AffMap) -> AffStatus {
    guard(|| {
        if out_map.is_null() {
            return Err(Fail(AffStatus::NullArgument, "`out_map` is NULL".into()));
        }
        let map = CognitiveMap::load(Path::new(text(path, "path")?))?;
        *out_map = Box::into_raw(Box::new(AffMap { map }));
        Ok(())
    })
}

/// # Safety
/// `map` must be a live handle; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn aff_map_persist(map: *const AffMap, path: *const c_char) -> AffStatus {
    guard(|| Ok(map_ref(map)?.map.persist(Path::new(text(path, "path")?))?))
}

/// The map's version; 0 for NULL.
///
/// # Safety
/// `map` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn aff_map_version(map: *const AffMap) -> u64 {
    map.as_ref().map_or(0, |m| m.map.version())
}

/// Upserts a page affordance model given as JSON. `out_revision` may be NULL.
///
/// # Safety
/// `map` must be a live handle; `pam_json` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn aff_map_upsert_pam(
    map: *mut AffMap,
    pam_json: *const c_char,
    out_revision: *mut u64,
) -> AffStatus {
    guard(|| {
        let pam: PageAffordanceModel = json(text(pam_json, "pam_json")?, "pam_json")?;
        let rev = map_mut(map)?.map.upsert_pam(pam)?;
        if !out_revision.is_null() {
            *out_revision = rev;
        }
        Ok(())
    })
}

/// Upserts an affordance catalog given as JSON, in the form `aff_parse_td`
/// returns under `"catalog"`. `out_revision` may be NULL.
///
/// # Safety
/// `map` must be a live handle; `catalog_json` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn aff_map_upsert_catalog(
    map: *mut AffMap,
    catalog_json: *const c_char,
    out_revision: *mut u64,
) -> AffStatus {
    guard(|| {
        let c: AffordanceCatalog = json(text(catalog_json, "catalog_json")?, "catalog_json")?;
        let rev = map_mut(map)?.map.upsert_catalog(c)?;
        if !out_revision.is_null() {
            *out_revision = rev;
        }
        Ok(())
    })
}

/// Runs a query such as `{"text": "temp", "kind": "action"}` and returns the
/// hits as a JSON array.
///
/// # Safety
/// `map` must be a live handle; `query_json` must be NUL-terminated;
/// `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aff_map_query(
    map: *const AffMap,
    query_json: *const c_char,
    out_json: *mut *mut c_char,
) -> AffStatus {
    guard(|| {
        let q: AffordanceQuery = json(text(query_json, "query_json")?, "query_json")?;
        put_json(out_json, &map_ref(map)?.map.query(&q)?)
    })
}

/// The map in its file format.
///
/// # Safety
/// `map` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aff_map_to_json(map: *const AffMap, out_json: *mut *mut c_char) -> AffStatus {
    guard(|| put(out_json, map_ref(map)?.map.to_json()))
}

unsafe fn interact(
    out_json: *mut *mut c_char,
    f: impl FnOnce(&ProtocolClient) -> Result<InteractionResult, Fail>,
) -> Result<(), Fail> {
    let r = f(&ProtocolClient::default())?;
    put_json(out_json, &r)
}

/// Reads a property of a Thing in the map over its protocol binding.
///
/// # Safety
/// `map` must be a live handle; strings must be NUL-terminated; `out_json`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn aff_read_property(
    map: *const AffMap,
    thing: *const c_char,
    property: *const c_char,
    out_json: *mut *mut c_char,
) -> AffStatus {
    guard(|| {
        let c = catalog(map_ref(map)?, text(thing, "thing")?)?;
        let name = text(property, "property")?;
        interact(out_json, |client| Ok(client.read_property(c, name)?))
    })
}

/// # Safety
/// As [`aff_read_property`]; `value_json` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn aff_write_property(
    map: *const AffMap,
    thing: *const c_char,
    property: *const c_char,
    value_json: *const c_char,
    out_json: *mut *mut c_char,
) -> AffStatus {
    guard(|| {
        let c = catalog(map_ref(map)?, text(thing, "thing")?)?;
        let name = text(property, "property")?;
        let value: Value = json(text(value_json, "value_json")?, "value_json")?;
        interact(out_json, |client| Ok(client.write_property(c, name, &value)?))
    })
}

/// Invokes an action. `input_json` may be NULL for actions without input.
///
/// # Safety
/// As [`aff_read_property`]; `input_json` must be NUL-terminated or NULL.
#[no_mangle]
pub unsafe extern "C" fn aff_invoke_action(
    map: *const AffMap,
    thing: *const c_char,
    action: *const c_char,
    input_json: *const c_char,
    out_json: *mut *mut c_char,
) -> AffStatus {
    guard(|| {
        let c = catalog(map_ref(map)?, text(thing, "thing")?)?;
        let name = text(action, "action")?;
        let input: Option<Value> = optional_text(input_json, "input_json")?
            .map(|s| json(s, "input_json"))
            .transpose()?;
        interact(out_json, |client| Ok(client.invoke_action(c, name, input.as_ref())?))
    })
}
