//! Thing Description parsing and validation into an affordance catalog.

mod diff;
mod model;
mod parse;
mod resolve;

pub use diff::{catalog_diff, ChangeSet, IdMismatch, NameSets};
pub use model::{
    ActionAffordance, AffordanceCatalog, DataSchema, EventAffordance, Form, InteractionKind, JsonType, OpVerb,
    PropertyAffordance, Scheme, DEFAULT_CONTENT_TYPE,
};
pub use parse::{
    parse_td, parse_td_with, pointer_token, validate_td, validate_td_with, Mode, ParseOptions, ParsedTd, Severity,
    TdError, TdLimits, TdViolation, ViolationCode,
};
pub use resolve::{resolve_form, UnresolvableHref};
