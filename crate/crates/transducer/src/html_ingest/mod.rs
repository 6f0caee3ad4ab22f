//! Raw HTML ingestion: parsing into a [`DomTree`], serialization, and the
//! canonical token counter shared by every reduction metric.

mod dom;
mod parse;
mod serialize;
mod tokens;

pub use dom::{DomNode, DomTree, NodeData, NodeId};
pub use parse::parse_html;
pub use serialize::{is_void_element, serialize, serialize_node, serialize_node_filtered};
pub use tokens::{count_tokens, CanonicalTokenizer, TokenCount, Tokenizer, SPLIT_CHARS};

pub(crate) use dom::collapse_whitespace;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IngestError {
    #[error("unsupported document encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("source url is not an absolute URL: {0}")]
    InvalidSourceUrl(String),
}
