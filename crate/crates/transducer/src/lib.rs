//! Structured perception of web pages.
//!
//! [`html_ingest`] turns raw HTML into a [`DomTree`]; [`dom_transducer`]
//! distills that tree into a [`PageAffordanceModel`] an agent can reason
//! over. This crate performs no I/O beyond reading config files and has no
//! dependency on any world-model store or network client.

pub mod dom_transducer;
pub mod html_ingest;

pub use dom_transducer::{transduce, PageAffordanceModel, TaskContext, TransducerConfig};
pub use html_ingest::{count_tokens, parse_html, serialize, DomTree, NodeId, TokenCount};

#[cfg(feature = "test-support")]
pub mod test_support;
