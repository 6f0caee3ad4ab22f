use std::collections::BTreeSet;

use super::score::TaskContext;
use crate::html_ingest::{DomTree, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SummarizerError {
    #[error("summarizer failed: {0}")]
    Failed(String),
    #[error("summarizer removed affordance-bearing nodes: {missing:?}")]
    ContractViolation { missing: Vec<NodeId> },
}

/// Optional last transformation before encoding, for example a small model
/// condensing the page. Implementations must keep every affordance-bearing
/// node; [`run_summarizer`] rejects outputs that do not.
pub trait DomSummarizer: Send + Sync {
    fn summarize(&self, tree: &DomTree, ctx: &TaskContext) -> Result<DomTree, SummarizerError>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentitySummarizer;

impl DomSummarizer for IdentitySummarizer {
    fn summarize(&self, tree: &DomTree, _ctx: &TaskContext) -> Result<DomTree, SummarizerError> {
        Ok(tree.clone())
    }
}

/// Runs `summarizer` and checks that every node in `required` survives.
pub fn run_summarizer(
    summarizer: &dyn DomSummarizer,
    tree: &DomTree,
    ctx: &TaskContext,
    required: &BTreeSet<NodeId>,
) -> Result<DomTree, SummarizerError> {
    let out = summarizer.summarize(tree, ctx)?;
    let present: BTreeSet<NodeId> = out.node_ids().into_iter().collect();
    let missing: Vec<NodeId> = required.difference(&present).copied().collect();
    if missing.is_empty() {
        Ok(out)
    } else {
        Err(SummarizerError::ContractViolation { missing })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom_transducer::affordance::extract_affordances;
    use crate::html_ingest::{parse_html, DomNode};

    struct DropParagraphs;
    impl DomSummarizer for DropParagraphs {
        fn summarize(&self, tree: &DomTree, _: &TaskContext) -> Result<DomTree, SummarizerError> {
            fn go(n: &DomNode) -> DomNode {
                DomNode {
                    id: n.id,
                    data: n.data.clone(),
                    children: n.children.iter().filter(|c| !c.is_tag("p")).map(go).collect(),
                }
            }
            Ok(DomTree::new(go(&tree.root), tree.source_url.clone()))
        }
    }

    struct DropButtons;
    impl DomSummarizer for DropButtons {
        fn summarize(&self, tree: &DomTree, _: &TaskContext) -> Result<DomTree, SummarizerError> {
            fn go(n: &DomNode) -> DomNode {
                DomNode {
                    id: n.id,
                    data: n.data.clone(),
                    children: n.children.iter().filter(|c| !c.is_tag("button")).map(go).collect(),
                }
            }
            Ok(DomTree::new(go(&tree.root), tree.source_url.clone()))
        }
    }

    fn fixture() -> (DomTree, BTreeSet<NodeId>) {
        let t = parse_html(
            b"<div><p>long prose</p><button>Go</button><p>more prose</p><a href=/x>x</a></div>",
            None,
        )
        .unwrap();
        let req = extract_affordances(&t).iter().map(|a| a.node_id).collect();
        (t, req)
    }

    #[test]
    fn identity_is_noop() {
        let (t, req) = fixture();
        let ctx = TaskContext::new("go");
        assert_eq!(run_summarizer(&IdentitySummarizer, &t, &ctx, &req).unwrap(), t);
    }

    #[test]
    fn dropping_prose_keeps_affordances() {
        let (t, req) = fixture();
        let out = run_summarizer(&DropParagraphs, &t, &TaskContext::new("go"), &req).unwrap();
        assert_eq!(extract_affordances(&out).len(), req.len());
        assert!(out.node_count() < t.node_count());
    }

    #[test]
    fn dropping_a_button_is_rejected() {
        let (t, req) = fixture();
        let err = run_summarizer(&DropButtons, &t, &TaskContext::new("go"), &req).unwrap_err();
        assert!(matches!(err, SummarizerError::ContractViolation { missing } if missing.len() == 1));
    }
}
