use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::html_ingest::{DomNode, DomTree, NodeData};

const DEFAULT_STRIP_TAGS: &[&str] = &[
    "script", "style", "noscript", "template", "svg", "iframe", "link", "meta",
];

const DEFAULT_ATTR_WHITELIST: &[&str] = &[
    "id",
    "class",
    "href",
    "src",
    "alt",
    "title",
    "name",
    "type",
    "value",
    "placeholder",
    "role",
    "aria-label",
    "action",
    "method",
    "for",
    "selected",
    "checked",
    "disabled",
    "rel",
];

/// Rules for the cleaning stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CleaningConfig {
    /// Elements removed together with their whole subtree.
    pub strip_tags: BTreeSet<String>,
    pub strip_comments: bool,
    /// Attributes kept on surviving elements; all others are dropped.
    pub attr_whitelist: BTreeSet<String>,
}

impl Default for CleaningConfig {
    fn default() -> Self {
        CleaningConfig {
            strip_tags: DEFAULT_STRIP_TAGS.iter().map(|s| s.to_string()).collect(),
            strip_comments: true,
            attr_whitelist: DEFAULT_ATTR_WHITELIST.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// Removes universally irrelevant markup. The input tree is left untouched
/// and surviving nodes keep their ids.
pub fn clean(tree: &DomTree, config: &CleaningConfig) -> DomTree {
    let root = clean_node(&tree.root, config, true).expect("root element survives cleaning");
    DomTree::new(root, tree.source_url.clone())
}

fn clean_node(node: &DomNode, config: &CleaningConfig, is_root: bool) -> Option<DomNode> {
    let data = match &node.data {
        NodeData::Comment { .. } if config.strip_comments => return None,
        NodeData::Element { tag, .. } if !is_root && config.strip_tags.contains(tag) => return None,
        NodeData::Element { tag, attrs } => NodeData::Element {
            tag: tag.clone(),
            attrs: attrs
                .iter()
                .filter(|(k, _)| config.attr_whitelist.contains(k))
                .cloned()
                .collect(),
        },
        other => other.clone(),
    };
    Some(DomNode {
        id: node.id,
        data,
        children: node
            .children
            .iter()
            .filter_map(|c| clean_node(c, config, false))
            .collect(),
    })
}
