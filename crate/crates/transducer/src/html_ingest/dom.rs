use std::fmt;

use serde::{Deserialize, Serialize};

/// Identifier of a node, assigned in document order at parse time.
///
/// Identifiers never change afterwards: cleaning and pruning only remove
/// nodes, so every surviving node can be traced back to the raw DOM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeData {
    Element { tag: String, attrs: Vec<(String, String)> },
    Text { text: String },
    Comment { text: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomNode {
    pub id: NodeId,
    #[serde(flatten)]
    pub data: NodeData,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<DomNode>,
}

impl DomNode {
    pub fn element(id: NodeId, tag: impl Into<String>, attrs: Vec<(String, String)>) -> Self {
        DomNode {
            id,
            data: NodeData::Element { tag: tag.into(), attrs },
            children: Vec::new(),
        }
    }

    pub fn text(id: NodeId, text: impl Into<String>) -> Self {
        DomNode {
            id,
            data: NodeData::Text { text: text.into() },
            children: Vec::new(),
        }
    }

    pub fn comment(id: NodeId, text: impl Into<String>) -> Self {
        DomNode {
            id,
            data: NodeData::Comment { text: text.into() },
            children: Vec::new(),
        }
    }

    pub fn tag(&self) -> Option<&str> {
        match &self.data {
            NodeData::Element { tag, .. } => Some(tag),
            _ => None,
        }
    }

    pub fn is_element(&self) -> bool {
        matches!(self.data, NodeData::Element { .. })
    }

    pub fn is_tag(&self, name: &str) -> bool {
        self.tag() == Some(name)
    }

    pub fn attrs(&self) -> &[(String, String)] {
        match &self.data {
            NodeData::Element { attrs, .. } => attrs,
            _ => &[],
        }
    }

    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs().iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }

    /// Text content for text nodes, `None` otherwise.
    pub fn text_content(&self) -> Option<&str> {
        match &self.data {
            NodeData::Text { text } => Some(text),
            _ => None,
        }
    }

    /// Concatenated descendant text with whitespace collapsed to single spaces.
    pub fn visible_text(&self) -> String {
        let mut out = String::new();
        self.walk(&mut |n| {
            if let Some(t) = n.text_content() {
                out.push(' ');
                out.push_str(t);
            }
        });
        collapse_whitespace(&out)
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a DomNode)) {
        f(self);
        for child in &self.children {
            child.walk(f);
        }
    }

    pub fn find(&self, id: NodeId) -> Option<&DomNode> {
        if self.id == id {
            return Some(self);
        }
        self.children.iter().find_map(|c| c.find(id))
    }

    pub fn subtree_size(&self) -> usize {
        1 + self.children.iter().map(DomNode::subtree_size).sum::<usize>()
    }

    /// Equality of tags, attributes, text and shape, ignoring node ids.
    pub fn structurally_eq(&self, other: &DomNode) -> bool {
        self.data == other.data
            && self.children.len() == other.children.len()
            && self
                .children
                .iter()
                .zip(&other.children)
                .all(|(a, b)| a.structurally_eq(b))
    }
}

/// A parsed HTML document: the raw observation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomTree {
    pub root: DomNode,
    pub source_url: Option<String>,
    node_count: usize,
}

impl DomTree {
    pub fn new(root: DomNode, source_url: Option<String>) -> Self {
        let node_count = root.subtree_size();
        DomTree {
            root,
            source_url,
            node_count,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn find(&self, id: NodeId) -> Option<&DomNode> {
        self.root.find(id)
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.find(id).is_some()
    }

    pub fn node_ids(&self) -> Vec<NodeId> {
        let mut ids = Vec::with_capacity(self.node_count);
        self.root.walk(&mut |n| ids.push(n.id));
        ids
    }

    /// The `body` element, when the root is an `html` element that has one.
    pub fn body(&self) -> Option<&DomNode> {
        self.root.children.iter().find(|c| c.is_tag("body"))
    }

    pub fn head(&self) -> Option<&DomNode> {
        self.root.children.iter().find(|c| c.is_tag("head"))
    }

    /// Document title from `head > title`, whitespace collapsed.
    pub fn title(&self) -> String {
        self.head()
            .and_then(|h| h.children.iter().find(|c| c.is_tag("title")))
            .map(DomNode::visible_text)
            .unwrap_or_default()
    }

    /// Ids of every ancestor of `id`, root first. `None` when `id` is absent.
    pub fn ancestors(&self, id: NodeId) -> Option<Vec<NodeId>> {
        fn go(node: &DomNode, id: NodeId, path: &mut Vec<NodeId>) -> bool {
            if node.id == id {
                return true;
            }
            path.push(node.id);
            for c in &node.children {
                if go(c, id, path) {
                    return true;
                }
            }
            path.pop();
            false
        }
        let mut path = Vec::new();
        go(&self.root, id, &mut path).then_some(path)
    }

    pub fn structurally_eq(&self, other: &DomTree) -> bool {
        self.root.structurally_eq(&other.root)
    }
}

pub(crate) fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DomTree {
        let mut root = DomNode::element(NodeId(0), "html", vec![]);
        let mut body = DomNode::element(NodeId(1), "body", vec![]);
        let mut p = DomNode::element(NodeId(2), "p", vec![("class".into(), "x".into())]);
        p.children.push(DomNode::text(NodeId(3), "  hello\n world "));
        body.children.push(p);
        root.children.push(body);
        DomTree::new(root, None)
    }

    #[test]
    fn counts_and_lookups() {
        let t = sample();
        assert_eq!(t.node_count(), 4);
        assert_eq!(t.find(NodeId(2)).unwrap().attr("class"), Some("x"));
        assert_eq!(t.ancestors(NodeId(3)), Some(vec![NodeId(0), NodeId(1), NodeId(2)]));
        assert_eq!(t.ancestors(NodeId(9)), None);
        assert_eq!(t.root.visible_text(), "hello world");
    }

    #[test]
    fn structural_equality_ignores_ids() {
        let a = sample();
        let mut b = sample();
        b.root.children[0].id = NodeId(40);
        assert_ne!(a, b);
        assert!(a.structurally_eq(&b));
    }
}
