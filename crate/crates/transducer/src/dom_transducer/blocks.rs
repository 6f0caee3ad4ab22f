use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::affordance::is_interactive;
use crate::html_ingest::{
    collapse_whitespace, count_tokens, serialize_node_filtered, DomNode, DomTree, NodeId, TokenCount,
};

/// Elements that may root a block.
pub const BLOCK_CONTAINERS: &[&str] = &[
    "section", "article", "nav", "header", "footer", "main", "aside", "div", "form", "table", "ul", "ol",
];

pub const SUMMARY_CHARS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlockId(pub u32);

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}", self.0)
    }
}

/// A semantically related region of the page.
///
/// A block owns every node below its root except those inside a child block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub block_id: BlockId,
    pub root_node_id: NodeId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<BlockId>,
    /// Visible text of the owned nodes, truncated to [`SUMMARY_CHARS`].
    pub summary_text: String,
    /// Tokens of the serialized root subtree with child blocks cut out.
    pub token_count: TokenCount,
    pub relevance: f64,
    pub has_interactive: bool,
    /// Owned text nodes with visible content and owned interactive elements.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub leaves: Vec<NodeId>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BlockTree {
    pub blocks: Vec<Block>,
    owner: BTreeMap<NodeId, BlockId>,
}

impl BlockTree {
    pub fn get(&self, id: BlockId) -> Option<&Block> {
        self.blocks.get(id.0 as usize).filter(|b| b.block_id == id)
    }

    /// The block owning `node`, if the node lies inside any block.
    pub fn owner_of(&self, node: NodeId) -> Option<BlockId> {
        self.owner.get(&node).copied()
    }

    pub fn root_block_of(&self, node: NodeId) -> Option<BlockId> {
        self.blocks.iter().find(|b| b.root_node_id == node).map(|b| b.block_id)
    }

    pub fn total_tokens(&self) -> TokenCount {
        self.blocks.iter().map(|b| b.token_count).sum()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionConfig {
    /// A container nested inside another container becomes its own block
    /// only when its visible text has at least this many tokens.
    pub min_block_tokens: u64,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig { min_block_tokens: 8 }
    }
}

fn is_container(node: &DomNode) -> bool {
    node.tag().is_some_and(|t| BLOCK_CONTAINERS.contains(&t))
}

fn is_leaf(node: &DomNode) -> bool {
    match node.text_content() {
        Some(t) => !t.trim().is_empty(),
        None => is_interactive(node),
    }
}

fn has_leaf(node: &DomNode) -> bool {
    is_leaf(node) || node.children.iter().any(has_leaf)
}

pub fn partition_blocks(tree: &DomTree) -> BlockTree {
    partition_blocks_with(tree, &PartitionConfig::default())
}

/// Splits the body into blocks.
///
/// Containers directly below the body (with no container between them and
/// the body) root a block whenever they hold a leaf. Deeper containers root
/// a child block only when their visible text reaches `min_block_tokens`;
/// otherwise they merge into the enclosing block. The body itself roots the
/// fallback block. Blocks that end up owning no leaf are dissolved into
/// their parent.
pub fn partition_blocks_with(tree: &DomTree, config: &PartitionConfig) -> BlockTree {
    let base = tree.body().unwrap_or(&tree.root);

    let mut candidates: BTreeSet<NodeId> = BTreeSet::new();
    candidates.insert(base.id);
    collect_candidates(base, false, config, &mut candidates);

    // Dissolve candidates that own no leaf. Removing one never changes the
    // leaf count of another, so a single pass suffices.
    let mut leaves: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    assign_leaves(base, base.id, &candidates, &mut leaves);
    candidates.retain(|id| leaves.get(id).is_some_and(|l| !l.is_empty()));

    let ids: BTreeMap<NodeId, BlockId> = candidates
        .iter()
        .enumerate()
        .map(|(i, n)| (*n, BlockId(i as u32)))
        .collect();

    let mut out = BlockTree::default();
    build(base, None, &ids, &leaves, &mut out);
    out.blocks.sort_by_key(|b| b.block_id);
    out
}

fn collect_candidates(node: &DomNode, in_container: bool, config: &PartitionConfig, out: &mut BTreeSet<NodeId>) {
    for child in &node.children {
        if is_container(child) {
            let split = has_leaf(child)
                && (!in_container || count_tokens(&child.visible_text()).get() >= config.min_block_tokens);
            if split {
                out.insert(child.id);
            }
            collect_candidates(child, true, config, out);
        } else {
            collect_candidates(child, in_container, config, out);
        }
    }
}

fn assign_leaves(node: &DomNode, current: NodeId, roots: &BTreeSet<NodeId>, out: &mut BTreeMap<NodeId, Vec<NodeId>>) {
    let current = if roots.contains(&node.id) { node.id } else { current };
    if is_leaf(node) {
        out.entry(current).or_default().push(node.id);
    }
    for c in &node.children {
        assign_leaves(c, current, roots, out);
    }
}

fn build(
    node: &DomNode,
    enclosing: Option<BlockId>,
    ids: &BTreeMap<NodeId, BlockId>,
    leaves: &BTreeMap<NodeId, Vec<NodeId>>,
    out: &mut BlockTree,
) {
    let current = match ids.get(&node.id) {
        Some(&bid) => {
            out.blocks.push(make_block(node, bid, enclosing, ids, leaves));
            Some(bid)
        }
        None => enclosing,
    };
    if let Some(bid) = current {
        out.owner.insert(node.id, bid);
    }
    for c in &node.children {
        build(c, current, ids, leaves, out);
    }
}

fn make_block(
    root: &DomNode,
    id: BlockId,
    parent: Option<BlockId>,
    ids: &BTreeMap<NodeId, BlockId>,
    leaves: &BTreeMap<NodeId, Vec<NodeId>>,
) -> Block {
    let is_child_root = |n: &DomNode| n.id != root.id && ids.contains_key(&n.id);
    let serialized = serialize_node_filtered(root, &is_child_root);

    let mut text = String::new();
    let mut has_interactive = false;
    own_nodes(root, root.id, ids, &mut |n| {
        if let Some(t) = n.text_content() {
            text.push(' ');
            text.push_str(t);
        } else if is_interactive(n) {
            has_interactive = true;
        }
    });
    let summary_text: String = collapse_whitespace(&text).chars().take(SUMMARY_CHARS).collect();

    Block {
        block_id: id,
        root_node_id: root.id,
        parent,
        summary_text,
        token_count: count_tokens(&serialized),
        relevance: 0.0,
        has_interactive,
        leaves: leaves.get(&root.id).cloned().unwrap_or_default(),
    }
}

fn own_nodes<'a>(node: &'a DomNode, root: NodeId, ids: &BTreeMap<NodeId, BlockId>, f: &mut impl FnMut(&'a DomNode)) {
    if node.id != root && ids.contains_key(&node.id) {
        return;
    }
    f(node);
    for c in &node.children {
        own_nodes(c, root, ids, f);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::html_ingest::parse_html;

    fn blocks(src: &str) -> (DomTree, BlockTree) {
        let t = parse_html(src.as_bytes(), None).unwrap();
        let b = partition_blocks(&t);
        (t, b)
    }

    #[test]
    fn sibling_divs_make_two_blocks() {
        let (_, b) = blocks("<body><div>a</div><div>b</div></body>");
        assert_eq!(b.len(), 2);
        assert_eq!(b.blocks[0].summary_text, "a");
        assert_eq!(b.blocks[1].summary_text, "b");
        assert_eq!(b.blocks[0].parent, None);
    }

    // Inner div text "tiny" is 1 token < 8, so it merges into the outer block.
    #[test]
    fn small_nested_container_merges() {
        let (_, b) = blocks("<div><div>tiny</div><p>more text here now</p></div>");
        assert_eq!(b.len(), 1);
        assert_eq!(b.blocks[0].summary_text, "tiny more text here now");
    }

    #[test]
    fn large_nested_container_splits() {
        let (_, b) = blocks("<div><p>outer words</p><section>one two three four five six seven eight</section></div>");
        assert_eq!(b.len(), 2);
        assert_eq!(b.blocks[1].parent, Some(b.blocks[0].block_id));
        assert_eq!(b.blocks[0].summary_text, "outer words");
    }

    #[test]
    fn text_only_body_is_one_block() {
        let (t, b) = blocks("just some text");
        assert_eq!(b.len(), 1);
        assert_eq!(b.blocks[0].root_node_id, t.body().unwrap().id);
    }

    #[test]
    fn token_count_excludes_child_blocks() {
        let (_, b) = blocks("<body>x<div>a</div></body>");
        assert_eq!(b.len(), 2);
        // <body>x</body>
        assert_eq!(b.blocks[0].token_count, TokenCount(8));
        // <div>a</div>
        assert_eq!(b.blocks[1].token_count, TokenCount(8));
    }

    #[test]
    fn interactive_flag_and_leaves() {
        let (_, b) = blocks(r#"<nav><a href="/">Home</a></nav><div>plain</div>"#);
        assert!(b.blocks[0].has_interactive);
        assert!(!b.blocks[1].has_interactive);
        // the link element and its text
        assert_eq!(b.blocks[0].leaves.len(), 2);
    }

    #[test]
    fn every_visible_text_node_in_one_block() {
        let (t, b) = blocks(
            "<header>h</header>loose<main><div>small</div><article>a b c d e f g h i j</article><ul><li>x</li></ul></main>",
        );
        let body = t.body().unwrap();
        let mut seen = 0;
        body.walk(&mut |n| {
            if n.text_content().is_some_and(|s| !s.trim().is_empty()) {
                let owners: Vec<_> = b.blocks.iter().filter(|blk| blk.leaves.contains(&n.id)).collect();
                assert_eq!(owners.len(), 1, "text {:?}", n.text_content());
                assert_eq!(b.owner_of(n.id), Some(owners[0].block_id));
                seen += 1;
            }
        });
        assert_eq!(seen, 5);
    }

    #[test]
    fn empty_body_has_no_blocks() {
        let (_, b) = blocks("");
        assert!(b.is_empty());
    }
}
