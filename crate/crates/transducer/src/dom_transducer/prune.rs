use std::collections::BTreeSet;

use super::blocks::{BlockId, BlockTree};
use crate::html_ingest::{DomNode, DomTree, TokenCount};

/// Chooses the blocks that survive pruning.
///
/// Blocks are visited in descending relevance, ties broken by document
/// order. Blocks owning an interactive element are always kept, even over
/// budget. Other blocks are admitted while the running token total stays
/// within `budget`; the first one that does not fit closes admission.
pub fn select_blocks(blocks: &BlockTree, budget: TokenCount) -> BTreeSet<BlockId> {
    let mut order: Vec<_> = blocks.blocks.iter().collect();
    order.sort_by(|a, b| b.relevance.total_cmp(&a.relevance).then(a.block_id.cmp(&b.block_id)));

    let mut kept = BTreeSet::new();
    let mut used = TokenCount(0);
    let mut admitting = true;
    for block in order {
        if block.has_interactive || admitting && (used + block.token_count) <= budget {
            kept.insert(block.block_id);
            used += block.token_count;
        } else {
            admitting = false;
        }
    }
    kept
}

/// Removes the content of unselected blocks.
///
/// Nodes owned by a dropped block disappear unless they are an ancestor of
/// something kept, so every surviving node keeps its original ancestor
/// chain. The root and its `head`/`body` are never removed, nor is anything
/// outside all blocks.
pub fn prune(tree: &DomTree, blocks: &BlockTree, budget: TokenCount) -> DomTree {
    let kept = select_blocks(blocks, budget);
    prune_to(tree, blocks, &kept)
}

pub fn prune_to(tree: &DomTree, blocks: &BlockTree, kept: &BTreeSet<BlockId>) -> DomTree {
    let root = prune_node(&tree.root, 0, blocks, kept).expect("root is structural");
    DomTree::new(root, tree.source_url.clone())
}

fn prune_node(node: &DomNode, depth: usize, blocks: &BlockTree, kept: &BTreeSet<BlockId>) -> Option<DomNode> {
    let children: Vec<DomNode> = node
        .children
        .iter()
        .filter_map(|c| prune_node(c, depth + 1, blocks, kept))
        .collect();
    let structural = depth == 0 || (depth == 1 && (node.is_tag("head") || node.is_tag("body")));
    let dropped = blocks.owner_of(node.id).is_some_and(|b| !kept.contains(&b));
    if dropped && !structural && children.is_empty() {
        return None;
    }
    Some(DomNode {
        id: node.id,
        data: node.data.clone(),
        children,
    })
}
