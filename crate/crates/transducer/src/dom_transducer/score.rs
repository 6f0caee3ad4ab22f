use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::blocks::{Block, BlockTree};

const STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are", "as", "at", "be",
    "because", "been", "before", "being", "below", "between", "both", "but", "by", "can", "could", "did", "do", "does",
    "doing", "down", "during", "each", "few", "for", "from", "further", "had", "has", "have", "having", "he", "her",
    "here", "hers", "him", "his", "how", "i", "if", "in", "into", "is", "it", "its", "just", "me", "more", "most",
    "my", "no", "nor", "not", "now", "of", "off", "on", "once", "only", "or", "other", "our", "ours", "out", "over",
    "own", "please", "same", "she", "should", "so", "some", "such", "than", "that", "the", "their", "them", "then",
    "there", "these", "they", "this", "those", "through", "to", "too", "under", "until", "up", "very", "was", "we",
    "were", "what", "when", "where", "which", "while", "who", "whom", "why", "will", "with", "would", "you", "your",
    "yours",
];

/// Lowercased alphanumeric words of `text`.
pub fn terms(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
}

/// The agent's current task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskContext {
    pub description: String,
    pub keywords: BTreeSet<String>,
}

impl TaskContext {
    pub fn new(description: impl Into<String>) -> Self {
        let description = description.into();
        let keywords = terms(&description)
            .filter(|w| !STOPWORDS.contains(&w.as_str()))
            .collect();
        TaskContext { description, keywords }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScoreError {
    #[error("task has no keywords to score against")]
    EmptyTask,
    #[error("scorer failed: {0}")]
    Scorer(String),
}

/// Assigns each block a relevance in `[0, 1]` for a task.
pub trait RelevanceScorer: Send + Sync {
    fn name(&self) -> &str;

    /// Whether concurrent calls on one instance are safe and independent.
    fn is_reentrant(&self) -> bool;

    /// Called once before any block is scored.
    fn check_task(&self, _ctx: &TaskContext) -> Result<(), ScoreError> {
        Ok(())
    }

    fn score(&self, block: &Block, ctx: &TaskContext) -> Result<f64, ScoreError>;
}

/// Keyword overlap: `|keywords ∩ block terms| / |keywords|`, plus 0.25 when
/// the block owns an interactive element, clamped to 1.
#[derive(Debug, Clone, Copy, Default)]
pub struct LexicalScorer;

pub const INTERACTIVE_BONUS: f64 = 0.25;

impl RelevanceScorer for LexicalScorer {
    fn name(&self) -> &str {
        "lexical"
    }

    fn is_reentrant(&self) -> bool {
        true
    }

    fn check_task(&self, ctx: &TaskContext) -> Result<(), ScoreError> {
        if ctx.keywords.is_empty() {
            Err(ScoreError::EmptyTask)
        } else {
            Ok(())
        }
    }

    fn score(&self, block: &Block, ctx: &TaskContext) -> Result<f64, ScoreError> {
        self.check_task(ctx)?;
        let block_terms: BTreeSet<String> = terms(&block.summary_text).collect();
        let hits = ctx.keywords.iter().filter(|k| block_terms.contains(*k)).count();
        let mut score = hits as f64 / ctx.keywords.len() as f64;
        if block.has_interactive {
            score += INTERACTIVE_BONUS;
        }
        Ok(score.min(1.0))
    }
}

/// Returns a copy of `blocks` with every relevance set by `scorer`.
pub fn score_blocks(
    blocks: &BlockTree,
    ctx: &TaskContext,
    scorer: &dyn RelevanceScorer,
) -> Result<BlockTree, ScoreError> {
    scorer.check_task(ctx)?;
    let mut out = blocks.clone();
    for block in &mut out.blocks {
        let s = scorer.score(block, ctx)?;
        block.relevance = if s.is_nan() { 0.0 } else { s.clamp(0.0, 1.0) };
    }
    Ok(out)
}
