use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::affordance::{extract_affordances, AffordanceNode};
use super::blocks::{partition_blocks_with, Block, BlockId, BlockTree, PartitionConfig};
use super::clean::{clean, CleaningConfig};
use super::compact::{encode_compact, CompactEncoding};
use super::prune::{prune_to, select_blocks};
use super::score::{score_blocks, LexicalScorer, RelevanceScorer, ScoreError, TaskContext};
use super::summarize::{run_summarizer, DomSummarizer, IdentitySummarizer, SummarizerError};
use crate::html_ingest::{count_tokens, parse_html, serialize, DomTree, IngestError, TokenCount};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionStats {
    pub raw_tokens: TokenCount,
    pub cleaned_tokens: TokenCount,
    pub pruned_tokens: TokenCount,
    pub compact_tokens: TokenCount,
    /// `1 - compact_tokens / raw_tokens`, clamped to `[0, 1]`.
    pub reduction_ratio: f64,
}

impl ReductionStats {
    fn new(raw: TokenCount, cleaned: TokenCount, pruned: TokenCount, compact: TokenCount) -> Self {
        let ratio = if raw.get() == 0 {
            0.0
        } else {
            (1.0 - compact.get() as f64 / raw.get() as f64).clamp(0.0, 1.0)
        };
        ReductionStats {
            raw_tokens: raw,
            cleaned_tokens: cleaned,
            pruned_tokens: pruned,
            compact_tokens: compact,
            reduction_ratio: ratio,
        }
    }
}

/// The distilled, task-relevant view of one page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageAffordanceModel {
    pub source_url: Option<String>,
    pub title: String,
    pub affordances: Vec<AffordanceNode>,
    pub blocks_kept: Vec<BlockId>,
    /// The kept blocks themselves, carrying their summary text.
    #[serde(default)]
    pub blocks: Vec<Block>,
    pub compact: CompactEncoding,
    pub stats: ReductionStats,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScorerKind {
    #[default]
    Lexical,
}

/// File form of the transducer configuration (JSON or TOML).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransducerSettings {
    pub cleaning: CleaningConfig,
    /// Token budget for pruning; absent means unlimited.
    pub budget: Option<u64>,
    pub min_block_tokens: u64,
    pub scorer: ScorerKind,
}

impl Default for TransducerSettings {
    fn default() -> Self {
        TransducerSettings {
            cleaning: CleaningConfig::default(),
            budget: None,
            min_block_tokens: PartitionConfig::default().min_block_tokens,
            scorer: ScorerKind::Lexical,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid JSON config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid TOML config: {0}")]
    Toml(#[from] toml::de::Error),
}

impl TransducerSettings {
    pub fn from_json_str(s: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(s)?)
    }

    /// Loads a `.toml` file as TOML and anything else as JSON.
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => Self::from_toml_str(&text),
            _ => Self::from_json_str(&text),
        }
    }
}

#[derive(Clone)]
pub struct TransducerConfig {
    pub cleaning: CleaningConfig,
    pub budget: TokenCount,
    pub partition: PartitionConfig,
    pub scorer: Arc<dyn RelevanceScorer>,
    pub summarizer: Arc<dyn DomSummarizer>,
}

impl Default for TransducerConfig {
    fn default() -> Self {
        TransducerSettings::default().into()
    }
}

impl From<TransducerSettings> for TransducerConfig {
    fn from(s: TransducerSettings) -> Self {
        let scorer: Arc<dyn RelevanceScorer> = match s.scorer {
            ScorerKind::Lexical => Arc::new(LexicalScorer),
        };
        TransducerConfig {
            cleaning: s.cleaning,
            budget: s.budget.map(TokenCount).unwrap_or(TokenCount::UNLIMITED),
            partition: PartitionConfig {
                min_block_tokens: s.min_block_tokens,
            },
            scorer,
            summarizer: Arc::new(IdentitySummarizer),
        }
    }
}

impl TransducerConfig {
    pub fn with_budget(mut self, budget: TokenCount) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_summarizer(mut self, summarizer: Arc<dyn DomSummarizer>) -> Self {
        self.summarizer = summarizer;
        self
    }
}

impl fmt::Debug for TransducerConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransducerConfig")
            .field("cleaning", &self.cleaning)
            .field("budget", &self.budget)
            .field("partition", &self.partition)
            .field("scorer", &self.scorer.name())
            .finish_non_exhaustive()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TransduceError {
    #[error(transparent)]
    Encoding(#[from] IngestError),
    #[error(transparent)]
    Score(ScoreError),
    #[error(transparent)]
    Summarizer(#[from] SummarizerError),
}

/// Every intermediate of one transduction, in pipeline order.
#[derive(Debug, Clone)]
pub struct Transduction {
    pub raw: DomTree,
    pub cleaned: DomTree,
    pub blocks: BlockTree,
    /// True when the task had no keywords and pruning fell back to budget only.
    pub relevance_skipped: bool,
    pub kept: BTreeSet<BlockId>,
    pub pruned: DomTree,
    pub output: DomTree,
    pub pam: PageAffordanceModel,
}

/// Distills raw HTML into a [`PageAffordanceModel`].
pub fn transduce(
    raw: &[u8],
    source_url: Option<&str>,
    ctx: &TaskContext,
    config: &TransducerConfig,
) -> Result<PageAffordanceModel, TransduceError> {
    transduce_traced(raw, source_url, ctx, config).map(|t| t.pam)
}

/// As [`transduce`], also returning every stage's output.
///
/// Stages run strictly in order: parse, clean, partition, score, prune,
/// extract, summarize, encode. Each reads only what earlier stages produced.
pub fn transduce_traced(
    raw: &[u8],
    source_url: Option<&str>,
    ctx: &TaskContext,
    config: &TransducerConfig,
) -> Result<Transduction, TransduceError> {
    let raw_tree = parse_html(raw, source_url)?;
    let raw_tokens = count_tokens(&serialize(&raw_tree));

    let cleaned = clean(&raw_tree, &config.cleaning);
    let cleaned_tokens = count_tokens(&serialize(&cleaned));

    let partitioned = partition_blocks_with(&cleaned, &config.partition);
    let (blocks, relevance_skipped) = match score_blocks(&partitioned, ctx, config.scorer.as_ref()) {
        Ok(b) => (b, false),
        Err(ScoreError::EmptyTask) => (partitioned, true),
        Err(e) => return Err(TransduceError::Score(e)),
    };

    let kept = select_blocks(&blocks, config.budget);
    let pruned = prune_to(&cleaned, &blocks, &kept);
    let pruned_tokens = count_tokens(&serialize(&pruned));

    let affordances = extract_affordances(&pruned);
    let required = affordances.iter().map(|a| a.node_id).collect();
    let output = run_summarizer(config.summarizer.as_ref(), &pruned, ctx, &required)?;

    let compact = encode_compact(&output);
    let stats = ReductionStats::new(raw_tokens, cleaned_tokens, pruned_tokens, compact.token_count);

    let pam = PageAffordanceModel {
        source_url: raw_tree.source_url.clone(),
        title: cleaned.title(),
        affordances,
        blocks_kept: kept.iter().copied().collect(),
        blocks: blocks
            .blocks
            .iter()
            .filter(|b| kept.contains(&b.block_id))
            .cloned()
            .collect(),
        compact,
        stats,
    };
    Ok(Transduction {
        raw: raw_tree,
        cleaned,
        blocks,
        relevance_skipped,
        kept,
        pruned,
        output,
        pam,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom_transducer::affordance::AffordanceKind;

    const BOOKING: &str = r#"<!doctype html><html><head><title>Grand Hotel</title>
        <script>window.dataLayer=[];function gtag(){dataLayer.push(arguments)}</script></head>
        <body><header><nav><a href="/">Home</a></nav></header>
        <main><h1>Book a room</h1><form action="/book"><input name="guest"><input type="submit" value="Book"></form>
        <p>Your room has a thermostat. <a href="/things/room1" type="application/td+json">Smart Room Controls</a></p></main>
        <footer><div>Privacy policy and cookie statement for all visitors of this site</div></footer></body></html>"#;

    #[test]
    fn booking_page_keeps_room_link() {
        let cfg = TransducerConfig::default().with_budget(TokenCount(400));
        let pam = transduce(
            BOOKING.as_bytes(),
            Some("http://hotel.test/booking.html"),
            &TaskContext::new("book a hotel room"),
            &cfg,
        )
        .unwrap();
        assert_eq!(pam.title, "Grand Hotel");
        let link = pam
            .affordances
            .iter()
            .find(|a| a.label == "Smart Room Controls")
            .unwrap();
        assert_eq!(link.kind, AffordanceKind::Link);
        assert_eq!(link.target.as_deref(), Some("/things/room1"));
        assert_eq!(pam.source_url.as_deref(), Some("http://hotel.test/booking.html"));
    }

    #[test]
    fn blank_page() {
        let pam = transduce(b"", None, &TaskContext::new("anything"), &TransducerConfig::default()).unwrap();
        assert!(pam.affordances.is_empty());
        assert!(pam.stats.reduction_ratio >= 0.0);
        assert!(pam.blocks_kept.is_empty());
    }

    #[test]
    fn stats_are_monotone() {
        let t = transduce_traced(
            BOOKING.as_bytes(),
            None,
            &TaskContext::new("room"),
            &TransducerConfig::default().with_budget(TokenCount(0)),
        )
        .unwrap();
        let s = t.pam.stats;
        assert!(
            s.raw_tokens >= s.cleaned_tokens && s.cleaned_tokens >= s.pruned_tokens,
            "{s:?}"
        );
        assert!(s.compact_tokens < s.pruned_tokens);
        // footer prose is dropped under a zero budget
        assert!(!serialize(&t.pruned).contains("Privacy"));
    }

    #[test]
    fn empty_task_falls_back_to_budget_only() {
        let t = transduce_traced(
            BOOKING.as_bytes(),
            None,
            &TaskContext::new("the"),
            &TransducerConfig::default(),
        )
        .unwrap();
        assert!(t.relevance_skipped);
        assert_eq!(t.kept.len(), t.blocks.len());
    }

    #[test]
    fn deterministic() {
        let cfg = TransducerConfig::default().with_budget(TokenCount(50));
        let ctx = TaskContext::new("book hotel");
        let a = transduce(BOOKING.as_bytes(), None, &ctx, &cfg).unwrap();
        let b = transduce(BOOKING.as_bytes(), None, &ctx, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn settings_from_json_and_toml() {
        let j = TransducerSettings::from_json_str(r#"{"budget": 120, "cleaning": {"strip_comments": false}}"#).unwrap();
        assert_eq!(j.budget, Some(120));
        assert!(!j.cleaning.strip_comments);
        assert!(j.cleaning.strip_tags.contains("script"));
        let t = TransducerSettings::from_toml_str("budget = 7\nmin_block_tokens = 3\nscorer = \"lexical\"\n").unwrap();
        assert_eq!(t.min_block_tokens, 3);
        assert!(TransducerSettings::from_json_str(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn pam_json_field_names() {
        let pam = transduce(
            BOOKING.as_bytes(),
            None,
            &TaskContext::new("book"),
            &TransducerConfig::default(),
        )
        .unwrap();
        let v = serde_json::to_value(&pam).unwrap();
        for key in ["source_url", "title", "affordances", "blocks_kept", "compact", "stats"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert!(v["stats"]["reduction_ratio"].is_f64());
        let back: PageAffordanceModel = serde_json::from_value(v).unwrap();
        assert_eq!(back, pam);
    }
}
