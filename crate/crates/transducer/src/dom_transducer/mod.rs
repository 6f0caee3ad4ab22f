//! The DOM transduction pipeline: clean, partition into blocks, score,
//! prune under a token budget, extract affordances and encode compactly.

mod affordance;
mod blocks;
mod clean;
mod compact;
mod pipeline;
mod prune;
mod score;
mod summarize;

pub use affordance::{affordance_for, classify, extract_affordances, is_interactive, AffordanceKind, AffordanceNode};
pub use blocks::{
    partition_blocks, partition_blocks_with, Block, BlockId, BlockTree, PartitionConfig, BLOCK_CONTAINERS,
    SUMMARY_CHARS,
};
pub use clean::{clean, CleaningConfig};
pub use compact::{
    decode_compact, decode_str, encode_compact, encoded_text, CompactEncoding, SyntaxError, TEXT_CHARS,
    TRUNCATION_MARKER,
};
pub use pipeline::{
    transduce, transduce_traced, ConfigError, PageAffordanceModel, ReductionStats, ScorerKind, TransduceError,
    TransducerConfig, TransducerSettings, Transduction,
};
pub use prune::{prune, prune_to, select_blocks};
pub use score::{score_blocks, terms, LexicalScorer, RelevanceScorer, ScoreError, TaskContext, INTERACTIVE_BONUS};
pub use summarize::{run_summarizer, DomSummarizer, IdentitySummarizer, SummarizerError};
