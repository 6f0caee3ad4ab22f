use std::iter::Sum;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

/// Number of tokens under the canonical tokenizer.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenCount(pub u64);

impl TokenCount {
    pub const UNLIMITED: TokenCount = TokenCount(u64::MAX);

    pub fn get(self) -> u64 {
        self.0
    }
}

impl Add for TokenCount {
    type Output = TokenCount;
    fn add(self, rhs: TokenCount) -> TokenCount {
        TokenCount(self.0.saturating_add(rhs.0))
    }
}

impl AddAssign for TokenCount {
    fn add_assign(&mut self, rhs: TokenCount) {
        *self = *self + rhs;
    }
}

impl Sum for TokenCount {
    fn sum<I: Iterator<Item = TokenCount>>(iter: I) -> Self {
        iter.fold(TokenCount(0), Add::add)
    }
}

/// Characters that always form a token on their own.
pub const SPLIT_CHARS: [char; 6] = ['<', '>', '=', '"', '/', ';'];

/// Canonical token count.
///
/// The text is split on Unicode whitespace; within each piece every one of
/// `< > = " / ;` is its own token and each maximal run of other characters
/// is one token. `<p>hi</p>` is 8 tokens.
pub fn count_tokens(text: &str) -> TokenCount {
    let mut n = 0u64;
    for word in text.split_whitespace() {
        let mut in_run = false;
        for c in word.chars() {
            if SPLIT_CHARS.contains(&c) {
                n += 1;
                in_run = false;
            } else if !in_run {
                n += 1;
                in_run = true;
            }
        }
    }
    TokenCount(n)
}

/// Swappable token counter for reporting. Reduction statistics always use
/// [`CanonicalTokenizer`] so they stay reproducible.
pub trait Tokenizer {
    fn count(&self, text: &str) -> TokenCount;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CanonicalTokenizer;

impl Tokenizer for CanonicalTokenizer {
    fn count(&self, text: &str) -> TokenCount {
        count_tokens(text)
    }
}
