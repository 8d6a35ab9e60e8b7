//! Index-based view of a dependency tree. All positions are 0-based.

use alloc::vec;
use alloc::vec::Vec;

use crate::corpus::{ParsedSentence, Token};
use crate::tradeoff::TokenRange;

pub struct DepTree<'a> {
    tokens: &'a [Token],
    children: Vec<Vec<usize>>,
}

impl<'a> DepTree<'a> {
    pub fn new(sentence: &'a ParsedSentence) -> Self {
        let tokens = sentence.tokens();
        let mut children = vec![Vec::new(); tokens.len()];
        for (i, t) in tokens.iter().enumerate() {
            if t.head > 0 {
                children[t.head - 1].push(i);
            }
        }
        DepTree { tokens, children }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn token(&self, i: usize) -> &'a Token {
        &self.tokens[i]
    }

    pub fn head(&self, i: usize) -> Option<usize> {
        self.tokens[i].head.checked_sub(1)
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    /// Children of `i` whose relation (without subtype) is `deprel`.
    pub fn children_with<'s>(&'s self, i: usize, deprel: &'s str) -> impl Iterator<Item = usize> + 's {
        self.children[i]
            .iter()
            .copied()
            .filter(move |&c| self.tokens[c].base_deprel() == deprel)
    }

    /// The syntactic head of a token range: the first token whose governor
    /// lies outside the range.
    pub fn range_head(&self, range: TokenRange) -> usize {
        (range.start..range.end)
            .find(|&i| self.head(i).is_none_or(|h| !range.contains(h)))
            .unwrap_or(range.start)
    }

    /// Tokens reachable from `root` following only edges into children for
    /// which `follow` is true. The root itself is always included.
    pub fn reachable(&self, root: usize, mut follow: impl FnMut(usize) -> bool) -> Vec<bool> {
        let mut mask = vec![false; self.tokens.len()];
        let mut stack = vec![root];
        mask[root] = true;
        while let Some(n) = stack.pop() {
            for &c in &self.children[n] {
                if !mask[c] && follow(c) {
                    mask[c] = true;
                    stack.push(c);
                }
            }
        }
        mask
    }

    /// Full subtree of `root`.
    pub fn subtree(&self, root: usize) -> Vec<bool> {
        self.reachable(root, |_| true)
    }

    /// Widest contiguous run of `mask` around `anchor`, with punctuation
    /// trimmed from both edges and the width capped at `max_width` by
    /// dropping tokens from the side farther from the anchor.
    pub fn phrase(&self, anchor: usize, mask: &[bool], max_width: usize) -> TokenRange {
        let mut start = anchor;
        while start > 0 && mask[start - 1] {
            start -= 1;
        }
        let mut end = anchor + 1;
        while end < mask.len() && mask[end] {
            end += 1;
        }
        while start < anchor && self.tokens[start].upos == "PUNCT" {
            start += 1;
        }
        while end - 1 > anchor && self.tokens[end - 1].upos == "PUNCT" {
            end -= 1;
        }
        let max_width = max_width.max(1);
        while end - start > max_width {
            if anchor - start >= end - 1 - anchor {
                start += 1;
            } else {
                end -= 1;
            }
        }
        TokenRange::new(start, end)
    }
}
