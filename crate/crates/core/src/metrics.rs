//! Exact-match precision/recall/F1 and Cohen's kappa.
//!
//! Corpus scores are micro-averaged: counts are pooled over all sentences
//! before the ratios are taken.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Add;

use crate::tradeoff::{BinaryRelation, LabeledSpan, RelationStructure, SpanLabel, TokenRange};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Prf {
    pub fn from_counts(true_pos: usize, false_pos: usize, false_neg: usize) -> Self {
        let precision = ratio(true_pos, true_pos + false_pos);
        let recall = ratio(true_pos, true_pos + false_neg);
        let f1 = ratio(2 * true_pos, 2 * true_pos + false_pos + false_neg);
        Prf {
            precision,
            recall,
            f1,
            true_pos,
            false_pos,
            false_neg,
        }
    }
}

impl Add for Prf {
    type Output = Prf;

    fn add(self, o: Prf) -> Prf {
        Prf::from_counts(
            self.true_pos + o.true_pos,
            self.false_pos + o.false_pos,
            self.false_neg + o.false_neg,
        )
    }
}

fn score_sets<T: Ord>(pred: &BTreeSet<T>, gold: &BTreeSet<T>) -> Prf {
    let tp = pred.intersection(gold).count();
    Prf::from_counts(tp, pred.len() - tp, gold.len() - tp)
}

/// Exact-boundary span scoring. With `labeled`, the span label must match
/// too. Duplicate spans count once.
pub fn score_spans(pred: &[LabeledSpan], gold: &[LabeledSpan], labeled: bool) -> Prf {
    type Key = (String, TokenRange, Option<SpanLabel>);
    let key = |s: &LabeledSpan| -> Key { (s.sent_id.clone(), s.range, labeled.then_some(s.label)) };
    let p: BTreeSet<Key> = pred.iter().map(key).collect();
    let g: BTreeSet<Key> = gold.iter().map(key).collect();
    score_sets(&p, &g)
}

/// Binary relations match when both endpoints and the label match exactly.
pub fn score_binary(pred: &[BinaryRelation], gold: &[BinaryRelation]) -> Prf {
    let p: BTreeSet<&BinaryRelation> = pred.iter().collect();
    let g: BTreeSet<&BinaryRelation> = gold.iter().collect();
    score_sets(&p, &g)
}

/// Decomposes predicted structures into binary relations and scores them.
pub fn score_relations(pred: &[RelationStructure], gold: &[BinaryRelation]) -> Prf {
    let p: Vec<BinaryRelation> = pred.iter().flat_map(|s| s.binary_relations()).collect();
    score_binary(&p, gold)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KappaError {
    #[error("label sequences differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("label sequences are empty")]
    Empty,
}

/// Cohen's kappa, `(p_o - p_e) / (1 - p_e)`. When chance agreement is
/// total (both raters constant on the same label) the result is 1.
pub fn cohen_kappa<T: Ord>(a: &[T], b: &[T]) -> Result<f64, KappaError> {
    if a.len() != b.len() {
        return Err(KappaError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(KappaError::Empty);
    }
    let n = a.len() as f64;
    let observed = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / n;
    let mut ca: BTreeMap<&T, usize> = BTreeMap::new();
    let mut cb: BTreeMap<&T, usize> = BTreeMap::new();
    for (x, y) in a.iter().zip(b) {
        *ca.entry(x).or_default() += 1;
        *cb.entry(y).or_default() += 1;
    }
    let expected: f64 = ca
        .iter()
        .map(|(label, &c)| (c as f64 / n) * (cb.get(label).copied().unwrap_or(0) as f64 / n))
        .sum();
    if expected >= 1.0 {
        return Ok(if observed >= 1.0 { 1.0 } else { 0.0 });
    }
    Ok((observed - expected) / (1.0 - expected))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn ls(sent: &str, s: usize, e: usize, label: SpanLabel) -> LabeledSpan {
        LabeledSpan {
            sent_id: sent.into(),
            range: TokenRange::new(s, e),
            label,
        }
    }

    #[test]
    fn identity_and_off_by_one() {
        let gold = vec![ls("a", 0, 2, SpanLabel::Trigger), ls("a", 3, 5, SpanLabel::Keyphrase)];
        let p = score_spans(&gold, &gold, true);
        assert_eq!((p.precision, p.recall, p.f1), (1.0, 1.0, 1.0));
        let shifted: Vec<_> = gold
            .iter()
            .map(|s| ls("a", s.range.start, s.range.end + 1, s.label))
            .collect();
        assert_eq!(score_spans(&shifted, &gold, false).f1, 0.0);
    }

    #[test]
    fn half_right() {
        let gold = vec![ls("a", 0, 2, SpanLabel::Keyphrase), ls("a", 3, 5, SpanLabel::Keyphrase)];
        let pred = vec![ls("a", 0, 2, SpanLabel::Keyphrase), ls("a", 6, 7, SpanLabel::Keyphrase)];
        let p = score_spans(&pred, &gold, true);
        assert_eq!((p.true_pos, p.false_pos, p.false_neg), (1, 1, 1));
        assert_eq!((p.precision, p.recall, p.f1), (0.5, 0.5, 0.5));
    }

    #[test]
    fn labels_matter_only_when_labeled() {
        let gold = vec![ls("a", 0, 2, SpanLabel::Keyphrase)];
        let pred = vec![ls("a", 0, 2, SpanLabel::Trigger)];
        assert_eq!(score_spans(&pred, &gold, false).f1, 1.0);
        assert_eq!(score_spans(&pred, &gold, true).f1, 0.0);
    }

    #[test]
    fn empty_predictions() {
        let gold = vec![ls("a", 0, 2, SpanLabel::Keyphrase)];
        let p = score_spans(&[], &gold, true);
        assert_eq!((p.precision, p.recall, p.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(cohen_kappa(&["A", "B", "A"], &["A", "B", "A"]).unwrap(), 1.0);
        assert_eq!(cohen_kappa(&["A", "A", "B", "B"], &["B", "B", "A", "A"]).unwrap(), -1.0);
        assert!((cohen_kappa(&["A", "B", "A", "B"], &["A", "B", "B", "B"]).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(cohen_kappa(&["A", "A"], &["A", "A"]).unwrap(), 1.0);
        assert_eq!(cohen_kappa(&["A"], &["A", "B"]), Err(KappaError::LengthMismatch(1, 2)));
        assert_eq!(cohen_kappa::<u8>(&[], &[]), Err(KappaError::Empty));
    }

    #[test]
    fn add_pools_counts() {
        let a = Prf::from_counts(1, 1, 0);
        let b = Prf::from_counts(1, 0, 2);
        let c = a + b;
        assert_eq!((c.true_pos, c.false_pos, c.false_neg), (2, 1, 2));
        assert!((c.precision - 2.0 / 3.0).abs() < 1e-15);
    }
}
