//! Candidate span enumeration and mention-score beam pruning.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::tradeoff::TokenRange;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredSpan {
    pub range: TokenRange,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PruneError {
    #[error("span {index} has non-finite score {score}")]
    NonFiniteScore { index: usize, score: f64 },
    #[error("beam ratio must be positive and finite, got {0}")]
    InvalidRatio(f64),
}

/// All spans of width `1..=min(max_width, n)` over an `n`-token sentence,
/// ordered by start, then width.
pub fn enumerate_spans(n: usize, max_width: usize) -> Vec<TokenRange> {
    let w = max_width.min(n);
    let mut out = Vec::with_capacity(span_count(n, max_width));
    for start in 0..n {
        for width in 1..=w {
            if start + width > n {
                break;
            }
            out.push(TokenRange::new(start, start + width));
        }
    }
    out
}

/// Closed form of `enumerate_spans(n, max_width).len()`.
pub fn span_count(n: usize, max_width: usize) -> usize {
    (1..=max_width.min(n)).map(|w| n - w + 1).sum()
}

/// `ceil(ratio * n)`, tolerant of floating-point noise in the product
/// (`0.7 * 10` is `7.000000000000001`).
pub fn beam_size(ratio: f64, n: usize) -> usize {
    let x = ratio * n as f64;
    libm::ceil(x - libm::fabs(x) * 1e-12).max(0.0) as usize
}

/// Keeps the `ceil(ratio * n)` highest-scoring spans (all of them if fewer
/// are given). Ties go to the earlier start, then the shorter span. The
/// result is in selection order.
pub fn prune_spans(scored: &[ScoredSpan], ratio: f64, n: usize) -> Result<Vec<TokenRange>, PruneError> {
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(PruneError::InvalidRatio(ratio));
    }
    if let Some((index, s)) = scored.iter().enumerate().find(|(_, s)| !s.score.is_finite()) {
        return Err(PruneError::NonFiniteScore { index, score: s.score });
    }
    let mut order: Vec<&ScoredSpan> = scored.iter().collect();
    order.sort_by(|a, b| rank(a, b));
    Ok(order.into_iter().take(beam_size(ratio, n)).map(|s| s.range).collect())
}

fn rank(a: &ScoredSpan, b: &ScoredSpan) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.range.start.cmp(&b.range.start))
        .then(a.range.width().cmp(&b.range.width()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(enumerate_spans(5, 14).len(), 15);
        assert_eq!(enumerate_spans(1, 14), [TokenRange::new(0, 1)]);
        assert_eq!(span_count(30, 14), 329);
        assert_eq!(enumerate_spans(0, 14).len(), 0);
        let e = enumerate_spans(3, 2);
        assert_eq!(
            e,
            [
                TokenRange::new(0, 1),
                TokenRange::new(0, 2),
                TokenRange::new(1, 2),
                TokenRange::new(1, 3),
                TokenRange::new(2, 3)
            ]
        );
    }

    #[test]
    fn beam_rounding() {
        assert_eq!(beam_size(0.8, 30), 24);
        assert_eq!(beam_size(0.7, 10), 7);
        assert_eq!(beam_size(0.8, 5), 4);
        assert_eq!(beam_size(0.8, 1), 1);
        assert_eq!(beam_size(0.01, 3), 1);
    }

    #[test]
    fn equal_scores_use_tie_break() {
        let scored: Vec<_> = enumerate_spans(5, 14)
            .into_iter()
            .rev()
            .map(|range| ScoredSpan { range, score: 1.0 })
            .collect();
        let kept = prune_spans(&scored, 0.8, 5).unwrap();
        assert_eq!(
            kept,
            [
                TokenRange::new(0, 1),
                TokenRange::new(0, 2),
                TokenRange::new(0, 3),
                TokenRange::new(0, 4)
            ]
        );
    }

    #[test]
    fn beam_larger_than_supply() {
        let scored: Vec<_> = (0..3)
            .map(|i| ScoredSpan {
                range: TokenRange::new(i, i + 1),
                score: i as f64,
            })
            .collect();
        assert_eq!(prune_spans(&scored, 0.8, 30).unwrap().len(), 3);
    }

    #[test]
    fn rejects_bad_input() {
        let s = [ScoredSpan {
            range: TokenRange::new(0, 1),
            score: f64::NAN,
        }];
        assert!(matches!(
            prune_spans(&s, 0.8, 1),
            Err(PruneError::NonFiniteScore { index: 0, .. })
        ));
        assert!(matches!(prune_spans(&[], 0.0, 1), Err(PruneError::InvalidRatio(_))));
    }
}
