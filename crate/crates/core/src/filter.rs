//! Cluster-based filtering of Open IE tuples against a document's
//! trade-off arguments.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Add;

use crate::cluster::{assign, ClusterModel};
use crate::embedding::{cosine, Embedder, PhraseVector};
use crate::oie::OpenTuple;
use crate::tradeoff::Span;

/// A trade-off argument with its modifiers and embedding (modifiers
/// already appended).
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffArgument {
    pub span: Span,
    pub modifiers: Vec<String>,
    pub vector: PhraseVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DropReason {
    NoTradeoffInDoc,
    NoClusterMatch,
    OnlyNoisyClusters,
    UnembeddableArguments,
    BelowSimilarityThreshold,
}

impl DropReason {
    pub fn as_str(self) -> &'static str {
        match self {
            DropReason::NoTradeoffInDoc => "no_tradeoff_in_doc",
            DropReason::NoClusterMatch => "no_cluster_match",
            DropReason::OnlyNoisyClusters => "only_noisy_clusters",
            DropReason::UnembeddableArguments => "unembeddable_arguments",
            DropReason::BelowSimilarityThreshold => "below_similarity_threshold",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            DropReason::NoTradeoffInDoc,
            DropReason::NoClusterMatch,
            DropReason::OnlyNoisyClusters,
            DropReason::UnembeddableArguments,
            DropReason::BelowSimilarityThreshold,
        ]
        .into_iter()
        .find(|r| r.as_str() == s)
    }
}

/// The best-scoring (OIE argument, trade-off argument) pair sharing a
/// cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ArgumentMatch {
    pub oie_argument: Span,
    pub tradeoff_argument: Span,
    pub cluster: usize,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Retained(ArgumentMatch),
    Dropped(DropReason),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterDecision {
    pub tuple: OpenTuple,
    pub verdict: Verdict,
}

impl FilterDecision {
    pub fn retained(&self) -> bool {
        matches!(self.verdict, Verdict::Retained(_))
    }

    pub fn matched(&self) -> Option<&ArgumentMatch> {
        match &self.verdict {
            Verdict::Retained(m) => Some(m),
            Verdict::Dropped(_) => None,
        }
    }

    pub fn drop_reason(&self) -> Option<DropReason> {
        match self.verdict {
            Verdict::Retained(_) => None,
            Verdict::Dropped(r) => Some(r),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FilterOptions {
    /// Drop matches whose cosine similarity falls below this value.
    pub cosine_threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FilterError {
    #[error("vector dimension {found} does not match the cluster model ({expected})")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("tuple from document {found} passed with document {expected}")]
    DocumentMismatch { expected: String, found: String },
}

/// Non-noisy clusters holding at least one embeddable trade-off argument.
pub fn active_clusters(args: &[TradeoffArgument], model: &ClusterModel) -> BTreeSet<usize> {
    args.iter()
        .filter_map(|a| assign(&a.vector, model).ok())
        .filter(|c| !model.noisy.contains(c))
        .collect()
}

/// Filters one document's tuples. OIE arguments are embedded without
/// modifiers. A pair whose cosine is undefined (a zero vector) scores 0.
pub fn filter_document(
    doc_id: &str,
    tuples: &[OpenTuple],
    args: &[TradeoffArgument],
    model: &ClusterModel,
    embedder: &Embedder<'_>,
    options: FilterOptions,
) -> Result<Vec<FilterDecision>, FilterError> {
    if embedder.dim() != model.dim {
        return Err(FilterError::DimensionMismatch {
            expected: model.dim,
            found: embedder.dim(),
        });
    }
    if let Some(a) = args.iter().find(|a| a.vector.dim() != model.dim) {
        return Err(FilterError::DimensionMismatch {
            expected: model.dim,
            found: a.vector.dim(),
        });
    }
    if let Some(t) = tuples.iter().find(|t| t.doc_id != doc_id) {
        return Err(FilterError::DocumentMismatch {
            expected: doc_id.into(),
            found: t.doc_id.clone(),
        });
    }

    let arg_clusters: Vec<Option<usize>> = args.iter().map(|a| assign(&a.vector, model).ok()).collect();
    let active = active_clusters(args, model);
    let doc_reason = if args.is_empty() {
        Some(DropReason::NoTradeoffInDoc)
    } else if active.is_empty() && arg_clusters.iter().any(Option::is_some) {
        Some(DropReason::OnlyNoisyClusters)
    } else if active.is_empty() {
        Some(DropReason::NoClusterMatch)
    } else {
        None
    };

    let decide = |tuple: &OpenTuple| -> Verdict {
        if let Some(r) = doc_reason {
            return Verdict::Dropped(r);
        }
        let mut any_embeddable = false;
        let mut best: Option<ArgumentMatch> = None;
        for oie_arg in tuple.arguments() {
            let v = embedder.embed(&oie_arg.text, &[]);
            let Ok(c) = assign(&v, model) else {
                continue;
            };
            any_embeddable = true;
            if !active.contains(&c) {
                continue;
            }
            for (a, ac) in args.iter().zip(&arg_clusters) {
                if *ac != Some(c) {
                    continue;
                }
                let sim = cosine(&v, &a.vector).unwrap_or(0.0);
                if best.as_ref().is_none_or(|b| sim > b.similarity) {
                    best = Some(ArgumentMatch {
                        oie_argument: oie_arg.clone(),
                        tradeoff_argument: a.span.clone(),
                        cluster: c,
                        similarity: sim,
                    });
                }
            }
        }
        match best {
            Some(m) => match options.cosine_threshold {
                Some(t) if m.similarity < t => Verdict::Dropped(DropReason::BelowSimilarityThreshold),
                _ => Verdict::Retained(m),
            },
            None if !any_embeddable => Verdict::Dropped(DropReason::UnembeddableArguments),
            None => Verdict::Dropped(DropReason::NoClusterMatch),
        }
    };

    Ok(tuples
        .iter()
        .map(|t| FilterDecision {
            tuple: t.clone(),
            verdict: decide(t),
        })
        .collect())
}

/// Extraction- and sentence-level counts before and after filtering.
/// Sentences are distinct `(doc_id, sent_id)` pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RetentionStats {
    pub extractions_before: usize,
    pub extractions_after: usize,
    pub sentences_before: BTreeSet<(String, String)>,
    pub sentences_after: BTreeSet<(String, String)>,
}

impl RetentionStats {
    pub fn sentence_counts(&self) -> (usize, usize) {
        (self.sentences_before.len(), self.sentences_after.len())
    }

    /// `None` when nothing was filtered.
    pub fn extraction_rate(&self) -> Option<f64> {
        ratio(self.extractions_after, self.extractions_before)
    }

    pub fn sentence_rate(&self) -> Option<f64> {
        ratio(self.sentences_after.len(), self.sentences_before.len())
    }
}

fn ratio(after: usize, before: usize) -> Option<f64> {
    (before > 0).then(|| after as f64 / before as f64)
}

impl Add for RetentionStats {
    type Output = RetentionStats;

    fn add(mut self, rhs: RetentionStats) -> RetentionStats {
        self.extractions_before += rhs.extractions_before;
        self.extractions_after += rhs.extractions_after;
        self.sentences_before.extend(rhs.sentences_before);
        self.sentences_after.extend(rhs.sentences_after);
        self
    }
}

pub fn retention_stats<'a, I>(decisions: I) -> RetentionStats
where
    I: IntoIterator<Item = &'a FilterDecision>,
{
    let mut s = RetentionStats::default();
    for d in decisions {
        let key = (d.tuple.doc_id.clone(), d.tuple.sent_id.clone());
        s.extractions_before += 1;
        s.sentences_before.insert(key.clone());
        if d.retained() {
            s.extractions_after += 1;
            s.sentences_after.insert(key);
        }
    }
    s
}

/// Retained decisions by similarity, highest first; ties keep input order.
pub fn rank_retained(decisions: &[FilterDecision]) -> Vec<&FilterDecision> {
    let mut out: Vec<&FilterDecision> = decisions.iter().filter(|d| d.retained()).collect();
    let sim = |d: &FilterDecision| d.matched().map_or(0.0, |m| m.similarity);
    out.sort_by(|a, b| sim(b).total_cmp(&sim(a)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oie::{OieSource, RelationPhrase};
    use alloc::string::ToString;
    use alloc::vec;

    fn span(sent: &str, start: usize, text: &str) -> Span {
        Span {
            sent_id: sent.into(),
            start,
            end: start + 1,
            text: text.into(),
        }
    }

    fn tuple(doc: &str, sent: &str, subj: &str) -> OpenTuple {
        OpenTuple {
            doc_id: doc.into(),
            sent_id: sent.into(),
            sentence_len: 3,
            subject: span(sent, 0, subj),
            relation: RelationPhrase {
                tokens: vec![1],
                text: "is".into(),
            },
            objects: vec![],
            confidence: None,
            source: OieSource::External,
        }
    }

    fn decision(sent: &str, sim: Option<f64>) -> FilterDecision {
        FilterDecision {
            tuple: tuple("d", sent, "x"),
            verdict: match sim {
                Some(similarity) => Verdict::Retained(ArgumentMatch {
                    oie_argument: span(sent, 0, "x"),
                    tradeoff_argument: span(sent, 0, "x"),
                    cluster: 0,
                    similarity,
                }),
                None => Verdict::Dropped(DropReason::NoClusterMatch),
            },
        }
    }

    #[test]
    fn stats_hand_count() {
        // 10 tuples over 4 sentences; 3 retained in 2 sentences.
        let plan = [
            ("s1", true),
            ("s1", true),
            ("s1", false),
            ("s2", true),
            ("s2", false),
            ("s3", false),
            ("s3", false),
            ("s4", false),
            ("s4", false),
            ("s4", false),
        ];
        let ds: Vec<_> = plan.iter().map(|&(s, r)| decision(s, r.then_some(0.5))).collect();
        let st = retention_stats(&ds);
        assert_eq!(st.extraction_rate(), Some(0.3));
        assert_eq!(st.sentence_rate(), Some(0.5));
        assert_eq!(retention_stats(&[]).extraction_rate(), None);
    }

    #[test]
    fn stats_add_is_union() {
        let a = retention_stats(&[decision("s1", Some(0.1))]);
        let b = retention_stats(&[decision("s1", None)]);
        let s = a.clone() + b.clone();
        assert_eq!(s, b + a);
        assert_eq!(s.sentence_counts(), (1, 1));
        assert_eq!(s.extractions_before, 2);
    }

    #[test]
    fn ranking_is_stable() {
        let ds = vec![
            decision("a", Some(0.9)),
            decision("b", Some(0.4)),
            decision("c", None),
            decision("d", Some(0.7)),
            decision("e", Some(0.4)),
        ];
        let order: Vec<_> = rank_retained(&ds).iter().map(|d| d.tuple.sent_id.to_string()).collect();
        assert_eq!(order, ["a", "d", "b", "e"]);
    }

    #[test]
    fn reason_names_round_trip() {
        for r in [
            DropReason::NoTradeoffInDoc,
            DropReason::NoClusterMatch,
            DropReason::OnlyNoisyClusters,
            DropReason::UnembeddableArguments,
            DropReason::BelowSimilarityThreshold,
        ] {
            assert_eq!(DropReason::parse(r.as_str()), Some(r));
        }
    }
}
