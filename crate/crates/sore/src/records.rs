//! Line-delimited JSON records exchanged between stages and with external
//! systems. Every record is one JSON object per line.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sore_core::filter::{ArgumentMatch, DropReason, FilterDecision, RetentionStats, Verdict};
use sore_core::metrics::Prf;
use sore_core::oie::{OieSource, OpenTuple, RelationPhrase};
use sore_core::tradeoff::{
    check_span, structures_from_labeled, Modifier, RelationKind, RelationLabel, RelationStructure, Source, SpanLabel,
    TokenRange,
};
use sore_core::Span;

use crate::error::{Error, Result};
use crate::formats::read_text;

/// A 1-based line number and what was wrong with it.
pub type LineError = (usize, String);

/// Parses each non-blank line; returns the records and the 1-based line
/// numbers with their errors.
pub fn parse_jsonl<T: DeserializeOwned>(text: &str) -> (Vec<(usize, T)>, Vec<LineError>) {
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(r) => ok.push((i + 1, r)),
            Err(e) => bad.push((i + 1, e.to_string())),
        }
    }
    (ok, bad)
}

/// Strict reader for files written by the pipeline itself.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let (ok, bad) = parse_jsonl(&read_text(path)?);
    if let Some((line, e)) = bad.into_iter().next() {
        return Err(Error::format(path, line, e));
    }
    Ok(ok.into_iter().map(|(_, r)| r).collect())
}

pub fn to_jsonl<'a, T: Serialize + 'a>(records: impl IntoIterator<Item = &'a T>) -> String {
    let mut out = String::new();
    for r in records {
        // Serializing these plain structs cannot fail.
        let _ = writeln!(out, "{}", serde_json::to_string(r).expect("serializable record"));
    }
    out
}

/// Records skipped while loading an external file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub loaded: usize,
    pub skipped: usize,
    /// First few skip reasons, as `line N: reason`.
    pub reasons: Vec<String>,
}

impl Tally {
    pub fn skip(&mut self, line: usize, why: impl std::fmt::Display) {
        self.skipped += 1;
        if self.reasons.len() < 20 {
            self.reasons.push(format!("line {line}: {why}"));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanRecord {
    pub start: usize,
    pub end: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationRecord {
    pub label: String,
    /// Index into `spans`.
    pub governor: usize,
    pub dependent: usize,
}

/// Span-model output for one sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub doc_id: String,
    pub sent_id: String,
    pub tokens: Vec<String>,
    pub spans: Vec<SpanRecord>,
    pub relations: Vec<RelationRecord>,
}

impl PredictionRecord {
    fn structures(&self, max_width: usize) -> std::result::Result<Vec<RelationStructure>, String> {
        let n = self.tokens.len();
        let mut spans = Vec::with_capacity(self.spans.len());
        for s in &self.spans {
            let range = TokenRange::new(s.start, s.end);
            check_span(range, n, max_width).map_err(|e| e.to_string())?;
            let label: SpanLabel = s.label.parse()?;
            spans.push((range, label));
        }
        let mut rels = Vec::with_capacity(self.relations.len());
        for r in &self.relations {
            if r.governor >= spans.len() || r.dependent >= spans.len() {
                return Err(format!("relation endpoint out of range ({} spans)", spans.len()));
            }
            let kind: RelationKind = r.label.parse()?;
            rels.push((kind, r.governor, r.dependent));
        }
        let text_of = |r: TokenRange| self.tokens[r.start..r.end].join(" ");
        Ok(structures_from_labeled(
            &self.sent_id,
            &spans,
            &rels,
            text_of,
            Source::External,
        ))
    }
}

/// Loads span-model predictions, keyed by document. Records with spans
/// out of bounds, wider than `max_width`, or with unknown labels are
/// skipped and tallied.
pub fn load_external_predictions(
    path: &Path,
    max_width: usize,
) -> Result<(BTreeMap<String, Vec<RelationStructure>>, Tally)> {
    let (records, bad) = parse_jsonl::<PredictionRecord>(&read_text(path)?);
    let mut tally = Tally::default();
    for (line, e) in bad {
        tally.skip(line, e);
    }
    let mut out: BTreeMap<String, Vec<RelationStructure>> = BTreeMap::new();
    for (line, r) in records {
        match r.structures(max_width) {
            Ok(s) => {
                tally.loaded += 1;
                out.entry(r.doc_id.clone()).or_default().extend(s);
            }
            Err(e) => tally.skip(line, e),
        }
    }
    Ok((out, tally))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgRecord {
    pub start: usize,
    pub end: usize,
    pub text: String,
}

impl ArgRecord {
    pub fn from_span(s: &Span) -> Self {
        ArgRecord {
            start: s.start,
            end: s.end,
            text: s.text.clone(),
        }
    }

    pub fn to_span(&self, sent_id: &str) -> Span {
        Span {
            sent_id: sent_id.into(),
            start: self.start,
            end: self.end,
            text: self.text.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationText {
    pub text: String,
    /// Sentence positions of the relation words, when known.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tokens: Vec<usize>,
}

/// One Open IE tuple. Used for external input and for the pipeline's own
/// output, so builtin and external tuples are interchangeable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OieRecord {
    pub doc_id: String,
    pub sent_id: String,
    pub sentence_length: usize,
    #[serde(default)]
    pub confidence: Option<f64>,
    pub subject: ArgRecord,
    pub relation: RelationText,
    #[serde(default)]
    pub objects: Vec<ArgRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl OieRecord {
    pub fn from_tuple(t: &OpenTuple) -> Self {
        OieRecord {
            doc_id: t.doc_id.clone(),
            sent_id: t.sent_id.clone(),
            sentence_length: t.sentence_len,
            confidence: t.confidence,
            subject: ArgRecord::from_span(&t.subject),
            relation: RelationText {
                text: t.relation.text.clone(),
                tokens: t.relation.tokens.clone(),
            },
            objects: t.objects.iter().map(ArgRecord::from_span).collect(),
            source: Some(t.source.as_str().into()),
        }
    }

    pub fn to_tuple(&self) -> std::result::Result<OpenTuple, String> {
        let source = match &self.source {
            Some(s) => s.parse()?,
            None => OieSource::External,
        };
        let t = OpenTuple {
            doc_id: self.doc_id.clone(),
            sent_id: self.sent_id.clone(),
            sentence_len: self.sentence_length,
            subject: self.subject.to_span(&self.sent_id),
            relation: RelationPhrase {
                tokens: self.relation.tokens.clone(),
                text: self.relation.text.clone(),
            },
            objects: self.objects.iter().map(|o| o.to_span(&self.sent_id)).collect(),
            confidence: self.confidence,
            source,
        };
        t.validate().map_err(|e| e.to_string())?;
        Ok(t)
    }
}

/// Loads Open IE tuples keyed by document, skipping and tallying invalid
/// records.
pub fn load_oie(path: &Path) -> Result<(BTreeMap<String, Vec<OpenTuple>>, Tally)> {
    let (records, bad) = parse_jsonl::<OieRecord>(&read_text(path)?);
    let mut tally = Tally::default();
    for (line, e) in bad {
        tally.skip(line, e);
    }
    let mut out: BTreeMap<String, Vec<OpenTuple>> = BTreeMap::new();
    for (line, r) in records {
        match r.to_tuple() {
            Ok(t) => {
                tally.loaded += 1;
                out.entry(t.doc_id.clone()).or_default().push(t);
            }
            Err(e) => tally.skip(line, e),
        }
    }
    Ok((out, tally))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModifierRecord {
    pub governor: ArgRecord,
    pub dependent: ArgRecord,
}

/// A persisted trade-off structure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureRecord {
    pub doc_id: String,
    pub sent_id: String,
    pub source: String,
    pub label: String,
    pub trigger: ArgRecord,
    pub arguments: Vec<ArgRecord>,
    pub modifiers: Vec<ModifierRecord>,
}

impl StructureRecord {
    pub fn from_structure(doc_id: &str, s: &RelationStructure) -> Self {
        StructureRecord {
            doc_id: doc_id.into(),
            sent_id: s.sent_id().into(),
            source: s.source.as_str().into(),
            label: s.label.kind().as_str().into(),
            trigger: ArgRecord::from_span(&s.trigger),
            arguments: s.arguments.iter().map(ArgRecord::from_span).collect(),
            modifiers: s
                .modifiers
                .iter()
                .map(|m| ModifierRecord {
                    governor: ArgRecord::from_span(&m.governor),
                    dependent: ArgRecord::from_span(&m.dependent),
                })
                .collect(),
        }
    }

    pub fn to_structure(&self) -> std::result::Result<RelationStructure, String> {
        let label = match self.label.parse::<RelationKind>()? {
            RelationKind::TradeOff => RelationLabel::TradeOff,
            RelationKind::NotATradeOff => RelationLabel::NotATradeOff,
            RelationKind::ArgModifier => return Err("structure label cannot be ArgModifier".into()),
        };
        let sid = self.sent_id.as_str();
        Ok(RelationStructure {
            trigger: self.trigger.to_span(sid),
            label,
            arguments: self.arguments.iter().map(|a| a.to_span(sid)).collect(),
            modifiers: self
                .modifiers
                .iter()
                .map(|m| Modifier {
                    governor: m.governor.to_span(sid),
                    dependent: m.dependent.to_span(sid),
                })
                .collect(),
            source: self.source.parse()?,
        })
    }
}

/// An embedded trade-off argument. Its position in the file is the phrase
/// id used by the cluster model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgumentRecord {
    pub doc_id: String,
    pub sent_id: String,
    pub start: usize,
    pub end: usize,
    pub text: String,
    pub modifiers: Vec<String>,
    pub embeddable: bool,
    pub weight_mass: f64,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub oie_argument: ArgRecord,
    pub tradeoff_argument: ArgRecord,
    pub tradeoff_sent_id: String,
    pub cluster: usize,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub tuple: OieRecord,
    pub retained: bool,
    pub matched_argument: Option<MatchRecord>,
    pub drop_reason: Option<String>,
}

impl DecisionRecord {
    pub fn from_decision(d: &FilterDecision) -> Self {
        let (matched_argument, drop_reason) = match &d.verdict {
            Verdict::Retained(m) => (
                Some(MatchRecord {
                    oie_argument: ArgRecord::from_span(&m.oie_argument),
                    tradeoff_argument: ArgRecord::from_span(&m.tradeoff_argument),
                    tradeoff_sent_id: m.tradeoff_argument.sent_id.clone(),
                    cluster: m.cluster,
                    similarity: m.similarity,
                }),
                None,
            ),
            Verdict::Dropped(r) => (None, Some(r.as_str().to_string())),
        };
        DecisionRecord {
            tuple: OieRecord::from_tuple(&d.tuple),
            retained: d.retained(),
            matched_argument,
            drop_reason,
        }
    }

    pub fn to_decision(&self) -> std::result::Result<FilterDecision, String> {
        let tuple = self.tuple.to_tuple()?;
        let verdict = match (self.retained, &self.matched_argument, &self.drop_reason) {
            (true, Some(m), None) => Verdict::Retained(ArgumentMatch {
                oie_argument: m.oie_argument.to_span(&tuple.sent_id),
                tradeoff_argument: m.tradeoff_argument.to_span(&m.tradeoff_sent_id),
                cluster: m.cluster,
                similarity: m.similarity,
            }),
            (false, None, Some(r)) => {
                Verdict::Dropped(DropReason::parse(r).ok_or_else(|| format!("unknown drop reason `{r}`"))?)
            }
            _ => return Err("retained must match matched_argument/drop_reason".into()),
        };
        Ok(FilterDecision { tuple, verdict })
    }
}

/// Corpus retention counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRecord {
    pub extractions_before: usize,
    pub extractions_after: usize,
    pub sentences_before: usize,
    pub sentences_after: usize,
    pub extraction_rate: Option<f64>,
    pub sentence_rate: Option<f64>,
}

impl StatsRecord {
    pub fn from_stats(s: &RetentionStats) -> Self {
        let (sb, sa) = s.sentence_counts();
        StatsRecord {
            extractions_before: s.extractions_before,
            extractions_after: s.extractions_after,
            sentences_before: sb,
            sentences_after: sa,
            extraction_rate: s.extraction_rate(),
            sentence_rate: s.sentence_rate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub task: String,
    pub labeled: bool,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl MetricRecord {
    pub fn new(task: &str, labeled: bool, p: &Prf) -> Self {
        MetricRecord {
            task: task.into(),
            labeled,
            precision: p.precision,
            recall: p.recall,
            f1: p.f1,
            tp: p.true_pos,
            fp: p.false_pos,
            fn_: p.false_neg,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oie_record_round_trip() {
        let line = r#"{"doc_id":"d1","sent_id":"s1","sentence_length":9,"confidence":0.8,"subject":{"start":0,"end":1,"text":"digestion"},"relation":{"text":"prevents"},"objects":[{"start":2,"end":4,"text":"the bats"},{"start":4,"end":9,"text":"from falling into torpor quickly"}]}"#;
        let (recs, bad) = parse_jsonl::<OieRecord>(line);
        assert!(bad.is_empty());
        let t = recs[0].1.to_tuple().unwrap();
        assert_eq!(t.objects.len(), 2);
        assert_eq!(t.source, OieSource::External);
        let back = OieRecord::from_tuple(&t);
        assert_eq!(back.to_tuple().unwrap(), t);
    }

    #[test]
    fn oie_out_of_bounds_rejected() {
        let r = OieRecord {
            doc_id: "d".into(),
            sent_id: "s".into(),
            sentence_length: 3,
            confidence: None,
            subject: ArgRecord {
                start: 0,
                end: 1,
                text: "a".into(),
            },
            relation: RelationText {
                text: "r".into(),
                tokens: vec![],
            },
            objects: vec![ArgRecord {
                start: 2,
                end: 5,
                text: "x".into(),
            }],
            source: None,
        };
        assert!(r.to_tuple().is_err());
    }

    #[test]
    fn prediction_width_checked() {
        let rec = PredictionRecord {
            doc_id: "d".into(),
            sent_id: "s".into(),
            tokens: (0..25).map(|i| format!("w{i}")).collect(),
            spans: vec![
                SpanRecord {
                    start: 0,
                    end: 1,
                    label: "Trigger".into(),
                },
                SpanRecord {
                    start: 1,
                    end: 21,
                    label: "Keyphrase".into(),
                },
            ],
            relations: vec![],
        };
        assert!(rec.structures(14).is_err());
    }
}
