use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{CorpusError, ParsedSentence};
use crate::tradeoff::{BinaryRelation, LabeledSpan, RelationKind, SpanLabel, TokenRange};

/// A labeled character span (`T` line). Offsets are sentence-local and
/// counted in characters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldSpan {
    pub id: String,
    pub label: SpanLabel,
    pub char_start: usize,
    pub char_end: usize,
    pub text: String,
}

/// A directed relation between two spans (`R` line).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldRelation {
    pub id: String,
    pub label: RelationKind,
    pub governor: String,
    pub dependent: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GoldAnnotation {
    pub spans: Vec<GoldSpan>,
    pub relations: Vec<GoldRelation>,
}

/// Parses standoff `T`/`R` lines for a single sentence.
///
/// Other line types (attributes, notes, comments) are ignored. Every span's
/// text must equal the character slice of `sentence_text`, and every
/// relation must reference known span ids.
pub fn parse_standoff(span_lines: &str, sentence_text: &str) -> Result<GoldAnnotation, CorpusError> {
    let chars: Vec<char> = sentence_text.chars().collect();
    let mut ann = GoldAnnotation::default();

    for (lineno, line) in span_lines.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| CorpusError::Parse { line: lineno, message };
        match line.chars().next() {
            Some('T') => {
                let mut cols = line.splitn(3, '\t');
                let id = cols.next().unwrap_or_default().to_string();
                let body = cols.next().ok_or_else(|| parse_err("missing span body".into()))?;
                let text = cols.next().ok_or_else(|| parse_err("missing span text".into()))?;
                let mut parts = body.split(' ');
                let label = parts.next().unwrap_or_default();
                let label: SpanLabel = label.parse().map_err(parse_err)?;
                let offsets: Vec<&str> = parts.collect();
                if offsets.len() != 2 || offsets.iter().any(|o| o.contains(';')) {
                    return Err(parse_err(format!("unsupported offsets `{}`", offsets.join(" "))));
                }
                let start: usize = offsets[0]
                    .parse()
                    .map_err(|_| parse_err(format!("bad offset `{}`", offsets[0])))?;
                let end: usize = offsets[1]
                    .parse()
                    .map_err(|_| parse_err(format!("bad offset `{}`", offsets[1])))?;
                if start >= end || end > chars.len() {
                    return Err(CorpusError::Integrity {
                        span_id: id,
                        message: format!("offsets {start}..{end} outside sentence of {} chars", chars.len()),
                    });
                }
                let slice: String = chars[start..end].iter().collect();
                if slice != text {
                    return Err(CorpusError::Integrity {
                        span_id: id,
                        message: format!("text `{text}` does not match sentence slice `{slice}`"),
                    });
                }
                ann.spans.push(GoldSpan {
                    id,
                    label,
                    char_start: start,
                    char_end: end,
                    text: text.to_string(),
                });
            }
            Some('R') => {
                let mut cols = line.split('\t');
                let id = cols.next().unwrap_or_default().to_string();
                let body = cols.next().ok_or_else(|| parse_err("missing relation body".into()))?;
                let mut parts = body.split_whitespace();
                let label: RelationKind = parts.next().unwrap_or_default().parse().map_err(parse_err)?;
                let mut arg = |name: &str| -> Result<String, CorpusError> {
                    let part = parts.next().ok_or_else(|| parse_err(format!("missing {name}")))?;
                    part.strip_prefix(name)
                        .and_then(|p| p.strip_prefix(':'))
                        .map(str::to_string)
                        .ok_or_else(|| parse_err(format!("expected {name}:<id>, found `{part}`")))
                };
                let governor = arg("Arg1")?;
                let dependent = arg("Arg2")?;
                ann.relations.push(GoldRelation {
                    id,
                    label,
                    governor,
                    dependent,
                });
            }
            _ => {}
        }
    }

    let ids: BTreeSet<&str> = ann.spans.iter().map(|s| s.id.as_str()).collect();
    for r in &ann.relations {
        for end in [&r.governor, &r.dependent] {
            if !ids.contains(end.as_str()) {
                return Err(CorpusError::Reference {
                    relation_id: r.id.clone(),
                    span_id: end.clone(),
                });
            }
        }
    }
    Ok(ann)
}

impl GoldAnnotation {
    pub fn span(&self, id: &str) -> Option<&GoldSpan> {
        self.spans.iter().find(|s| s.id == id)
    }

    /// Maps every character span onto the sentence's tokens. Span boundaries
    /// must coincide with token boundaries.
    pub fn token_ranges(&self, sentence: &ParsedSentence) -> Result<BTreeMap<String, TokenRange>, CorpusError> {
        let offsets = sentence.char_offsets().ok_or_else(|| CorpusError::Validation {
            sent_id: sentence.sent_id().into(),
            message: "tokens do not align with sentence text".into(),
        })?;
        let mut out = BTreeMap::new();
        for s in &self.spans {
            let start = offsets.iter().position(|&(b, _)| b == s.char_start);
            let end = offsets.iter().position(|&(_, e)| e == s.char_end);
            match (start, end) {
                (Some(a), Some(b)) if a <= b => {
                    out.insert(s.id.clone(), TokenRange::new(a, b + 1));
                }
                _ => {
                    return Err(CorpusError::Integrity {
                        span_id: s.id.clone(),
                        message: format!(
                            "offsets {}..{} do not fall on token boundaries of {}",
                            s.char_start,
                            s.char_end,
                            sentence.sent_id()
                        ),
                    })
                }
            }
        }
        Ok(out)
    }

    /// Gold spans as token-level labeled spans.
    pub fn labeled_spans(&self, sentence: &ParsedSentence) -> Result<Vec<LabeledSpan>, CorpusError> {
        let ranges = self.token_ranges(sentence)?;
        Ok(self
            .spans
            .iter()
            .map(|s| LabeledSpan {
                sent_id: sentence.sent_id().into(),
                range: ranges[&s.id],
                label: s.label,
            })
            .collect())
    }

    /// Gold relations as token-level binary relations.
    pub fn binary_relations(&self, sentence: &ParsedSentence) -> Result<Vec<BinaryRelation>, CorpusError> {
        let ranges = self.token_ranges(sentence)?;
        Ok(self
            .relations
            .iter()
            .map(|r| BinaryRelation {
                sent_id: sentence.sent_id().into(),
                governor: ranges[&r.governor],
                label: r.label,
                dependent: ranges[&r.dependent],
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_trigger_span() {
        let ann = parse_standoff("T1\tTrigger 4 13\ttrade-off\n", "The trade-off between a and b").unwrap();
        assert_eq!(ann.spans.len(), 1);
        assert_eq!(ann.spans[0].label, SpanLabel::Trigger);
        assert_eq!((ann.spans[0].char_start, ann.spans[0].char_end), (4, 13));
    }

    #[test]
    fn dangling_reference() {
        let lines = "T1\tTrigger 4 13\ttrade-off\nR1\tTradeOff Arg1:T1 Arg2:T9\n";
        assert_eq!(
            parse_standoff(lines, "The trade-off between a and b"),
            Err(CorpusError::Reference {
                relation_id: "R1".into(),
                span_id: "T9".into()
            })
        );
    }

    #[test]
    fn text_mismatch_is_integrity_error() {
        let err = parse_standoff("T1\tTrigger 4 13\ttradeoff\n", "The trade-off between").unwrap_err();
        assert!(matches!(err, CorpusError::Integrity { .. }));
        let err = parse_standoff("T1\tTrigger 4 99\ttrade-off\n", "The trade-off").unwrap_err();
        assert!(matches!(err, CorpusError::Integrity { .. }));
    }

    #[test]
    fn unknown_label_rejected() {
        let err = parse_standoff("T1\tProtein 4 13\ttrade-off\n", "The trade-off").unwrap_err();
        assert!(matches!(err, CorpusError::Parse { line: 1, .. }));
    }

    #[test]
    fn correlation_with_shared_modifier() {
        let text = "We found a positive correlation between the need for energy storage and the presence of resilin in jumping.";
        let find = |s: &str| {
            let b = text.find(s).unwrap();
            (b, b + s.len())
        };
        let (t1, t2, t3, t4) = (
            find("correlation"),
            find("the need for energy storage"),
            find("the presence of resilin"),
            find("in jumping"),
        );
        let lines = alloc::format!(
            "T1\tTrigger {} {}\tcorrelation\n\
             T2\tKeyphrase {} {}\tthe need for energy storage\n\
             T3\tKeyphrase {} {}\tthe presence of resilin\n\
             T4\tKeyphrase {} {}\tin jumping\n\
             R1\tNot-a-Trade-Off Arg1:T1 Arg2:T2\n\
             R2\tNot-a-Trade-Off Arg1:T1 Arg2:T3\n\
             R3\tArg-Modifier Arg1:T2 Arg2:T4\n\
             R4\tArg-Modifier Arg1:T3 Arg2:T4\n\
             A1\tConfidence T1 High\n",
            t1.0,
            t1.1,
            t2.0,
            t2.1,
            t3.0,
            t3.1,
            t4.0,
            t4.1
        );
        let ann = parse_standoff(&lines, text).unwrap();
        assert_eq!(ann.spans.len(), 4);
        let count = |k| ann.relations.iter().filter(|r| r.label == k).count();
        assert_eq!(count(RelationKind::NotATradeOff), 2);
        assert_eq!(count(RelationKind::ArgModifier), 2);
        assert_eq!(count(RelationKind::TradeOff), 0);
    }
}
