//! Trigger-anchored trade-off structures.
//!
//! A structure is a trigger span governing two or more argument spans, plus
//! argument-modifier pairs. Structures come either from the rule-based
//! extractor over dependency parses or from an external model's labeled
//! spans and relations; both end up as [`RelationStructure`].

mod extract;
mod lexicon;
mod rules;

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub use extract::{structures_from_labeled, tradeoff_arguments, ArgumentWithModifiers, RuleExtractor};
pub use lexicon::{match_triggers, LexiconError, Polarity, TriggerEntry, TriggerLexicon, TriggerMatch};
pub use rules::{Rule, RuleKind, RuleTable};

use crate::corpus::ParsedSentence;

/// Half-open token range `[start, end)`, 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TokenRange {
    pub start: usize,
    pub end: usize,
}

impl TokenRange {
    pub const fn new(start: usize, end: usize) -> Self {
        TokenRange { start, end }
    }

    pub fn width(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn contains(&self, i: usize) -> bool {
        self.start <= i && i < self.end
    }

    pub fn overlaps(&self, other: &TokenRange) -> bool {
        self.start < other.end && other.start < self.end
    }
}

impl fmt::Display for TokenRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

/// A run of consecutive tokens in one sentence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub sent_id: String,
    pub start: usize,
    pub end: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpanError {
    #[error("span {start}..{end} outside sentence of {len} tokens")]
    OutOfBounds { start: usize, end: usize, len: usize },
    #[error("span {start}..{end} wider than {max} tokens")]
    TooWide { start: usize, end: usize, max: usize },
}

impl Span {
    /// Span over `range` of `sentence`, text taken from the tokens.
    pub fn from_sentence(sentence: &ParsedSentence, range: TokenRange) -> Result<Span, SpanError> {
        check_bounds(range, sentence.len())?;
        Ok(Span {
            sent_id: sentence.sent_id().into(),
            start: range.start,
            end: range.end,
            text: sentence.join(range),
        })
    }

    pub fn range(&self) -> TokenRange {
        TokenRange::new(self.start, self.end)
    }

    pub fn width(&self) -> usize {
        self.range().width()
    }
}

/// Bounds check: `0 <= start < end <= len`.
pub fn check_bounds(range: TokenRange, len: usize) -> Result<(), SpanError> {
    if range.start < range.end && range.end <= len {
        Ok(())
    } else {
        Err(SpanError::OutOfBounds {
            start: range.start,
            end: range.end,
            len,
        })
    }
}

/// Bounds plus maximum width.
pub fn check_span(range: TokenRange, len: usize, max_width: usize) -> Result<(), SpanError> {
    check_bounds(range, len)?;
    if range.width() > max_width {
        return Err(SpanError::TooWide {
            start: range.start,
            end: range.end,
            max: max_width,
        });
    }
    Ok(())
}

fn normalize_label(s: &str) -> String {
    s.chars()
        .filter(|c| !matches!(c, '-' | '_' | ' '))
        .flat_map(char::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SpanLabel {
    Trigger,
    Keyphrase,
}

impl SpanLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            SpanLabel::Trigger => "Trigger",
            SpanLabel::Keyphrase => "Keyphrase",
        }
    }
}

impl FromStr for SpanLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match normalize_label(s).as_str() {
            "trigger" => Ok(SpanLabel::Trigger),
            "keyphrase" => Ok(SpanLabel::Keyphrase),
            _ => Err(alloc::format!("unknown span label `{s}`")),
        }
    }
}

impl fmt::Display for SpanLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Label of a binary relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelationKind {
    TradeOff,
    NotATradeOff,
    ArgModifier,
}

impl RelationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RelationKind::TradeOff => "TradeOff",
            RelationKind::NotATradeOff => "NotATradeOff",
            RelationKind::ArgModifier => "ArgModifier",
        }
    }
}

impl FromStr for RelationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match normalize_label(s).as_str() {
            "tradeoff" => Ok(RelationKind::TradeOff),
            "notatradeoff" => Ok(RelationKind::NotATradeOff),
            "argmodifier" | "argumentmodifier" => Ok(RelationKind::ArgModifier),
            _ => Err(alloc::format!("unknown relation label `{s}`")),
        }
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Label of a whole trigger-anchored structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelationLabel {
    TradeOff,
    NotATradeOff,
}

impl RelationLabel {
    pub fn kind(self) -> RelationKind {
        match self {
            RelationLabel::TradeOff => RelationKind::TradeOff,
            RelationLabel::NotATradeOff => RelationKind::NotATradeOff,
        }
    }
}

impl fmt::Display for RelationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind().as_str())
    }
}

impl FromStr for RelationLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.parse::<RelationKind>()? {
            RelationKind::TradeOff => Ok(RelationLabel::TradeOff),
            RelationKind::NotATradeOff => Ok(RelationLabel::NotATradeOff),
            RelationKind::ArgModifier => Err(alloc::format!("`{s}` is not a structure label")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Source {
    Rbs,
    External,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Rbs => "rbs",
            Source::External => "external",
        }
    }
}

impl FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rbs" => Ok(Source::Rbs),
            "external" => Ok(Source::External),
            _ => Err(alloc::format!("unknown source `{s}`")),
        }
    }
}

/// An argument-modifier pair. The governor is an argument or the dependent
/// of another modifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Modifier {
    pub governor: Span,
    pub dependent: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationStructure {
    pub trigger: Span,
    pub label: RelationLabel,
    pub arguments: Vec<Span>,
    pub modifiers: Vec<Modifier>,
    pub source: Source,
}

impl RelationStructure {
    pub fn sent_id(&self) -> &str {
        &self.trigger.sent_id
    }

    /// Decomposes the structure into trigger-argument and argument-modifier
    /// binary relations.
    pub fn binary_relations(&self) -> Vec<BinaryRelation> {
        let sent_id = &self.trigger.sent_id;
        let mut out: Vec<BinaryRelation> = self
            .arguments
            .iter()
            .map(|a| BinaryRelation {
                sent_id: sent_id.clone(),
                governor: self.trigger.range(),
                label: self.label.kind(),
                dependent: a.range(),
            })
            .collect();
        out.extend(self.modifiers.iter().map(|m| BinaryRelation {
            sent_id: sent_id.clone(),
            governor: m.governor.range(),
            label: RelationKind::ArgModifier,
            dependent: m.dependent.range(),
        }));
        out
    }

    /// Trigger and argument spans with labels, then distinct modifier spans
    /// as key-phrases.
    pub fn labeled_spans(&self) -> Vec<LabeledSpan> {
        let sent_id = &self.trigger.sent_id;
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let mut push = |range: TokenRange, label| {
            if seen.insert((range, label)) {
                out.push(LabeledSpan {
                    sent_id: sent_id.clone(),
                    range,
                    label,
                });
            }
        };
        push(self.trigger.range(), SpanLabel::Trigger);
        for a in &self.arguments {
            push(a.range(), SpanLabel::Keyphrase);
        }
        for m in &self.modifiers {
            push(m.dependent.range(), SpanLabel::Keyphrase);
        }
        out
    }
}

/// A token range with a span label, keyed by sentence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabeledSpan {
    pub sent_id: String,
    pub range: TokenRange,
    pub label: SpanLabel,
}

/// `<governor, label, dependent>` over token ranges of one sentence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BinaryRelation {
    pub sent_id: String,
    pub governor: TokenRange,
    pub label: RelationKind,
    pub dependent: TokenRange,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_spellings() {
        for s in ["Trade-Off", "TradeOff", "trade_off", "Trade-off"] {
            assert_eq!(s.parse::<RelationKind>().unwrap(), RelationKind::TradeOff);
        }
        assert_eq!(
            "Not-a-Trade-Off".parse::<RelationKind>().unwrap(),
            RelationKind::NotATradeOff
        );
        assert_eq!(
            "Arg-Modifier".parse::<RelationKind>().unwrap(),
            RelationKind::ArgModifier
        );
        assert_eq!("KeyPhrase".parse::<SpanLabel>().unwrap(), SpanLabel::Keyphrase);
        assert!("Cause".parse::<RelationKind>().is_err());
        assert!("ArgModifier".parse::<RelationLabel>().is_err());
    }

    #[test]
    fn bounds() {
        assert!(check_span(TokenRange::new(0, 14), 20, 14).is_ok());
        assert!(matches!(
            check_span(TokenRange::new(0, 15), 20, 14),
            Err(SpanError::TooWide { .. })
        ));
        assert!(check_span(TokenRange::new(3, 3), 20, 14).is_err());
        assert!(check_span(TokenRange::new(18, 21), 20, 14).is_err());
    }
}
