use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::str::FromStr;

use super::{Span, TokenRange};
use crate::corpus::ParsedSentence;

const BUNDLED: &str = include_str!("../../data/triggers.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    /// The trigger signals a trade-off on its own.
    TradeOff,
    /// Trade-off only when qualified (e.g. "negative correlation").
    Ambiguous,
}

impl Polarity {
    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::TradeOff => "tradeoff",
            Polarity::Ambiguous => "ambiguous",
        }
    }
}

impl FromStr for Polarity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tradeoff" => Ok(Polarity::TradeOff),
            "ambiguous" => Ok(Polarity::Ambiguous),
            _ => Err(format!("unknown polarity `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriggerEntry {
    /// Lowercase tokens, 1 to 3 of them.
    pub tokens: Vec<String>,
    pub polarity: Polarity,
}

impl TriggerEntry {
    pub fn phrase(&self) -> String {
        self.tokens.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LexiconError {
    #[error("lexicon line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("lexicon has no trigger entries")]
    Empty,
}

/// Trigger phrases plus qualifier words that turn an ambiguous trigger into
/// a trade-off trigger.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriggerLexicon {
    entries: Vec<TriggerEntry>,
    qualifiers: BTreeSet<String>,
}

impl TriggerLexicon {
    pub fn new(entries: Vec<TriggerEntry>, qualifiers: BTreeSet<String>) -> Result<Self, LexiconError> {
        if entries.is_empty() {
            return Err(LexiconError::Empty);
        }
        let mut seen = BTreeSet::new();
        for (i, e) in entries.iter().enumerate() {
            let line = i + 1;
            if e.tokens.is_empty() || e.tokens.len() > 3 {
                return Err(LexiconError::Line {
                    line,
                    message: format!("`{}` must have 1 to 3 tokens", e.phrase()),
                });
            }
            if !seen.insert(e.tokens.clone()) {
                return Err(LexiconError::Line {
                    line,
                    message: format!("duplicate entry `{}`", e.phrase()),
                });
            }
        }
        Ok(TriggerLexicon { entries, qualifiers })
    }

    /// Parses `phrase<TAB>polarity` lines. Polarity is `tradeoff` or
    /// `ambiguous`; a `qualifier` line registers a qualifier word instead of
    /// a trigger. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut entries = Vec::new();
        let mut qualifiers = BTreeSet::new();
        let mut seen = BTreeSet::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let err = |message: String| LexiconError::Line { line: line_no, message };
            let (phrase, kind) = line
                .split_once('\t')
                .ok_or_else(|| err("expected `phrase<TAB>polarity`".into()))?;
            let tokens: Vec<String> = phrase.split_whitespace().map(str::to_lowercase).collect();
            let kind = kind.trim();
            if kind == "qualifier" {
                if tokens.len() != 1 {
                    return Err(err(format!("qualifier `{phrase}` must be a single token")));
                }
                qualifiers.insert(tokens[0].clone());
                continue;
            }
            let polarity: Polarity = kind.parse().map_err(err)?;
            if tokens.is_empty() || tokens.len() > 3 {
                return Err(err(format!("`{phrase}` must have 1 to 3 tokens")));
            }
            if !seen.insert(tokens.clone()) {
                return Err(err(format!("duplicate entry `{phrase}`")));
            }
            entries.push(TriggerEntry { tokens, polarity });
        }
        TriggerLexicon::new(entries, qualifiers)
    }

    /// The lexicon shipped with the crate.
    pub fn bundled() -> Self {
        TriggerLexicon::parse(BUNDLED).expect("bundled lexicon is valid")
    }

    pub fn entries(&self) -> &[TriggerEntry] {
        &self.entries
    }

    pub fn is_qualifier(&self, word: &str) -> bool {
        self.qualifiers.contains(word)
    }

    /// Serializes back to the line format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&e.phrase());
            out.push('\t');
            out.push_str(e.polarity.as_str());
            out.push('\n');
        }
        for q in &self.qualifiers {
            out.push_str(q);
            out.push_str("\tqualifier\n");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriggerMatch {
    pub span: Span,
    pub polarity: Polarity,
}

/// Finds non-overlapping lexicon matches. A token matches an entry token when
/// its lowercased surface or lemma equals it. Longer matches win, then
/// leftmost ones; results are in sentence order.
pub fn match_triggers(sentence: &ParsedSentence, lexicon: &TriggerLexicon) -> Vec<TriggerMatch> {
    let toks = sentence.tokens();
    let lower: Vec<(String, String)> = toks
        .iter()
        .map(|t| (t.surface.to_lowercase(), t.lemma.to_lowercase()))
        .collect();

    let mut candidates: Vec<(TokenRange, Polarity)> = Vec::new();
    for e in lexicon.entries() {
        let n = e.tokens.len();
        if n > toks.len() {
            continue;
        }
        for start in 0..=toks.len() - n {
            let hit = e
                .tokens
                .iter()
                .zip(&lower[start..start + n])
                .all(|(want, (surface, lemma))| want == surface || want == lemma);
            if hit {
                candidates.push((TokenRange::new(start, start + n), e.polarity));
            }
        }
    }
    // Longest first, then leftmost; the entry order settles exact duplicates.
    candidates.sort_by(|a, b| b.0.width().cmp(&a.0.width()).then(a.0.start.cmp(&b.0.start)));

    let mut taken: Vec<(TokenRange, Polarity)> = Vec::new();
    for (range, polarity) in candidates {
        if taken.iter().all(|(r, _)| !r.overlaps(&range)) {
            taken.push((range, polarity));
        }
    }
    taken.sort_by_key(|(r, _)| r.start);
    taken
        .into_iter()
        .map(|(range, polarity)| TriggerMatch {
            span: Span {
                sent_id: sentence.sent_id().to_string(),
                start: range.start,
                end: range.end,
                text: sentence.join(range),
            },
            polarity,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Section, Token};

    fn flat(words: &[&str]) -> ParsedSentence {
        let tokens = words
            .iter()
            .enumerate()
            .map(|(i, w)| Token::new(i + 1, w, &w.to_lowercase(), "X", if i == 0 { 0 } else { 1 }, "dep"))
            .collect();
        ParsedSentence::new("s1", Section::Other, tokens, None).unwrap()
    }

    #[test]
    fn simple_trigger() {
        let s = flat(&[
            "There",
            "is",
            "a",
            "trade-off",
            "between",
            "safety",
            "and",
            "efficiency",
        ]);
        let m = match_triggers(&s, &TriggerLexicon::bundled());
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].span.text, "trade-off");
        assert_eq!(m[0].span.range(), TokenRange::new(3, 4));
        assert_eq!(m[0].polarity, Polarity::TradeOff);
    }

    #[test]
    fn longest_match_wins() {
        let s = flat(&["a", "negative", "correlation", "between", "X", "and", "Y"]);
        let m = match_triggers(&s, &TriggerLexicon::bundled());
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].span.text, "negative correlation");
        assert_eq!(m[0].polarity, Polarity::TradeOff);
    }

    #[test]
    fn no_match() {
        let s = flat(&["Cats", "sleep", "a", "lot"]);
        assert!(match_triggers(&s, &TriggerLexicon::bundled()).is_empty());
    }

    #[test]
    fn lemma_matching_and_case() {
        let mut s = flat(&["Trade-offs", "abound"]);
        // lemma differs from surface
        let mut toks = s.tokens().to_vec();
        toks[0].lemma = "trade-off".into();
        s = ParsedSentence::new("s1", Section::Other, toks, None).unwrap();
        assert_eq!(match_triggers(&s, &TriggerLexicon::bundled()).len(), 1);
    }

    #[test]
    fn tie_break_leftmost() {
        let lex = TriggerLexicon::parse("a b\ttradeoff\nb c\tambiguous\n").unwrap();
        let m = match_triggers(&flat(&["a", "b", "c"]), &lex);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].span.range(), TokenRange::new(0, 2));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            TriggerLexicon::parse("x\ttradeoff\nx\ttradeoff\n"),
            Err(LexiconError::Line { line: 2, .. })
        ));
        assert!(TriggerLexicon::parse("a b c d\ttradeoff\n").is_err());
        assert!(TriggerLexicon::parse("x\tmaybe\n").is_err());
        assert_eq!(TriggerLexicon::parse("# nothing\n"), Err(LexiconError::Empty));
    }

    #[test]
    fn text_round_trip() {
        let lex = TriggerLexicon::bundled();
        assert_eq!(TriggerLexicon::parse(&lex.to_text()).unwrap(), lex);
        assert!(lex.is_qualifier("negative"));
    }
}
