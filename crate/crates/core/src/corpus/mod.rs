//! Dependency-parsed documents and gold annotations.

mod conllu;
mod standoff;

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub use conllu::{parse_conllu, write_conllu};
pub use standoff::{parse_standoff, GoldAnnotation, GoldRelation, GoldSpan};

use crate::tradeoff::TokenRange;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("sentence {sent_id}: {message}")]
    Validation { sent_id: String, message: String },
    #[error("span {span_id}: {message}")]
    Integrity { span_id: String, message: String },
    #[error("relation {relation_id} references unknown span {span_id}")]
    Reference { relation_id: String, span_id: String },
}

/// Article section a sentence was taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Section {
    Abstract,
    Introduction,
    Results,
    Discussion,
    Conclusion,
    Other,
}

impl Section {
    pub const ALL: [Section; 6] = [
        Section::Abstract,
        Section::Introduction,
        Section::Results,
        Section::Discussion,
        Section::Conclusion,
        Section::Other,
    ];

    /// Sections kept by default: everything except `Other`.
    pub const RETAINED: [Section; 5] = [
        Section::Abstract,
        Section::Introduction,
        Section::Results,
        Section::Discussion,
        Section::Conclusion,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Section::Abstract => "abstract",
            Section::Introduction => "introduction",
            Section::Results => "results",
            Section::Discussion => "discussion",
            Section::Conclusion => "conclusion",
            Section::Other => "other",
        }
    }

    /// Lenient header mapping; unknown section names become `Other`.
    pub fn from_header(name: &str) -> Section {
        name.parse().unwrap_or(Section::Other)
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Section {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "abstract" => Ok(Section::Abstract),
            "introduction" => Ok(Section::Introduction),
            "results" => Ok(Section::Results),
            "discussion" => Ok(Section::Discussion),
            "conclusion" | "conclusions" => Ok(Section::Conclusion),
            "other" => Ok(Section::Other),
            other => Err(alloc::format!("unknown section `{other}`")),
        }
    }
}

/// One word of a parsed sentence. `index` is 1-based and `head` is the
/// 1-based index of the governor, 0 for the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub index: usize,
    pub surface: String,
    pub lemma: String,
    pub upos: String,
    pub head: usize,
    pub deprel: String,
    pub space_after: bool,
}

impl Token {
    pub fn new(index: usize, surface: &str, lemma: &str, upos: &str, head: usize, deprel: &str) -> Self {
        Token {
            index,
            surface: surface.into(),
            lemma: lemma.into(),
            upos: upos.into(),
            head,
            deprel: deprel.into(),
            space_after: true,
        }
    }

    /// Universal relation without its subtype (`nmod:poss` -> `nmod`).
    pub fn base_deprel(&self) -> &str {
        self.deprel.split(':').next().unwrap_or("")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedSentence {
    sent_id: String,
    section: Section,
    tokens: Vec<Token>,
    text: Option<String>,
}

impl ParsedSentence {
    /// Builds a sentence and checks that the heads form a single rooted tree.
    pub fn new(
        sent_id: impl Into<String>,
        section: Section,
        tokens: Vec<Token>,
        text: Option<String>,
    ) -> Result<Self, CorpusError> {
        let sent_id = sent_id.into();
        validate_tree(&tokens).map_err(|message| CorpusError::Validation {
            sent_id: sent_id.clone(),
            message,
        })?;
        Ok(ParsedSentence {
            sent_id,
            section,
            tokens,
            text,
        })
    }

    pub fn sent_id(&self) -> &str {
        &self.sent_id
    }

    pub fn section(&self) -> Section {
        self.section
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// The `# text` comment, if the input carried one.
    pub fn raw_text(&self) -> Option<&str> {
        self.text.as_deref()
    }

    /// Sentence text: the stored text, or the tokens joined with their
    /// recorded spacing.
    pub fn text(&self) -> String {
        match &self.text {
            Some(t) => t.clone(),
            None => self.join(TokenRange::new(0, self.tokens.len())),
        }
    }

    /// Surface text of a token range, honouring `SpaceAfter=No`.
    pub fn join(&self, range: TokenRange) -> String {
        let mut out = String::new();
        let end = range.end.min(self.tokens.len());
        for (i, tok) in self.tokens[range.start.min(end)..end].iter().enumerate() {
            out.push_str(&tok.surface);
            if range.start + i + 1 < end && tok.space_after {
                out.push(' ');
            }
        }
        out
    }

    /// Character offsets `(start, end)` of each token within [`Self::text`],
    /// counted in Unicode scalar values. `None` when a surface form cannot
    /// be located in order.
    pub fn char_offsets(&self) -> Option<Vec<(usize, usize)>> {
        let text: Vec<char> = self.text().chars().collect();
        let mut offsets = Vec::with_capacity(self.tokens.len());
        let mut pos = 0;
        for tok in &self.tokens {
            let surface: Vec<char> = tok.surface.chars().collect();
            if surface.is_empty() {
                return None;
            }
            let found = (pos..=text.len().saturating_sub(surface.len()))
                .find(|&p| text[p..p + surface.len()] == surface[..])?;
            offsets.push((found, found + surface.len()));
            pos = found + surface.len();
        }
        Some(offsets)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedDocument {
    doc_id: String,
    sentences: Vec<ParsedSentence>,
}

impl ParsedDocument {
    /// Builds a document; the id must be non-empty and sentence ids unique.
    pub fn new(doc_id: impl Into<String>, sentences: Vec<ParsedSentence>) -> Result<Self, CorpusError> {
        let doc_id = doc_id.into();
        if doc_id.trim().is_empty() {
            return Err(CorpusError::Validation {
                sent_id: String::new(),
                message: "empty document id".into(),
            });
        }
        let mut seen = BTreeSet::new();
        for s in &sentences {
            if !seen.insert(s.sent_id.as_str()) {
                return Err(CorpusError::Validation {
                    sent_id: s.sent_id.clone(),
                    message: alloc::format!("duplicate sent_id in document {doc_id}"),
                });
            }
        }
        Ok(ParsedDocument { doc_id, sentences })
    }

    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn sentences(&self) -> &[ParsedSentence] {
        &self.sentences
    }

    pub fn sentence(&self, sent_id: &str) -> Option<&ParsedSentence> {
        self.sentences.iter().find(|s| s.sent_id == sent_id)
    }
}

/// Keeps only sentences whose section is in `keep`, preserving order.
pub fn filter_sections(doc: &ParsedDocument, keep: &BTreeSet<Section>) -> ParsedDocument {
    ParsedDocument {
        doc_id: doc.doc_id.clone(),
        sentences: doc
            .sentences
            .iter()
            .filter(|s| keep.contains(&s.section))
            .cloned()
            .collect(),
    }
}

/// The five retained article sections as a set.
pub fn default_sections() -> BTreeSet<Section> {
    Section::RETAINED.into_iter().collect()
}

fn validate_tree(tokens: &[Token]) -> Result<(), String> {
    let n = tokens.len();
    if n == 0 {
        return Err("sentence has no tokens".into());
    }
    let mut roots = 0;
    for (pos, tok) in tokens.iter().enumerate() {
        if tok.index != pos + 1 {
            return Err(alloc::format!(
                "token index {} out of sequence (expected {})",
                tok.index,
                pos + 1
            ));
        }
        if tok.head > n {
            return Err(alloc::format!(
                "token {} has head {} beyond sentence length {n}",
                tok.index,
                tok.head
            ));
        }
        if tok.head == tok.index {
            return Err(alloc::format!("token {} is its own head", tok.index));
        }
        if tok.head == 0 {
            roots += 1;
        }
    }
    if roots != 1 {
        return Err(alloc::format!("expected exactly one root, found {roots}"));
    }
    // Every token must reach the root within n steps.
    for tok in tokens {
        let mut cur = tok.index;
        let mut steps = 0;
        while cur != 0 {
            cur = tokens[cur - 1].head;
            steps += 1;
            if steps > n {
                return Err(alloc::format!("cycle through token {}", tok.index));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn toks(heads: &[usize]) -> Vec<Token> {
        heads
            .iter()
            .enumerate()
            .map(|(i, &h)| Token::new(i + 1, "w", "w", "NOUN", h, if h == 0 { "root" } else { "dep" }))
            .collect()
    }

    #[test]
    fn tree_validation() {
        assert!(ParsedSentence::new("s", Section::Other, toks(&[2, 0]), None).is_ok());
        let self_loop = ParsedSentence::new("s", Section::Other, toks(&[1, 0]), None);
        assert!(matches!(self_loop, Err(CorpusError::Validation { .. })));
        let two_roots = ParsedSentence::new("s", Section::Other, toks(&[0, 0]), None);
        assert!(two_roots.is_err());
        let cycle = ParsedSentence::new("s", Section::Other, toks(&[2, 3, 2, 0]), None);
        let err = cycle.unwrap_err();
        assert!(alloc::format!("{err}").contains("cycle"));
        assert!(ParsedSentence::new("s", Section::Other, toks(&[2, 5]), None).is_err());
    }

    #[test]
    fn join_respects_space_after() {
        let mut t = toks(&[0, 1, 1]);
        t[0].surface = "trade".into();
        t[0].space_after = false;
        t[1].surface = "-".into();
        t[1].space_after = false;
        t[2].surface = "off".into();
        let s = ParsedSentence::new("s", Section::Other, t, None).unwrap();
        assert_eq!(s.text(), "trade-off");
        assert_eq!(s.char_offsets().unwrap(), vec![(0, 5), (5, 6), (6, 9)]);
    }

    #[test]
    fn filter_keeps_order() {
        let mk = |id: &str, sec| ParsedSentence::new(id, sec, toks(&[0]), None).unwrap();
        let doc = ParsedDocument::new(
            "d",
            vec![
                mk("a", Section::Abstract),
                mk("b", Section::Other),
                mk("c", Section::Results),
            ],
        )
        .unwrap();
        let f = filter_sections(&doc, &default_sections());
        let ids: Vec<_> = f.sentences().iter().map(|s| s.sent_id()).collect();
        assert_eq!(ids, ["a", "c"]);
        let all: BTreeSet<_> = Section::ALL.into_iter().collect();
        assert_eq!(filter_sections(&doc, &all), doc);
        let only_other = ParsedDocument::new("d", vec![mk("b", Section::Other)]).unwrap();
        assert!(filter_sections(&only_other, &default_sections()).sentences().is_empty());
    }

    #[test]
    fn duplicate_sent_ids_rejected() {
        let mk = |id: &str| ParsedSentence::new(id, Section::Other, toks(&[0]), None).unwrap();
        assert!(ParsedDocument::new("d", vec![mk("a"), mk("a")]).is_err());
        assert!(ParsedDocument::new("", vec![]).is_err());
    }
}
