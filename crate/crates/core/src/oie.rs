//! Open IE tuples and a verb-centred clause-pattern extractor.
//!
//! The built-in extractor is deliberately small: one tuple per predicate
//! with a subject, the predicate's relation phrase (verb or copula plus
//! auxiliaries, negation and particles), and every object or oblique
//! dependent as a separate, ordered argument.

use alloc::string::String;
use alloc::vec::Vec;
use core::str::FromStr;

use crate::corpus::ParsedSentence;
use crate::tradeoff::{Span, TokenRange};
use crate::tree::DepTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OieSource {
    External,
    Builtin,
}

impl OieSource {
    pub fn as_str(self) -> &'static str {
        match self {
            OieSource::External => "external",
            OieSource::Builtin => "builtin",
        }
    }
}

impl FromStr for OieSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "external" => Ok(OieSource::External),
            "builtin" => Ok(OieSource::Builtin),
            _ => Err(alloc::format!("unknown OIE source `{s}`")),
        }
    }
}

/// Relation phrase of a tuple. `tokens` holds the sentence positions it
/// was built from; it is empty for synthetic phrases (appositive "is") and
/// for external tuples that carry text only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationPhrase {
    pub tokens: Vec<usize>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpenTuple {
    pub doc_id: String,
    pub sent_id: String,
    pub sentence_len: usize,
    pub subject: Span,
    pub relation: RelationPhrase,
    pub objects: Vec<Span>,
    pub confidence: Option<f64>,
    pub source: OieSource,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OieError {
    #[error("argument {start}..{end} outside sentence of {len} tokens")]
    OutOfBounds { start: usize, end: usize, len: usize },
    #[error("argument {0} overlaps the relation phrase")]
    OverlapsRelation(TokenRange),
    #[error("argument belongs to sentence {found}, tuple to {expected}")]
    SentenceMismatch { expected: String, found: String },
    #[error("confidence {0} outside [0, 1]")]
    Confidence(f64),
}

impl OpenTuple {
    /// Subject followed by objects.
    pub fn arguments(&self) -> impl Iterator<Item = &Span> {
        core::iter::once(&self.subject).chain(self.objects.iter())
    }

    /// A tuple without objects.
    pub fn is_degenerate(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn validate(&self) -> Result<(), OieError> {
        if let Some(c) = self.confidence {
            if !(0.0..=1.0).contains(&c) {
                return Err(OieError::Confidence(c));
            }
        }
        for arg in self.arguments() {
            if arg.sent_id != self.sent_id {
                return Err(OieError::SentenceMismatch {
                    expected: self.sent_id.clone(),
                    found: arg.sent_id.clone(),
                });
            }
            if arg.start >= arg.end || arg.end > self.sentence_len {
                return Err(OieError::OutOfBounds {
                    start: arg.start,
                    end: arg.end,
                    len: self.sentence_len,
                });
            }
            if self.relation.tokens.iter().any(|&t| arg.range().contains(t)) {
                return Err(OieError::OverlapsRelation(arg.range()));
            }
        }
        Ok(())
    }

    /// `(subject; relation; object; ...)`
    pub fn display(&self) -> String {
        let mut out = String::from("(");
        out.push_str(&self.subject.text);
        out.push_str("; ");
        out.push_str(&self.relation.text);
        for o in &self.objects {
            out.push_str("; ");
            out.push_str(&o.text);
        }
        out.push(')');
        out
    }
}

const SUBJECTS: [&str; 4] = ["nsubj", "nsubjpass", "csubj", "csubjpass"];
const OBJECTS: [&str; 8] = ["obj", "dobj", "iobj", "dative", "obl", "prep", "xcomp", "ccomp"];
const AUXILIARIES: [&str; 2] = ["aux", "auxpass"];
const PARTICLES: [&str; 2] = ["compound:prt", "prt"];
const NEGATORS: [&str; 3] = ["not", "never", "n't"];

fn is_negation(tree: &DepTree<'_>, c: usize) -> bool {
    let t = tree.token(c);
    t.base_deprel() == "neg"
        || (t.base_deprel() == "advmod"
            && (NEGATORS.contains(&t.lemma.to_lowercase().as_str())
                || NEGATORS.contains(&t.surface.to_lowercase().as_str())))
}

/// Tuples for every predicate with a subject in `sentence`.
pub fn extract_builtin(sentence: &ParsedSentence, doc_id: &str) -> Vec<OpenTuple> {
    let tree = DepTree::new(sentence);
    let span = |r: TokenRange| Span {
        sent_id: sentence.sent_id().into(),
        start: r.start,
        end: r.end,
        text: sentence.join(r),
    };
    let subject_of = |p: usize| {
        tree.children(p)
            .iter()
            .copied()
            .find(|&c| SUBJECTS.contains(&tree.token(c).base_deprel()))
    };

    let mut out = Vec::new();
    for p in 0..tree.len() {
        let tok = tree.token(p);
        let copula = tree.children_with(p, "cop").next();
        let verbal = tok.upos == "VERB" && copula.is_none();
        if !verbal && copula.is_none() {
            continue;
        }
        // Coordinated verbs share the first conjunct's subject.
        let subject = subject_of(p).or_else(|| {
            (tok.base_deprel() == "conj")
                .then(|| tree.head(p))
                .flatten()
                .and_then(&subject_of)
        });
        let Some(subject) = subject else {
            continue;
        };

        let mut rel: Vec<usize> = Vec::new();
        match copula {
            Some(c) => rel.push(c),
            None => rel.push(p),
        }
        for &c in tree.children(p) {
            let d = tree.token(c).deprel.as_str();
            let base = tree.token(c).base_deprel();
            if AUXILIARIES.contains(&base) || is_negation(&tree, c) || (verbal && PARTICLES.contains(&d)) {
                rel.push(c);
            }
        }
        rel.sort_unstable();
        let text = rel
            .iter()
            .map(|&i| tree.token(i).surface.as_str())
            .collect::<Vec<_>>()
            .join(" ");

        let without_relation = |root: usize, follow: &dyn Fn(usize) -> bool| {
            let mut mask = tree.reachable(root, follow);
            for &r in &rel {
                mask[r] = false;
            }
            mask
        };

        let subj_mask = without_relation(subject, &|_| true);
        let subject_span = span(tree.phrase(subject, &subj_mask, usize::MAX));

        let mut objects: Vec<Span> = Vec::new();
        if verbal {
            for &c in tree.children(p) {
                if OBJECTS.contains(&tree.token(c).base_deprel()) {
                    let mask = without_relation(c, &|_| true);
                    objects.push(span(tree.phrase(c, &mask, usize::MAX)));
                }
            }
        } else {
            let mask = without_relation(p, &|x| {
                let base = tree.token(x).base_deprel();
                !(SUBJECTS.contains(&base) || matches!(base, "cop" | "conj" | "cc" | "punct") || rel.contains(&x))
            });
            objects.push(span(tree.phrase(p, &mask, usize::MAX)));
        }
        objects.sort_by_key(|s| (s.start, s.end));
        objects.retain(|o| !o.range().overlaps(&subject_span.range()));

        out.push(OpenTuple {
            doc_id: doc_id.into(),
            sent_id: sentence.sent_id().into(),
            sentence_len: sentence.len(),
            subject: subject_span,
            relation: RelationPhrase { tokens: rel, text },
            objects,
            confidence: None,
            source: OieSource::Builtin,
        });
    }

    // Appositions: "X, a Y" -> (X; is; a Y)
    for n in 0..tree.len() {
        for m in tree.children_with(n, "appos").collect::<Vec<_>>() {
            let appos_tree = tree.subtree(m);
            let mask = tree.reachable(n, |x| !appos_tree[x] && tree.token(x).base_deprel() != "punct");
            let head_span = span(tree.phrase(n, &mask, usize::MAX));
            let appos_span = span(tree.phrase(m, &appos_tree, usize::MAX));
            if head_span.range().overlaps(&appos_span.range()) {
                continue;
            }
            out.push(OpenTuple {
                doc_id: doc_id.into(),
                sent_id: sentence.sent_id().into(),
                sentence_len: sentence.len(),
                subject: head_span,
                relation: RelationPhrase {
                    tokens: Vec::new(),
                    text: "is".into(),
                },
                objects: alloc::vec![appos_span],
                confidence: None,
                source: OieSource::Builtin,
            });
        }
    }
    out
}
