//! Phrase vectors: stop-word removal, subword IDF weighting and weighted
//! averaging of per-token vectors, plus cosine similarity.

mod idf;
mod subword;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

pub use idf::IdfTable;
pub use subword::{SubwordVocab, UNK};

const BUNDLED_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EmbeddingError {
    #[error("vector dimension {found} does not match {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vector for `{0}` has non-finite components")]
    NonFinite(String),
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("similarity undefined for an unembeddable phrase")]
    Unembeddable,
    #[error("similarity undefined for a zero vector")]
    ZeroVector,
    #[error("IDF needs at least one document")]
    NoDocuments,
    #[error("document frequency {df} of `{unit}` exceeds document count {docs}")]
    DocumentFrequency { unit: String, df: u64, docs: u64 },
    #[error("empty subword unit")]
    EmptyUnit,
}

/// Static per-token vectors keyed by lowercase surface form.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    entries: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Result<Self, EmbeddingError> {
        if dim == 0 {
            return Err(EmbeddingError::ZeroDimension);
        }
        Ok(EmbeddingTable {
            dim,
            entries: BTreeMap::new(),
        })
    }

    /// Adds (or replaces) a token vector; the token is lowercased.
    pub fn insert(&mut self, token: &str, vector: Vec<f64>) -> Result<(), EmbeddingError> {
        if vector.len() != self.dim {
            return Err(EmbeddingError::DimensionMismatch {
                expected: self.dim,
                found: vector.len(),
            });
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(EmbeddingError::NonFinite(token.to_string()));
        }
        self.entries.insert(token.to_lowercase(), vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.entries.get(token).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StopWords(BTreeSet<String>);

impl StopWords {
    /// One word per line; blank lines ignored.
    pub fn parse(text: &str) -> Self {
        StopWords(
            text.lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty())
                .collect(),
        )
    }

    /// The bundled 179-word English list.
    pub fn english() -> Self {
        StopWords::parse(BUNDLED_STOPWORDS)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Lowercased whitespace tokens with leading and trailing non-alphanumeric
/// characters stripped; tokens that end up empty are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

/// IDF-weighted average of token vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct PhraseVector {
    pub vector: Vec<f64>,
    /// Sum of the token weights that contributed.
    pub weight_mass: f64,
    /// False when no token had a table entry.
    pub embeddable: bool,
}

impl PhraseVector {
    pub fn unembeddable(dim: usize) -> Self {
        PhraseVector {
            vector: vec![0.0; dim],
            weight_mass: 0.0,
            embeddable: false,
        }
    }

    /// An embeddable phrase vector from raw components.
    pub fn from_vector(vector: Vec<f64>) -> Self {
        PhraseVector {
            vector,
            weight_mass: 1.0,
            embeddable: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }
}

/// Everything needed to embed a phrase.
#[derive(Debug, Clone, Copy)]
pub struct Embedder<'a> {
    pub table: &'a EmbeddingTable,
    pub idf: &'a IdfTable,
    pub vocab: &'a SubwordVocab,
    pub stopwords: &'a StopWords,
}

impl<'a> Embedder<'a> {
    pub fn new(
        table: &'a EmbeddingTable,
        idf: &'a IdfTable,
        vocab: &'a SubwordVocab,
        stopwords: &'a StopWords,
    ) -> Self {
        Embedder {
            table,
            idf,
            vocab,
            stopwords,
        }
    }

    pub fn dim(&self) -> usize {
        self.table.dim()
    }

    /// Weight of a token: mean IDF of its subword units.
    pub fn token_weight(&self, token: &str) -> f64 {
        let units = self.vocab.segment(token);
        if units.is_empty() {
            return 0.0;
        }
        units.iter().map(|u| self.idf.idf(u)).sum::<f64>() / units.len() as f64
    }

    /// Embeds `argument` with its modifiers appended. Stop words and tokens
    /// without a table entry are skipped.
    pub fn embed(&self, argument: &str, modifiers: &[String]) -> PhraseVector {
        let mut text = String::from(argument);
        for m in modifiers {
            text.push(' ');
            text.push_str(m);
        }
        let dim = self.table.dim();
        let mut acc = vec![0.0; dim];
        let mut mass = 0.0;
        for tok in tokenize(&text) {
            if self.stopwords.contains(&tok) {
                continue;
            }
            let Some(v) = self.table.get(&tok) else {
                continue;
            };
            let w = self.token_weight(&tok);
            for (a, x) in acc.iter_mut().zip(v) {
                *a += w * x;
            }
            mass += w;
        }
        if mass <= 0.0 {
            return PhraseVector::unembeddable(dim);
        }
        for a in &mut acc {
            *a /= mass;
        }
        PhraseVector {
            vector: acc,
            weight_mass: mass,
            embeddable: true,
        }
    }
}

/// Free-function form of [`Embedder::embed`].
pub fn embed_phrase(
    argument: &str,
    modifiers: &[String],
    table: &EmbeddingTable,
    idf: &IdfTable,
    vocab: &SubwordVocab,
    stopwords: &StopWords,
) -> PhraseVector {
    Embedder::new(table, idf, vocab, stopwords).embed(argument, modifiers)
}

/// Cosine similarity, clamped to `[-1, 1]`.
pub fn cosine(a: &PhraseVector, b: &PhraseVector) -> Result<f64, EmbeddingError> {
    if !a.embeddable || !b.embeddable {
        return Err(EmbeddingError::Unembeddable);
    }
    if a.dim() != b.dim() {
        return Err(EmbeddingError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let dot: f64 = a.vector.iter().zip(&b.vector).map(|(x, y)| x * y).sum();
    let na = libm::sqrt(a.vector.iter().map(|x| x * x).sum());
    let nb = libm::sqrt(b.vector.iter().map(|x| x * x).sum());
    if na == 0.0 || nb == 0.0 {
        return Err(EmbeddingError::ZeroVector);
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(v: &[f64]) -> PhraseVector {
        PhraseVector::from_vector(v.to_vec())
    }

    #[test]
    fn cosine_basics() {
        assert!((cosine(&pv(&[0.3, -1.2]), &pv(&[0.3, -1.2])).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&pv(&[1.0, 0.0]), &pv(&[0.0, 1.0])).unwrap(), 0.0);
        assert!((cosine(&pv(&[1.0, 2.0]), &pv(&[2.0, 4.0])).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(
            cosine(&pv(&[0.0, 0.0]), &pv(&[1.0, 0.0])),
            Err(EmbeddingError::ZeroVector)
        );
        assert_eq!(
            cosine(&PhraseVector::unembeddable(2), &pv(&[1.0, 0.0])),
            Err(EmbeddingError::Unembeddable)
        );
        assert!(matches!(
            cosine(&pv(&[1.0]), &pv(&[1.0, 0.0])),
            Err(EmbeddingError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn table_validation() {
        let mut t = EmbeddingTable::new(2).unwrap();
        assert!(t.insert("a", vec![1.0]).is_err());
        assert!(t.insert("a", vec![f64::NAN, 0.0]).is_err());
        t.insert("Resilin", vec![1.0, 0.0]).unwrap();
        assert!(t.get("resilin").is_some());
        assert!(EmbeddingTable::new(0).is_err());
    }

    #[test]
    fn stopword_list() {
        let s = StopWords::english();
        assert_eq!(s.len(), 179);
        assert!(s.contains("the") && s.contains("between") && s.contains("wouldn't"));
    }

    #[test]
    fn tokenizer_strips_edges() {
        assert_eq!(tokenize("(in Bats), trade-off"), ["in", "bats", "trade-off"]);
        assert!(tokenize("< ±").is_empty());
    }
}
