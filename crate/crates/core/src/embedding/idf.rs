use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;

use super::EmbeddingError;

/// Smoothed inverse document frequency over subword units:
/// `idf(u) = ln((1 + N) / (1 + df(u))) + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdfTable {
    doc_count: u64,
    df: BTreeMap<String, u64>,
}

impl IdfTable {
    pub fn new(doc_count: u64, df: BTreeMap<String, u64>) -> Result<Self, EmbeddingError> {
        if doc_count == 0 {
            return Err(EmbeddingError::NoDocuments);
        }
        if let Some((unit, &d)) = df.iter().find(|(_, &d)| d > doc_count) {
            return Err(EmbeddingError::DocumentFrequency {
                unit: unit.clone(),
                df: d,
                docs: doc_count,
            });
        }
        Ok(IdfTable { doc_count, df })
    }

    /// Document frequencies from the set of units found in each document.
    pub fn build(documents: &[BTreeSet<String>]) -> Result<Self, EmbeddingError> {
        let mut df: BTreeMap<String, u64> = BTreeMap::new();
        for doc in documents {
            for unit in doc {
                *df.entry(unit.clone()).or_default() += 1;
            }
        }
        IdfTable::new(documents.len() as u64, df)
    }

    pub fn doc_count(&self) -> u64 {
        self.doc_count
    }

    pub fn df(&self, unit: &str) -> u64 {
        self.df.get(unit).copied().unwrap_or(0)
    }

    pub fn idf(&self, unit: &str) -> f64 {
        let n = self.doc_count as f64;
        libm::log((1.0 + n) / (1.0 + self.df(unit) as f64)) + 1.0
    }

    pub fn frequencies(&self) -> impl Iterator<Item = (&str, u64)> {
        self.df.iter().map(|(k, &v)| (k.as_str(), v))
    }
}
