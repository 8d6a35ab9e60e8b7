use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::EmbeddingError;

/// Unit emitted for characters outside the vocabulary's alphabet.
pub const UNK: &str = "<unk>";

/// Subword units for IDF computation. Always contains every single
/// character seen at build time, so segmentation of in-alphabet text is
/// total. Text is lowercased before building and segmenting.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SubwordVocab {
    units: BTreeSet<String>,
    longest: usize,
}

impl SubwordVocab {
    pub fn from_units<I, S>(units: I) -> Result<Self, EmbeddingError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = BTreeSet::new();
        for u in units {
            let u = u.as_ref().to_lowercase();
            if u.is_empty() {
                return Err(EmbeddingError::EmptyUnit);
            }
            set.insert(u);
        }
        let longest = set.iter().map(|u| u.chars().count()).max().unwrap_or(0);
        Ok(SubwordVocab { units: set, longest })
    }

    /// Pair-merge vocabulary: starts from the character alphabet of
    /// `word_counts` and repeatedly merges the most frequent adjacent pair
    /// (ties: lexicographically smallest pair) until `target_size` units
    /// exist or nothing is left to merge.
    pub fn build(word_counts: &BTreeMap<String, u64>, target_size: usize) -> Self {
        let mut words: Vec<(Vec<String>, u64)> = Vec::new();
        let mut merged_counts: BTreeMap<String, u64> = BTreeMap::new();
        for (w, &c) in word_counts {
            *merged_counts.entry(w.to_lowercase()).or_default() += c;
        }
        let mut units: BTreeSet<String> = BTreeSet::new();
        for (w, c) in merged_counts {
            let symbols: Vec<String> = w.chars().map(|ch| ch.to_string()).collect();
            units.extend(symbols.iter().cloned());
            if !symbols.is_empty() {
                words.push((symbols, c));
            }
        }

        while units.len() < target_size {
            let mut pairs: BTreeMap<(&str, &str), u64> = BTreeMap::new();
            for (symbols, c) in &words {
                for pair in symbols.windows(2) {
                    *pairs.entry((pair[0].as_str(), pair[1].as_str())).or_default() += c;
                }
            }
            // BTreeMap iterates in key order, so the first maximum is the
            // lexicographically smallest pair.
            let best = pairs
                .iter()
                .fold(None::<((&str, &str), u64)>, |acc, (&p, &c)| match acc {
                    Some((_, bc)) if bc >= c => acc,
                    _ => Some((p, c)),
                });
            let Some(((a, b), _)) = best else {
                break;
            };
            let (a, b) = (a.to_string(), b.to_string());
            let joined = alloc::format!("{a}{b}");
            for (symbols, _) in &mut words {
                let mut i = 0;
                let mut out: Vec<String> = Vec::with_capacity(symbols.len());
                while i < symbols.len() {
                    if i + 1 < symbols.len() && symbols[i] == a && symbols[i + 1] == b {
                        out.push(joined.clone());
                        i += 2;
                    } else {
                        out.push(core::mem::take(&mut symbols[i]));
                        i += 1;
                    }
                }
                *symbols = out;
            }
            units.insert(joined);
        }
        let longest = units.iter().map(|u| u.chars().count()).max().unwrap_or(0);
        SubwordVocab { units, longest }
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn contains(&self, unit: &str) -> bool {
        self.units.contains(unit)
    }

    pub fn units(&self) -> impl Iterator<Item = &str> {
        self.units.iter().map(String::as_str)
    }

    /// Greedy longest-prefix segmentation of every whitespace token.
    /// Characters not covered by any unit become [`UNK`].
    pub fn segment(&self, phrase: &str) -> Vec<String> {
        let mut out = Vec::new();
        for token in phrase.split_whitespace() {
            let chars: Vec<char> = token.to_lowercase().chars().collect();
            let mut i = 0;
            while i < chars.len() {
                let max = self.longest.min(chars.len() - i);
                let hit = (1..=max).rev().find_map(|len| {
                    let candidate: String = chars[i..i + len].iter().collect();
                    self.units.contains(&candidate).then_some((candidate, len))
                });
                match hit {
                    Some((unit, len)) => {
                        out.push(unit);
                        i += len;
                    }
                    None => {
                        out.push(UNK.to_string());
                        i += 1;
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn greedy_longest_prefix() {
        let v = SubwordVocab::from_units(["e", "f", "i", "c", "n", "y", "efficien", "cy", "effi"]).unwrap();
        assert_eq!(v.segment("efficiency"), ["efficien", "cy"]);
        assert_eq!(v.segment("cy"), ["cy"]);
        assert_eq!(v.segment("∑"), [UNK]);
        assert_eq!(v.segment("fix"), ["f", "i", UNK]);
    }

    #[test]
    fn build_merges_frequent_pairs() {
        let mut counts = BTreeMap::new();
        counts.insert("low".to_string(), 5);
        counts.insert("lower".to_string(), 2);
        counts.insert("lowest".to_string(), 2);
        let v = SubwordVocab::build(&counts, 9);
        // alphabet: e l o r s t w (7) + "lo" + "low"
        assert_eq!(v.len(), 9);
        assert!(v.contains("lo") && v.contains("low"));
        assert_eq!(v.segment("lowest"), ["low", "e", "s", "t"]);
    }

    #[test]
    fn build_stops_when_nothing_merges() {
        let mut counts = BTreeMap::new();
        counts.insert("ab".to_string(), 1);
        let v = SubwordVocab::build(&counts, 100);
        assert_eq!(v.len(), 3);
        assert_eq!(v.segment("ab"), ["ab"]);
    }
}
