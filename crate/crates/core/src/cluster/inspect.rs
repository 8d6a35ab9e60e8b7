use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use super::{squared_distance, ClusterModel};
use crate::embedding::PhraseVector;

/// Thresholds for flagging clusters dominated by math symbols or long
/// nested phrases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisyThresholds {
    /// Flag when the median non-alphabetic character fraction exceeds this.
    pub non_alpha_fraction: f64,
    /// Flag when the median member length in tokens exceeds this.
    pub max_tokens: f64,
}

impl Default for NoisyThresholds {
    fn default() -> Self {
        NoisyThresholds {
            non_alpha_fraction: 0.3,
            max_tokens: 10.0,
        }
    }
}

/// Fraction of non-whitespace characters that are not alphabetic.
pub fn non_alpha_fraction(phrase: &str) -> f64 {
    let (mut total, mut other) = (0usize, 0usize);
    for c in phrase.chars().filter(|c| !c.is_whitespace()) {
        total += 1;
        if !c.is_alphabetic() {
            other += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        other as f64 / total as f64
    }
}

fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    Some(if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    })
}

/// Clusters whose members are mostly symbols or long phrases. `phrases` is
/// indexed like the vectors the model was fitted on.
pub fn detect_noisy<S: AsRef<str>>(
    model: &ClusterModel,
    phrases: &[S],
    thresholds: NoisyThresholds,
) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for (c, members) in model.members().iter().enumerate() {
        let texts: Vec<&str> = members
            .iter()
            .filter_map(|&i| phrases.get(i))
            .map(AsRef::as_ref)
            .collect();
        let symbols = median(texts.iter().map(|t| non_alpha_fraction(t)).collect());
        let lengths = median(texts.iter().map(|t| t.split_whitespace().count() as f64).collect());
        if let (Some(s), Some(l)) = (symbols, lengths) {
            if s > thresholds.non_alpha_fraction || l > thresholds.max_tokens {
                out.insert(c);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSummary {
    pub cluster: usize,
    pub size: usize,
    pub noisy: bool,
    /// Up to five distinct member phrases nearest the centroid, with their
    /// squared distance.
    pub top_members: Vec<(String, f64)>,
    /// Up to three other clusters, by number of trade-off argument pairs
    /// linking them to this one.
    pub related: Vec<(usize, usize)>,
}

/// Per-cluster top members and related clusters. `pairs` are index pairs
/// of arguments that share a trade-off relation.
pub fn summarize<S: AsRef<str>>(
    model: &ClusterModel,
    phrases: &[S],
    vectors: &[PhraseVector],
    pairs: &[(usize, usize)],
) -> Vec<ClusterSummary> {
    let mut links: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for &(a, b) in pairs {
        if let (Some(&ca), Some(&cb)) = (model.assignments.get(&a), model.assignments.get(&b)) {
            if ca != cb {
                *links.entry((ca, cb)).or_default() += 1;
                *links.entry((cb, ca)).or_default() += 1;
            }
        }
    }

    model
        .members()
        .iter()
        .enumerate()
        .map(|(c, members)| {
            let mut ranked: Vec<(String, f64)> = members
                .iter()
                .filter_map(|&i| {
                    let text = phrases.get(i)?.as_ref();
                    let v = vectors.get(i)?;
                    Some((String::from(text), squared_distance(&v.vector, &model.centroids[c])))
                })
                .collect();
            ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
            let mut seen = BTreeSet::new();
            ranked.retain(|(t, _)| seen.insert(t.clone()));
            ranked.truncate(5);

            let mut related: Vec<(usize, usize)> =
                links.range((c, 0)..(c + 1, 0)).map(|(&(_, d), &n)| (d, n)).collect();
            related.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
            related.truncate(3);

            ClusterSummary {
                cluster: c,
                size: members.len(),
                noisy: model.noisy.contains(&c),
                top_members: ranked,
                related,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn model(assign: &[usize], k: usize) -> ClusterModel {
        ClusterModel {
            k,
            dim: 1,
            seed: 0,
            centroids: (0..k).map(|c| vec![c as f64 * 10.0]).collect(),
            assignments: assign.iter().copied().enumerate().collect(),
            noisy: BTreeSet::new(),
        }
    }

    #[test]
    fn symbol_cluster_flagged() {
        let phrases = [
            "p < 0.05",
            "±2 SE",
            "x(t)=3y",
            "immunity",
            "immune function",
            "immune response",
        ];
        let m = model(&[0, 0, 0, 1, 1, 1], 3);
        let noisy = detect_noisy(&m, &phrases, NoisyThresholds::default());
        assert_eq!(noisy.into_iter().collect::<Vec<_>>(), [0]);
    }

    #[test]
    fn long_phrase_cluster_flagged() {
        let long = "the effect of the increase in the rate of the change of body mass over time";
        let m = model(&[0, 0], 1);
        assert!(detect_noisy(&m, &[long, long], NoisyThresholds::default()).contains(&0));
    }

    #[test]
    fn fractions() {
        assert!((non_alpha_fraction("p < 0.05") - 5.0 / 6.0).abs() < 1e-12);
        assert_eq!(non_alpha_fraction("immune function"), 0.0);
        assert_eq!(non_alpha_fraction(""), 0.0);
    }

    #[test]
    fn summary_orders_members_and_links() {
        let m = model(&[0, 0, 1, 2, 2], 3);
        let phrases = ["b", "a", "c", "d", "e"];
        let vectors: Vec<_> = [1.0, 0.5, 10.0, 20.0, 21.0]
            .iter()
            .map(|&x| PhraseVector::from_vector(vec![x]))
            .collect();
        let pairs = [(0, 2), (1, 3), (1, 4), (0, 1)];
        let s = summarize(&m, &phrases, &vectors, &pairs);
        assert_eq!(
            s[0].top_members.iter().map(|t| t.0.as_str()).collect::<Vec<_>>(),
            ["a", "b"]
        );
        assert_eq!(s[0].related, [(2, 2), (1, 1)]);
        assert_eq!(s[1].related, [(0, 1)]);
        assert!(summarize(&m, &phrases, &vectors, &[])
            .iter()
            .all(|c| c.related.is_empty()));
    }
}
