use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ClusterError;
use crate::embedding::PhraseVector;
use crate::DEFAULT_CLUSTERS;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansParams {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop once no centroid moves farther than this (Euclidean).
    pub tol: f64,
}

impl Default for KMeansParams {
    fn default() -> Self {
        KMeansParams {
            k: DEFAULT_CLUSTERS,
            seed: 0,
            max_iter: 300,
            tol: 1e-6,
        }
    }
}

/// Fitted centroids. `assignments` maps the index of each embeddable input
/// vector to its cluster; `noisy` flags clusters excluded from filtering.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub k: usize,
    pub dim: usize,
    pub seed: u64,
    pub centroids: Vec<Vec<f64>>,
    pub assignments: BTreeMap<usize, usize>,
    pub noisy: BTreeSet<usize>,
}

impl ClusterModel {
    /// Checks the structural invariants (used after deserialization).
    pub fn validate(&self) -> Result<(), ClusterError> {
        let bad = |m: &str| Err(ClusterError::InvalidModel(m.into()));
        if self.k == 0 {
            return Err(ClusterError::ZeroClusters);
        }
        if self.centroids.len() != self.k {
            return bad("centroid count differs from k");
        }
        if self.centroids.iter().any(|c| c.len() != self.dim) {
            return bad("centroid dimension differs from dim");
        }
        if self.centroids.iter().flatten().any(|x| !x.is_finite()) {
            return bad("non-finite centroid component");
        }
        if self.assignments.values().any(|&c| c >= self.k) {
            return bad("assignment index out of range");
        }
        if self.noisy.iter().any(|&c| c >= self.k) {
            return bad("noisy index out of range");
        }
        Ok(())
    }

    /// Index of the nearest centroid; ties go to the lowest index.
    pub fn nearest(&self, v: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, c) in self.centroids.iter().enumerate() {
            let d = squared_distance(v, c);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    /// Members of each cluster, by input index.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (&i, &c) in &self.assignments {
            out[c].push(i);
        }
        out
    }
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Cluster of `v` under `model`.
pub fn assign(v: &PhraseVector, model: &ClusterModel) -> Result<usize, ClusterError> {
    if !v.embeddable {
        return Err(ClusterError::Unembeddable);
    }
    if v.dim() != model.dim {
        return Err(ClusterError::DimensionMismatch {
            expected: model.dim,
            found: v.dim(),
        });
    }
    Ok(model.nearest(&v.vector))
}

pub fn fit_kmeans(vectors: &[PhraseVector], params: KMeansParams) -> Result<ClusterModel, ClusterError> {
    fit_kmeans_traced(vectors, params).map(|(m, _)| m)
}

/// K-means with k-means++ seeding. Unembeddable inputs are ignored.
/// Also returns the within-cluster sum of squares measured after every
/// assignment step.
pub fn fit_kmeans_traced(
    vectors: &[PhraseVector],
    params: KMeansParams,
) -> Result<(ClusterModel, Vec<f64>), ClusterError> {
    let k = params.k;
    if k == 0 {
        return Err(ClusterError::ZeroClusters);
    }
    let ids: Vec<usize> = (0..vectors.len()).filter(|&i| vectors[i].embeddable).collect();
    if ids.len() < k {
        return Err(ClusterError::TooFewVectors {
            needed: k,
            found: ids.len(),
        });
    }
    let dim = vectors[ids[0]].dim();
    if let Some(&i) = ids.iter().find(|&&i| vectors[i].dim() != dim) {
        return Err(ClusterError::DimensionMismatch {
            expected: dim,
            found: vectors[i].dim(),
        });
    }
    let points: Vec<&[f64]> = ids.iter().map(|&i| vectors[i].vector.as_slice()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut model = ClusterModel {
        k,
        dim,
        seed: params.seed,
        centroids: seed_plus_plus(&points, k, &mut rng),
        assignments: BTreeMap::new(),
        noisy: BTreeSet::new(),
    };

    let mut labels = vec![0usize; points.len()];
    let mut trace = Vec::new();
    for _ in 0..params.max_iter {
        trace.push(assign_all(&model, &points, &mut labels));
        let moved = update(&mut model, &points, &labels);
        if moved < params.tol {
            break;
        }
    }
    trace.push(assign_all(&model, &points, &mut labels));

    model.assignments = ids.iter().copied().zip(labels.iter().copied()).collect();
    Ok((model, trace))
}

fn seed_plus_plus(points: &[&[f64]], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(points[rng.gen_range(0..n)].to_vec());
    let mut d2: Vec<f64> = points.iter().map(|p| squared_distance(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if acc > target && d > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        let c = points[pick].to_vec();
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(squared_distance(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Nearest-centroid assignment; returns the within-cluster sum of squares.
fn assign_all(model: &ClusterModel, points: &[&[f64]], labels: &mut [usize]) -> f64 {
    let mut wcss = 0.0;
    for (p, l) in points.iter().zip(labels.iter_mut()) {
        *l = model.nearest(p);
        wcss += squared_distance(p, &model.centroids[*l]);
    }
    wcss
}

/// Moves centroids to their cluster means. An empty cluster is re-seeded at
/// the point farthest from its current centroid. Returns the largest
/// centroid displacement.
fn update(model: &mut ClusterModel, points: &[&[f64]], labels: &[usize]) -> f64 {
    let dim = model.dim;
    let mut sums = vec![vec![0.0; dim]; model.k];
    let mut counts = vec![0usize; model.k];
    for (p, &l) in points.iter().zip(labels) {
        counts[l] += 1;
        for (s, x) in sums[l].iter_mut().zip(p.iter()) {
            *s += x;
        }
    }
    let mut used: BTreeSet<usize> = BTreeSet::new();
    let mut moved: f64 = 0.0;
    for c in 0..model.k {
        let next: Vec<f64> = if counts[c] > 0 {
            sums[c].iter().map(|s| s / counts[c] as f64).collect()
        } else {
            let far = (0..points.len())
                .filter(|i| !used.contains(i))
                .map(|i| (i, squared_distance(points[i], &model.centroids[labels[i]])))
                .fold(None::<(usize, f64)>, |best, (i, d)| match best {
                    Some((_, bd)) if bd >= d => best,
                    _ => Some((i, d)),
                });
            match far {
                Some((i, _)) => {
                    used.insert(i);
                    points[i].to_vec()
                }
                None => model.centroids[c].clone(),
            }
        };
        moved = moved.max(libm::sqrt(squared_distance(&next, &model.centroids[c])));
        model.centroids[c] = next;
    }
    moved
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(v: &[f64]) -> PhraseVector {
        PhraseVector::from_vector(v.to_vec())
    }

    #[test]
    fn single_cluster_is_mean() {
        let vs = [pv(&[0.0, 0.0]), pv(&[2.0, 0.0]), pv(&[1.0, 3.0])];
        let m = fit_kmeans(
            &vs,
            KMeansParams {
                k: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((m.centroids[0][0] - 1.0).abs() < 1e-12);
        assert!((m.centroids[0][1] - 1.0).abs() < 1e-12);
        assert!(m.assignments.values().all(|&c| c == 0));
    }

    #[test]
    fn too_few_vectors() {
        let vs = [pv(&[0.0]), PhraseVector::unembeddable(1)];
        assert_eq!(
            fit_kmeans(
                &vs,
                KMeansParams {
                    k: 2,
                    ..Default::default()
                }
            ),
            Err(ClusterError::TooFewVectors { needed: 2, found: 1 })
        );
    }

    #[test]
    fn assign_ties_and_errors() {
        let model = ClusterModel {
            k: 5,
            dim: 1,
            seed: 0,
            centroids: vec![vec![10.0], vec![-1.0], vec![20.0], vec![30.0], vec![1.0]],
            assignments: BTreeMap::new(),
            noisy: BTreeSet::new(),
        };
        assert_eq!(assign(&pv(&[30.0]), &model).unwrap(), 3);
        assert_eq!(assign(&pv(&[0.0]), &model).unwrap(), 1);
        assert_eq!(
            assign(&PhraseVector::unembeddable(1), &model),
            Err(ClusterError::Unembeddable)
        );
        assert!(assign(&pv(&[0.0, 1.0]), &model).is_err());
    }

    #[test]
    fn empty_cluster_reseeding_keeps_k_distinct() {
        // Three distinct points, k = 3: every point must end in its own cluster.
        let vs = [pv(&[0.0]), pv(&[0.0]), pv(&[5.0]), pv(&[9.0])];
        let m = fit_kmeans(
            &vs,
            KMeansParams {
                k: 3,
                seed: 7,
                ..Default::default()
            },
        )
        .unwrap();
        let mut clusters: Vec<usize> = m.assignments.values().copied().collect();
        clusters.sort_unstable();
        clusters.dedup();
        assert_eq!(clusters.len(), 3);
        m.validate().unwrap();
    }
}
