//! Exact nearest-neighbor queries under the Euclidean metric.
//!
//! Neighbors are ordered by `(distance, index)`: equal distances are broken
//! by ascending position in the dataset, which keeps every query
//! deterministic. Distances are compared as computed, with no epsilon.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// A covariate vector in `[0, 1]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyVector);
        }
        for (index, &value) in coords.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::CoordinateOutOfRange { index, value });
            }
        }
        Ok(Self(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for FeatureVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

impl Neighbor {
    fn cmp_key(&self, other: &Self) -> Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then(self.index.cmp(&other.index))
    }
}

/// The `k` nearest training points to a query, closest first.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborList {
    pub entries: Vec<Neighbor>,
}

impl NeighborList {
    pub fn indices(&self) -> Vec<usize> {
        self.entries.iter().map(|n| n.index).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn euclidean_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(distance_unchecked(a, b))
}

#[inline]
pub(crate) fn distance_unchecked(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Row-major point set that neighbor queries run against.
pub trait PointSet {
    fn dim(&self) -> usize;
    fn len(&self) -> usize;
    fn point(&self, index: usize) -> &[f64];

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Lazily sorted neighbor ordering of a whole point set.
///
/// All distances are computed up front; the sorted prefix is then grown on
/// demand by partial selection, so a scan that stops early never pays for a
/// full sort. Every prefix is identical to the prefix of a full
/// `(distance, index)` sort.
#[derive(Debug, Clone)]
pub struct NeighborOrder {
    entries: Vec<Neighbor>,
    sorted: usize,
}

const MIN_CHUNK: usize = 32;

impl NeighborOrder {
    pub fn new<S: PointSet + ?Sized>(points: &S, query: &[f64]) -> Result<Self> {
        if !points.is_empty() && points.dim() != query.len() {
            return Err(Error::DimensionMismatch {
                expected: points.dim(),
                actual: query.len(),
            });
        }
        let entries = (0..points.len())
            .map(|index| Neighbor {
                index,
                distance: distance_unchecked(points.point(index), query),
            })
            .collect();
        Ok(Self { entries, sorted: 0 })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Makes the first `k` entries final.
    pub fn ensure(&mut self, k: usize) {
        let n = self.entries.len();
        let k = k.min(n);
        if k <= self.sorted {
            return;
        }
        let target = k.max(self.sorted.saturating_mul(2)).max(MIN_CHUNK).min(n);
        let take = target - self.sorted;
        let rest = &mut self.entries[self.sorted..];
        if take < rest.len() {
            rest.select_nth_unstable_by(take - 1, Neighbor::cmp_key);
        }
        rest[..take].sort_unstable_by(Neighbor::cmp_key);
        self.sorted = target;
    }

    /// The `i`-th nearest neighbor (0-based).
    pub fn get(&mut self, i: usize) -> Neighbor {
        self.ensure(i + 1);
        self.entries[i]
    }

    pub fn prefix(&mut self, k: usize) -> &[Neighbor] {
        self.ensure(k);
        &self.entries[..k.min(self.entries.len())]
    }
}

pub fn k_nearest<S: PointSet + ?Sized>(points: &S, query: &[f64], k: usize) -> Result<NeighborList> {
    if k == 0 || k > points.len() {
        return Err(Error::InvalidK { k, n: points.len() });
    }
    let mut order = NeighborOrder::new(points, query)?;
    Ok(NeighborList {
        entries: order.prefix(k).to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    struct Rows(Vec<Vec<f64>>);

    impl PointSet for Rows {
        fn dim(&self) -> usize {
            self.0.first().map_or(0, Vec::len)
        }
        fn len(&self) -> usize {
            self.0.len()
        }
        fn point(&self, index: usize) -> &[f64] {
            &self.0[index]
        }
    }

    fn sort_oracle(rows: &Rows, query: &[f64], k: usize) -> Vec<usize> {
        let mut all: Vec<(f64, usize)> = rows
            .0
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let s: f64 = p.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
                (s.sqrt(), i)
            })
            .collect();
        all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        all.into_iter().take(k).map(|(_, i)| i).collect()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(euclidean_distance(&[0.0, 0.0], &[0.0, 0.0]).unwrap(), 0.0);
        let d = euclidean_distance(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((d - std::f64::consts::SQRT_2).abs() < 1e-15);
        let d = euclidean_distance(&[0.1, 0.1], &[0.2, 0.2]).unwrap();
        assert!((d - 0.141_421_356_237_309_5).abs() < 1e-12);
        assert!(matches!(
            euclidean_distance(&[0.0], &[0.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn feature_vector_rejects_out_of_range() {
        assert!(FeatureVector::new(vec![0.0, 1.0]).is_ok());
        assert!(FeatureVector::new(vec![]).is_err());
        assert!(FeatureVector::new(vec![1.5]).is_err());
        assert!(FeatureVector::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn k_nearest_examples() {
        let rows = Rows(vec![vec![0.1, 0.1], vec![0.9, 0.9], vec![0.2, 0.2]]);
        assert_eq!(k_nearest(&rows, &[0.0, 0.0], 2).unwrap().indices(), vec![0, 2]);
        assert_eq!(k_nearest(&rows, &[0.0, 0.0], 3).unwrap().indices(), vec![0, 2, 1]);
        assert!(k_nearest(&rows, &[0.0, 0.0], 0).is_err());
        assert!(k_nearest(&rows, &[0.0, 0.0], 4).is_err());
        assert!(k_nearest(&rows, &[0.0], 1).is_err());
    }

    #[test]
    fn ties_prefer_lower_index() {
        let rows = Rows(vec![vec![0.75], vec![0.25], vec![0.75]]);
        assert_eq!(k_nearest(&rows, &[0.5], 3).unwrap().indices(), vec![0, 1, 2]);
        let rows = Rows(vec![vec![0.25], vec![0.75]]);
        assert_eq!(k_nearest(&rows, &[0.5], 1).unwrap().indices(), vec![0]);
        let rows = Rows(vec![vec![0.6], vec![0.4]]);
        // both at 0.1 in exact arithmetic, but not in binary floating point
        let expect = sort_oracle(&rows, &[0.5], 1);
        assert_eq!(k_nearest(&rows, &[0.5], 1).unwrap().indices(), expect);
        let rows = Rows(vec![vec![1.0], vec![0.0]]);
        assert_eq!(k_nearest(&rows, &[0.5], 1).unwrap().indices(), vec![0]);
    }

    fn rows_strategy() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
        (1usize..4).prop_flat_map(|d| {
            (
                prop::collection::vec(prop::collection::vec(0u8..=20, d), 1..300),
                prop::collection::vec(0u8..=20, d),
            )
                .prop_map(|(rows, q)| {
                    // coarse grid so distance ties are common
                    let scale = |v: u8| f64::from(v) / 20.0;
                    (
                        rows.into_iter().map(|r| r.into_iter().map(scale).collect()).collect(),
                        q.into_iter().map(scale).collect(),
                    )
                })
        })
    }

    proptest! {
        #[test]
        fn matches_sort_oracle((rows, q) in rows_strategy(), kfrac in 0.0f64..1.0) {
            let rows = Rows(rows);
            let n = rows.len();
            let k = 1 + ((n - 1) as f64 * kfrac) as usize;
            let got = k_nearest(&rows, &q, k).unwrap();
            prop_assert_eq!(got.indices(), sort_oracle(&rows, &q, k));
            prop_assert!(got.entries.windows(2).all(|w| w[0].distance <= w[1].distance));
        }

        #[test]
        fn prefix_property((rows, q) in rows_strategy()) {
            let rows = Rows(rows);
            let n = rows.len();
            let mut prev = k_nearest(&rows, &q, 1).unwrap().indices();
            for k in 2..=n.min(60) {
                let next = k_nearest(&rows, &q, k).unwrap().indices();
                prop_assert_eq!(&next[..k - 1], &prev[..]);
                prev = next;
            }
        }

        #[test]
        fn permutation_preserves_selected_points(
            rows in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 2), 2..100),
            q in prop::collection::vec(0.0f64..1.0, 2),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let k = rows.len() / 2 + 1;
            let mut perm: Vec<usize> = (0..rows.len()).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let permuted = Rows(perm.iter().map(|&i| rows[i].clone()).collect());
            let rows = Rows(rows);
            let mut a = k_nearest(&rows, &q, k).unwrap().indices();
            let mut b: Vec<usize> = k_nearest(&permuted, &q, k).unwrap().indices()
                .into_iter().map(|i| perm[i]).collect();
            let mut dists: Vec<f64> = (0..rows.len()).map(|i| distance_unchecked(&rows.0[i], &q)).collect();
            dists.sort_by(f64::total_cmp);
            prop_assume!(dists.windows(2).all(|w| w[0] < w[1]));
            a.sort_unstable();
            b.sort_unstable();
            prop_assert_eq!(a, b);
        }
    }
}
