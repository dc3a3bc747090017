use std::collections::HashSet;

use rand::seq::index;
use rand::Rng;

use crate::datagen::RngSeed;
use crate::error::{Error, Result};
use crate::types::Edge;

/// `q` distinct ordered pairs over `n` nodes, uniform without replacement.
pub fn sample_edges(n: usize, q: usize, seed: RngSeed, exclude_self: bool) -> Result<Vec<Edge>> {
    let available = if exclude_self { n * n.saturating_sub(1) } else { n * n };
    if q > available {
        return Err(Error::TooManyEdges {
            requested: q,
            available,
        });
    }
    let mut rng = seed.rng();
    Ok(index::sample(&mut rng, available, q)
        .into_iter()
        .map(|k| {
            if exclude_self {
                let (i, j) = (k / (n - 1), k % (n - 1));
                Edge::new(i, if j >= i { j + 1 } else { j })
            } else {
                Edge::new(k / n, k % n)
            }
        })
        .collect())
}

/// `q` distinct unordered pairs of different nodes, each returned in a
/// random orientation.
pub fn sample_unordered_pairs(n: usize, q: usize, seed: RngSeed) -> Result<Vec<Edge>> {
    let available = n * n.saturating_sub(1) / 2;
    if q > available {
        return Err(Error::TooManyEdges {
            requested: q,
            available,
        });
    }
    let mut rng = seed.rng();
    let picks = index::sample(&mut rng, available, q).into_vec();
    Ok(picks
        .into_iter()
        .map(|k| {
            let (i, j) = unrank_pair(k);
            if rng.random_bool(0.5) {
                Edge::new(i, j)
            } else {
                Edge::new(j, i)
            }
        })
        .collect())
}

/// `k`-th pair `(i, j)` with `i < j` in the order (0,1), (0,2), (1,2), (0,3), ...
fn unrank_pair(k: usize) -> (usize, usize) {
    let mut j = (((8.0 * k as f64 + 1.0).sqrt() + 1.0) / 2.0) as usize;
    while j * (j - 1) / 2 > k {
        j -= 1;
    }
    while (j + 1) * j / 2 <= k {
        j += 1;
    }
    (k - j * (j - 1) / 2, j)
}

/// Random permutation of `0..n` split into consecutive blocks of `sizes`.
pub fn split_indices(n: usize, sizes: &[usize], seed: RngSeed) -> Result<Vec<Vec<usize>>> {
    let total: usize = sizes.iter().sum();
    if total > n {
        return Err(Error::InvalidArgument(format!("cannot split {n} items into {sizes:?}")));
    }
    let mut rng = seed.rng();
    let perm = index::sample(&mut rng, n, total).into_vec();
    let mut out = Vec::with_capacity(sizes.len());
    let mut start = 0;
    for &s in sizes {
        out.push(perm[start..start + s].to_vec());
        start += s;
    }
    Ok(out)
}

/// True when no unordered pair occurs twice across all lists.
pub fn unordered_pairs_unique(lists: &[&[Edge]]) -> bool {
    let mut seen = HashSet::new();
    lists
        .iter()
        .flat_map(|l| l.iter())
        .all(|e| seen.insert((e.first.min(e.second), e.first.max(e.second))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exhaustive_sample_covers_all_pairs() {
        let e = sample_edges(5, 20, RngSeed(1), true).unwrap();
        let set: HashSet<_> = e.iter().map(|e| (e.first, e.second)).collect();
        assert_eq!(set.len(), 20);
        assert!(e.iter().all(|e| !e.is_loop()));
        let e = sample_edges(3, 9, RngSeed(1), false).unwrap();
        assert_eq!(e.iter().map(|e| (e.first, e.second)).collect::<HashSet<_>>().len(), 9);
    }

    #[test]
    fn single_pair_and_limits() {
        let e = sample_edges(2, 1, RngSeed(4), true).unwrap();
        assert!(e[0] == Edge::new(0, 1) || e[0] == Edge::new(1, 0));
        assert!(matches!(
            sample_edges(3, 7, RngSeed(0), true),
            Err(Error::TooManyEdges { requested: 7, available: 6 })
        ));
        assert!(sample_unordered_pairs(4, 7, RngSeed(0)).is_err());
    }

    #[test]
    fn samples_have_no_duplicates() {
        let e = sample_edges(100, 1500, RngSeed(9), true).unwrap();
        assert_eq!(e.iter().map(|e| (e.first, e.second)).collect::<HashSet<_>>().len(), 1500);
        assert_eq!(e, sample_edges(100, 1500, RngSeed(9), true).unwrap());
    }

    #[test]
    fn unordered_pairs_are_unique_and_oriented_both_ways() {
        let e = sample_unordered_pairs(200, 1200, RngSeed(3)).unwrap();
        assert!(unordered_pairs_unique(&[&e]));
        assert!(e.iter().all(|e| !e.is_loop() && e.first < 200 && e.second < 200));
        let forward = e.iter().filter(|e| e.first < e.second).count();
        assert!(forward > 500 && forward < 700, "{forward}");
        let all = sample_unordered_pairs(6, 15, RngSeed(3)).unwrap();
        assert!(unordered_pairs_unique(&[&all]));
    }

    #[test]
    fn unrank_pair_enumerates_in_order() {
        let mut k = 0;
        for j in 1..50 {
            for i in 0..j {
                assert_eq!(unrank_pair(k), (i, j));
                k += 1;
            }
        }
    }

    #[test]
    fn split_is_disjoint() {
        let parts = split_indices(400, &[200, 100, 100], RngSeed(2)).unwrap();
        let all: HashSet<usize> = parts.iter().flatten().copied().collect();
        assert_eq!(all.len(), 400);
        assert!(split_indices(10, &[6, 6], RngSeed(2)).is_err());
    }
}
