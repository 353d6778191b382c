//! Edge discrepancy between vertex subsets.
//!
//! A graph is (p, β)-jumbled when every pair of subsets satisfies
//! `|e(U,V) − p|U||V|| ≤ β·sqrt(|U||V|)`. Checking all pairs is exponential,
//! so the estimator below samples pairs and reports the worst normalized
//! discrepancy it saw. That is a lower-bound witness for β, not a
//! certificate.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{degree_stats, Graph, GraphError};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumblednessEstimate {
    pub beta_hat: f64,
    pub pairs_tested: usize,
    pub max_discrepancy: f64,
    pub min_degree: usize,
}

/// Number of ordered adjacent pairs `(u, v)` with `u ∈ U` and `v ∈ V`.
///
/// An edge with both ends in `U ∩ V` is counted twice, once per
/// orientation. Repeated ids in either slice are counted once.
pub fn edges_between(g: &Graph, u_set: &[usize], v_set: &[usize]) -> Result<u64, GraphError> {
    let n = g.n();
    for &x in u_set.iter().chain(v_set) {
        if x >= n {
            return Err(GraphError::VertexOutOfRange { vertex: x, n });
        }
    }
    let u_mask = Bitmask::from_ids(n, u_set);
    let v_mask = Bitmask::from_ids(n, v_set);
    Ok(u_mask.ids().map(|u| v_mask.count_in(g.neighbors(u))).sum())
}

/// Samples `pairs` disjoint subset pairs and returns the largest normalized
/// discrepancy `|e(U,V) − p|U||V|| / sqrt(|U||V|)`.
///
/// Both sizes are drawn uniformly from `subset_sizes`; `|U|` is capped at
/// `n − 1` and `|V|` at `n − |U|` so the pair stays disjoint. Deterministic
/// under `seed`.
pub fn estimate_jumbledness(
    g: &Graph,
    p: f64,
    pairs: usize,
    subset_sizes: (usize, usize),
    seed: u64,
) -> Result<JumblednessEstimate, GraphError> {
    let n = g.n();
    let (lo, hi) = subset_sizes;
    if !(0.0..=1.0).contains(&p) {
        return Err(GraphError::InvalidProbability(p));
    }
    if pairs == 0 {
        return Err(GraphError::NoPairs);
    }
    if lo == 0 || lo > hi || hi > n {
        return Err(GraphError::InvalidSubsetRange { min: lo, max: hi, n });
    }
    if n < 2 {
        return Err(GraphError::TooFewVertices);
    }

    let mut rng = stream_rng(seed, Stream::Jumbledness);
    let mut mask = Bitmask::new(n);
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let su = rng.random_range(lo..=hi).min(n - 1);
        let sv = rng.random_range(lo..=hi).min(n - su);
        let picked = index::sample(&mut rng, n, su + sv).into_vec();
        let (u, v) = picked.split_at(su);
        // e(U,V) = e(V,U); scan the smaller side against a mask of the larger.
        let (scan, marked) = if u.len() <= v.len() { (u, v) } else { (v, u) };
        mask.set_all(marked);
        let e: u64 = scan.iter().map(|&x| mask.count_in(g.neighbors(x))).sum();
        mask.unset_all(marked);
        let size = (su * sv) as f64;
        let disc = (e as f64 - p * size).abs() / size.sqrt();
        worst = worst.max(disc);
    }
    Ok(JumblednessEstimate {
        beta_hat: worst,
        pairs_tested: pairs,
        max_discrepancy: worst,
        min_degree: degree_stats(g).min,
    })
}

struct Bitmask {
    words: Vec<u64>,
}

impl Bitmask {
    fn new(n: usize) -> Self {
        Self { words: vec![0; n.div_ceil(64)] }
    }

    fn from_ids(n: usize, ids: &[usize]) -> Self {
        let mut m = Self::new(n);
        m.set_all(ids);
        m
    }

    fn set_all(&mut self, ids: &[usize]) {
        for &x in ids {
            self.words[x >> 6] |= 1 << (x & 63);
        }
    }

    fn unset_all(&mut self, ids: &[usize]) {
        for &x in ids {
            self.words[x >> 6] &= !(1 << (x & 63));
        }
    }

    #[inline]
    fn contains(&self, x: usize) -> bool {
        self.words[x >> 6] >> (x & 63) & 1 == 1
    }

    fn count_in(&self, list: &[u32]) -> u64 {
        list.iter().filter(|&&x| self.contains(x as usize)).count() as u64
    }

    fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + b)
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::sample_gnp;

    #[test]
    fn edges_between_examples() {
        let edge = Graph::from_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(edges_between(&edge, &[0], &[1]).unwrap(), 1);
        assert_eq!(edges_between(&edge, &[0, 1], &[0, 1]).unwrap(), 2);
        let path = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(edges_between(&path, &[0], &[1, 2]).unwrap(), 1);
        assert!(matches!(
            edges_between(&path, &[0], &[3]),
            Err(GraphError::VertexOutOfRange { vertex: 3, n: 3 })
        ));
    }

    #[test]
    fn edges_between_matches_pair_enumeration() {
        let g = sample_gnp(60, 0.2, 5).unwrap();
        let u: Vec<usize> = (0..60).filter(|x| x % 3 == 0).collect();
        let v: Vec<usize> = (0..60).filter(|x| x % 2 == 0).collect();
        let brute = u.iter().flat_map(|&a| v.iter().map(move |&b| (a, b))).filter(|&(a, b)| g.has_edge(a, b)).count();
        assert_eq!(edges_between(&g, &u, &v).unwrap(), brute as u64);
    }

    #[test]
    fn empty_graph_has_zero_discrepancy() {
        let g = Graph::empty(50).unwrap();
        let est = estimate_jumbledness(&g, 0.0, 20, (1, 25), 1).unwrap();
        assert_eq!(est.beta_hat, 0.0);
        assert_eq!(est.min_degree, 0);
    }

    #[test]
    fn complete_graph_disjoint_pairs_are_exact() {
        let g = Graph::complete(20).unwrap();
        let est = estimate_jumbledness(&g, 1.0, 100, (1, 20), 9).unwrap();
        assert_eq!(est.beta_hat, 0.0);
        assert_eq!(est.pairs_tested, 100);
        assert_eq!(est.min_degree, 19);
    }

    #[test]
    fn random_graph_witness_stays_near_sqrt_np() {
        let (n, p) = (2000, 0.05);
        let g = sample_gnp(n, p, 3).unwrap();
        let est = estimate_jumbledness(&g, p, 500, (n / 4 - 50, n / 4 + 50), 3).unwrap();
        let scale = (n as f64 * p).sqrt();
        assert!(est.beta_hat <= 10.0 * scale, "beta_hat {}", est.beta_hat);
        assert!(est.beta_hat == est.max_discrepancy && est.beta_hat >= 0.0);
        assert!(est.min_degree as f64 <= 2.0 * g.edge_count() as f64 / n as f64);
    }

    #[test]
    fn deterministic_under_seed() {
        let g = sample_gnp(300, 0.1, 1).unwrap();
        let a = estimate_jumbledness(&g, 0.1, 30, (10, 100), 4).unwrap();
        let b = estimate_jumbledness(&g, 0.1, 30, (10, 100), 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_ranges() {
        let g = Graph::empty(10).unwrap();
        assert!(matches!(estimate_jumbledness(&g, 0.1, 0, (1, 2), 0), Err(GraphError::NoPairs)));
        assert!(matches!(estimate_jumbledness(&g, 0.1, 1, (3, 2), 0), Err(GraphError::InvalidSubsetRange { .. })));
        assert!(matches!(estimate_jumbledness(&g, 0.1, 1, (0, 2), 0), Err(GraphError::InvalidSubsetRange { .. })));
        assert!(matches!(estimate_jumbledness(&g, 0.1, 1, (1, 11), 0), Err(GraphError::InvalidSubsetRange { .. })));
        let one = Graph::empty(1).unwrap();
        assert!(matches!(estimate_jumbledness(&one, 0.1, 1, (1, 1), 0), Err(GraphError::TooFewVertices)));
    }
}
