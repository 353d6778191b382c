//! Sparse undirected graphs in compressed adjacency form, the G(n,p)
//! sampler, and pseudorandomness estimates.

mod io;
mod jumble;

pub use io::{read_binary, write_binary, GRAPH_MAGIC, GRAPH_FORMAT_VERSION};
pub use jumble::{edges_between, estimate_jumbledness, JumblednessEstimate};

use rand::Rng;
use thiserror::Error;

use crate::rng::{stream_rng, Stream};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("edge probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("graph must have at least one vertex")]
    NoVertices,
    #[error("{0} vertices exceed the 32-bit vertex id range")]
    TooManyVertices(usize),
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("invalid adjacency structure: {0}")]
    Malformed(String),
    #[error("pair count must be at least 1")]
    NoPairs,
    #[error("subset size range {min}..={max} is empty or outside 1..={n}")]
    InvalidSubsetRange { min: usize, max: usize, n: usize },
    #[error("jumbledness sampling needs at least two vertices")]
    TooFewVertices,
    #[error("graph I/O failed: {0}")]
    Io(#[from] std::io::Error),
}

/// Immutable simple undirected graph.
///
/// Neighbors of `v` are `neighbors[offsets[v]..offsets[v + 1]]`, strictly
/// increasing. Every edge appears once in each endpoint's list.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    p: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeStats {
    pub min: usize,
    pub max: usize,
    pub mean: f64,
}

impl Graph {
    /// Graph on `n` vertices without edges.
    pub fn empty(n: usize) -> Result<Self, GraphError> {
        check_vertex_count(n)?;
        Ok(Self { n, offsets: vec![0; n + 1], neighbors: Vec::new(), p: None })
    }

    /// Complete graph K_n.
    pub fn complete(n: usize) -> Result<Self, GraphError> {
        check_vertex_count(n)?;
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::with_capacity(n * (n - 1));
        offsets.push(0);
        for v in 0..n {
            neighbors.extend((0..n as u32).filter(|&u| u as usize != v));
            offsets.push(neighbors.len());
        }
        Ok(Self { n, offsets, neighbors, p: None })
    }

    /// Builds a graph from an undirected edge list. Each edge must be listed
    /// once, in either orientation.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        check_vertex_count(n)?;
        let mut degree = vec![0usize; n];
        for &(u, v) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: x, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            degree[u] += 1;
            degree[v] += 1;
        }
        let offsets = prefix_offsets(&degree);
        let mut cursor = offsets[..n].to_vec();
        let mut neighbors = vec![0u32; offsets[n]];
        for &(u, v) in edges {
            neighbors[cursor[u]] = v as u32;
            cursor[u] += 1;
            neighbors[cursor[v]] = u as u32;
            cursor[v] += 1;
        }
        for v in 0..n {
            let list = &mut neighbors[offsets[v]..offsets[v + 1]];
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(GraphError::DuplicateEdge(v, w[0] as usize));
            }
        }
        Ok(Self { n, offsets, neighbors, p: None })
    }

    /// Wraps raw CSR arrays after checking every structural invariant.
    pub fn from_csr(n: usize, offsets: Vec<usize>, neighbors: Vec<u32>) -> Result<Self, GraphError> {
        check_vertex_count(n)?;
        let g = Self { n, offsets, neighbors, p: None };
        g.validate()?;
        Ok(g)
    }

    /// Checks symmetry, sortedness, absence of loops and offset consistency.
    pub fn validate(&self) -> Result<(), GraphError> {
        let bad = |msg: String| Err(GraphError::Malformed(msg));
        if self.offsets.len() != self.n + 1 {
            return bad(format!("{} offsets for {} vertices", self.offsets.len(), self.n));
        }
        if self.offsets[0] != 0 || self.offsets[self.n] != self.neighbors.len() {
            return bad("offsets do not span the neighbor array".into());
        }
        if !self.neighbors.len().is_multiple_of(2) {
            return bad("odd neighbor array length".into());
        }
        for v in 0..self.n {
            if self.offsets[v] > self.offsets[v + 1] {
                return bad(format!("offsets decrease at vertex {v}"));
            }
            let list = self.neighbors(v);
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("neighbors of {v} not strictly increasing"));
            }
            for &u in list {
                let u = u as usize;
                if u >= self.n {
                    return Err(GraphError::VertexOutOfRange { vertex: u, n: self.n });
                }
                if u == v {
                    return Err(GraphError::SelfLoop(v));
                }
                if !self.has_edge(u, v) {
                    return bad(format!("edge {v}-{u} missing its reverse"));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    /// Edge probability the graph was sampled with, if it came from
    /// [`sample_gnp`].
    pub fn p(&self) -> Option<f64> {
        self.p
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn neighbor_array(&self) -> &[u32] {
        &self.neighbors
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Membership test by binary search in the sorted neighbor list.
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    /// Every edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .map(|&v| v as usize)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }
}

fn check_vertex_count(n: usize) -> Result<(), GraphError> {
    if n == 0 {
        return Err(GraphError::NoVertices);
    }
    if n > u32::MAX as usize {
        return Err(GraphError::TooManyVertices(n));
    }
    Ok(())
}

fn prefix_offsets(degree: &[usize]) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(degree.len() + 1);
    let mut acc = 0;
    offsets.push(0);
    for &d in degree {
        acc += d;
        offsets.push(acc);
    }
    offsets
}

/// Samples G(n, p): each of the C(n,2) vertex pairs is an edge independently
/// with probability `p`.
///
/// Present edges are enumerated row by row over the strict lower triangle by
/// drawing geometric gaps between successive edges, so the expected cost is
/// O(n + m) rather than O(n²). Rows come out in increasing order, which
/// leaves every adjacency list sorted without a sort pass.
pub fn sample_gnp(n: usize, p: f64, seed: u64) -> Result<Graph, GraphError> {
    check_vertex_count(n)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(GraphError::InvalidProbability(p));
    }
    let mut g = if p == 0.0 {
        Graph::empty(n)?
    } else if p == 1.0 {
        Graph::complete(n)?
    } else {
        sample_sparse(n, p, seed)
    };
    g.p = Some(p);
    Ok(g)
}

fn sample_sparse(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = stream_rng(seed, Stream::Graph);
    let log_q = (-p).ln_1p();
    let pairs = n as f64 * (n as f64 - 1.0) / 2.0;
    let expected = pairs * p;
    let reserve = (expected + 6.0 * expected.sqrt() + 16.0).min(pairs) as usize;
    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(reserve);

    let n = n as u64;
    // Current cell is (row, col) with col < row; `col` is one past the last
    // visited column.
    let mut row: u64 = 1;
    let mut col: u64 = 0;
    while row < n {
        let r: f64 = rng.random();
        let gap = ((-r).ln_1p() / log_q).floor();
        let gap = if gap < (1u64 << 62) as f64 { gap as u64 } else { 1u64 << 62 };
        col += gap;
        while col >= row && row < n {
            col -= row;
            row += 1;
        }
        if row < n {
            edges.push((col as u32, row as u32));
            col += 1;
        }
    }

    let n = n as usize;
    let mut degree = vec![0usize; n];
    for &(u, v) in &edges {
        degree[u as usize] += 1;
        degree[v as usize] += 1;
    }
    let offsets = prefix_offsets(&degree);
    let mut cursor = offsets[..n].to_vec();
    let mut neighbors = vec![0u32; offsets[n]];
    // Edges arrive ordered by (row, col) with col < row. Vertex x first
    // receives its smaller neighbors while row x is scanned, then its larger
    // neighbors from later rows in increasing order.
    for &(u, v) in &edges {
        let (u, v) = (u as usize, v as usize);
        neighbors[cursor[v]] = u as u32;
        cursor[v] += 1;
        neighbors[cursor[u]] = v as u32;
        cursor[u] += 1;
    }
    debug_assert!((0..n).all(|v| neighbors[offsets[v]..offsets[v + 1]].windows(2).all(|w| w[0] < w[1])));
    Graph { n, offsets, neighbors, p: None }
}

/// Exact minimum, maximum and mean degree.
pub fn degree_stats(g: &Graph) -> DegreeStats {
    let (min, max) = (0..g.n()).map(|v| g.degree(v)).fold((usize::MAX, 0), |(lo, hi), d| (lo.min(d), hi.max(d)));
    DegreeStats { min, max, mean: 2.0 * g.edge_count() as f64 / g.n() as f64 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path3() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn p_zero_and_one() {
        let g = sample_gnp(5, 0.0, 1).unwrap();
        assert_eq!(g.edge_count(), 0);
        let g = sample_gnp(5, 1.0, 1).unwrap();
        assert_eq!(g.edge_count(), 10);
        g.validate().unwrap();
        assert_eq!(g.p(), Some(1.0));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(sample_gnp(0, 0.5, 1), Err(GraphError::NoVertices)));
        assert!(matches!(sample_gnp(5, 1.5, 1), Err(GraphError::InvalidProbability(_))));
        assert!(matches!(sample_gnp(5, -0.1, 1), Err(GraphError::InvalidProbability(_))));
        assert!(matches!(sample_gnp(5, f64::NAN, 1), Err(GraphError::InvalidProbability(_))));
    }

    #[test]
    fn edge_count_within_five_sigma() {
        // C(10000, 2) = 49_995_000 pairs; mean 499_950, sigma = sqrt(mean * 0.99) ~ 703.5
        let pairs = 10_000.0 * 9_999.0 / 2.0;
        let mean = pairs * 0.01;
        let sigma = (mean * 0.99_f64).sqrt();
        let g = sample_gnp(10_000, 0.01, 7).unwrap();
        assert!((g.edge_count() as f64 - mean).abs() <= 5.0 * sigma, "{}", g.edge_count());
    }

    #[test]
    fn edge_count_mean_over_many_samples() {
        let n = 2000usize;
        let p = 0.01;
        let pairs = (n * (n - 1) / 2) as f64;
        let sigma = (pairs * p * (1.0 - p)).sqrt();
        let total: usize = (0..100).map(|s| sample_gnp(n, p, s).unwrap().edge_count()).sum();
        let mean = total as f64 / 100.0;
        assert!((mean - pairs * p).abs() <= 4.0 * sigma / 10.0, "mean {mean}");
    }

    #[test]
    fn every_pair_is_reachable() {
        // With p = 0.5 on 6 vertices each of the 15 pairs appears in about
        // half of 400 seeds.
        let mut hits = [[0u32; 6]; 6];
        for seed in 0..400 {
            let g = sample_gnp(6, 0.5, seed).unwrap();
            for (u, v) in g.edges() {
                hits[u][v] += 1;
            }
        }
        for (u, row) in hits.iter().enumerate() {
            for (v, &h) in row.iter().enumerate().skip(u + 1) {
                // 400 draws, sd = 10
                assert!((h as i64 - 200).abs() <= 50, "pair {u}-{v}: {h}");
            }
        }
    }

    #[test]
    fn degree_stats_examples() {
        let s = degree_stats(&Graph::empty(5).unwrap());
        assert_eq!((s.min, s.max, s.mean), (0, 0, 0.0));
        let s = degree_stats(&Graph::complete(5).unwrap());
        assert_eq!((s.min, s.max, s.mean), (4, 4, 4.0));
        let s = degree_stats(&path3());
        assert_eq!((s.min, s.max), (1, 2));
        assert!((s.mean - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn from_edges_rejects_loops_and_duplicates() {
        assert!(matches!(Graph::from_edges(3, &[(1, 1)]), Err(GraphError::SelfLoop(1))));
        assert!(matches!(Graph::from_edges(3, &[(0, 1), (1, 0)]), Err(GraphError::DuplicateEdge(..))));
        assert!(matches!(Graph::from_edges(3, &[(0, 3)]), Err(GraphError::VertexOutOfRange { .. })));
    }

    #[test]
    fn from_csr_rejects_asymmetric() {
        let err = Graph::from_csr(2, vec![0, 1, 1], vec![1]).unwrap_err();
        assert!(matches!(err, GraphError::Malformed(_)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn sampled_graphs_are_well_formed(n in 1usize..300, p in 0.0f64..=1.0, seed in any::<u64>()) {
            let g = sample_gnp(n, p, seed).unwrap();
            prop_assert!(g.validate().is_ok());
            prop_assert_eq!(g.edge_count() * 2, g.neighbor_array().len());
            let again = sample_gnp(n, p, seed).unwrap();
            prop_assert_eq!(&g, &again);
        }
    }
}
