//! Initial opinion models and the vertex censuses around the first two days.
//!
//! The morning opinion `r0` has exactly ⌈n/2⌉ positives at uniformly random
//! positions. Flipping ⌊c√n⌉ uniformly chosen negative vertices (the swing
//! vertices) to +1 gives the evening opinion `s̃0`.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{majority_step, signed_sum, DynamicsError, OpinionVector};
use crate::graph::Graph;
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Error, PartialEq)]
pub enum OpinionError {
    #[error("swing coefficient {0} must be finite and non-negative")]
    InvalidSwingCoefficient(f64),
    #[error("{requested} swing vertices requested but only {available} vertices are negative")]
    SwingExceedsNegatives { requested: usize, available: usize },
    #[error("discrepancy {d} does not have the parity of n = {n}")]
    DiscrepancyParity { n: usize, d: i64 },
    #[error("discrepancy {d} outside [-{n}, {n}]")]
    DiscrepancyRange { n: usize, d: i64 },
    #[error("gamma {0} must be finite and non-negative")]
    InvalidGamma(f64),
    #[error("census needs p in (0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("swing vertex {vertex} out of range for {n} vertices")]
    SwingOutOfRange { vertex: usize, n: usize },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OpinionKind {
    /// Independent fair ±1 per vertex.
    UniformRandom,
    /// Exactly (n + d)/2 positives at random positions.
    FixedDiscrepancy { d: i64 },
    /// Morning opinion plus ⌊c√n⌉ swing vertices.
    MorningEvening { c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpinionModel {
    pub kind: OpinionKind,
    pub seed: u64,
}

/// A sampled initial state. For the morning/evening model `morning` holds
/// `r0` and `swing_set` the flipped vertices; `s0` is then `s̃0`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialOpinions {
    pub s0: OpinionVector,
    pub morning: Option<OpinionVector>,
    pub swing_set: Vec<usize>,
}

impl OpinionModel {
    pub fn sample(&self, n: usize) -> Result<InitialOpinions, OpinionError> {
        let plain = |s0| InitialOpinions { s0, morning: None, swing_set: Vec::new() };
        match self.kind {
            OpinionKind::UniformRandom => Ok(plain(sample_uniform(n, self.seed))),
            OpinionKind::FixedDiscrepancy { d } => Ok(plain(sample_fixed_discrepancy(n, d, self.seed)?)),
            OpinionKind::MorningEvening { c } => {
                let r0 = sample_morning(n, self.seed);
                let (s0, swing_set) = apply_swing(&r0, c, self.seed)?;
                Ok(InitialOpinions { s0, morning: Some(r0), swing_set })
            }
        }
    }
}

/// Each coordinate independently ±1 with probability 1/2.
pub fn sample_uniform(n: usize, seed: u64) -> OpinionVector {
    let mut rng = stream_rng(seed, Stream::Opinions);
    let words = (0..n.div_ceil(64)).map(|_| rng.random::<u64>()).collect();
    OpinionVector::from_words(n, words)
}

fn with_positives(n: usize, k: usize, seed: u64) -> OpinionVector {
    let mut rng = stream_rng(seed, Stream::Opinions);
    let mut s = OpinionVector::constant(n, false);
    for v in index::sample(&mut rng, n, k) {
        s.set(v, true);
    }
    s
}

/// Exactly ⌈n/2⌉ positives, uniformly placed.
pub fn sample_morning(n: usize, seed: u64) -> OpinionVector {
    with_positives(n, n.div_ceil(2), seed)
}

/// Exactly (n + d)/2 positives, uniformly placed, so the bias is `d`.
pub fn sample_fixed_discrepancy(n: usize, d: i64, seed: u64) -> Result<OpinionVector, OpinionError> {
    if d.unsigned_abs() as usize > n {
        return Err(OpinionError::DiscrepancyRange { n, d });
    }
    if (n as i64 + d) % 2 != 0 {
        return Err(OpinionError::DiscrepancyParity { n, d });
    }
    Ok(with_positives(n, ((n as i64 + d) / 2) as usize, seed))
}

/// ⌊c√n⌉, rounding half away from zero.
pub fn swing_count(n: usize, c: f64) -> usize {
    (c * (n as f64).sqrt()).round() as usize
}

/// Flips ⌊c√n⌉ uniformly chosen negative coordinates of `r0` to +1.
/// Returns the evening opinion and the sorted swing set.
pub fn apply_swing(r0: &OpinionVector, c: f64, seed: u64) -> Result<(OpinionVector, Vec<usize>), OpinionError> {
    if !c.is_finite() || c < 0.0 {
        return Err(OpinionError::InvalidSwingCoefficient(c));
    }
    let n = r0.len();
    let k = swing_count(n, c);
    let negatives: Vec<usize> = (0..n).filter(|&v| !r0.is_positive(v)).collect();
    if k > negatives.len() {
        return Err(OpinionError::SwingExceedsNegatives { requested: k, available: negatives.len() });
    }
    let mut rng = stream_rng(seed, Stream::Swing);
    let mut swing: Vec<usize> = index::sample(&mut rng, negatives.len(), k).into_iter().map(|i| negatives[i]).collect();
    swing.sort_unstable();
    let mut evening = r0.clone();
    for &v in &swing {
        evening.set(v, true);
    }
    Ok((evening, swing))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub gamma: f64,
    /// −γ·p^{3/2}·n; almost-positive means strictly above this.
    pub threshold: f64,
    pub almost_positive: usize,
    pub unstable: usize,
    pub unstable_with_swing: usize,
    /// almost_positive − ⌈n/2⌉.
    pub excess: i64,
    pub swing_count: usize,
}

impl CensusReport {
    /// Measured α = excess / (p·n^{3/2}).
    pub fn alpha(&self, n: usize, p: f64) -> f64 {
        self.excess as f64 / (p * (n as f64).powf(1.5))
    }
}

/// Counts γ-almost-positive vertices (neighbor sum of `r1 = step(r0)` above
/// −γp^{3/2}n), unstable vertices (neighbor sum of `r0` exactly zero) and
/// unstable vertices with at least one swing neighbor.
///
/// `p` is the nominal model probability, not the realized edge density.
pub fn census(g: &Graph, r0: &OpinionVector, swing_set: &[usize], gamma: f64, p: f64) -> Result<CensusReport, OpinionError> {
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(OpinionError::InvalidGamma(gamma));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(OpinionError::InvalidProbability(p));
    }
    let n = g.n();
    let r1 = majority_step(g, r0)?;
    let mut swing_mask = OpinionVector::constant(n, false);
    for &v in swing_set {
        if v >= n {
            return Err(OpinionError::SwingOutOfRange { vertex: v, n });
        }
        swing_mask.set(v, true);
    }
    let threshold = -gamma * p.powf(1.5) * n as f64;
    let signed = |s: &OpinionVector, v: usize| signed_sum(s.words(), g.neighbors(v));
    let (almost_positive, unstable, unstable_with_swing) = (0..n)
        .into_par_iter()
        .map(|v| {
            let ap = (signed(&r1, v) as f64 > threshold) as usize;
            let un = signed(r0, v) == 0;
            let sw = un && g.neighbors(v).iter().any(|&u| swing_mask.is_positive(u as usize));
            (ap, un as usize, sw as usize)
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    Ok(CensusReport {
        gamma,
        threshold,
        almost_positive,
        unstable,
        unstable_with_swing,
        excess: almost_positive as i64 - n.div_ceil(2) as i64,
        swing_count: swing_set.len(),
    })
}

/// Bias of `s̃2`: morning opinion, swing with coefficient `c`, two steps.
pub fn day2_bias_experiment(g: &Graph, c: f64, seed: u64) -> Result<i64, OpinionError> {
    let r0 = sample_morning(g.n(), seed);
    let (s0, _) = apply_swing(&r0, c, seed)?;
    let s1 = majority_step(g, &s0)?;
    Ok(majority_step(g, &s1)?.bias())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::neighbor_sum;
    use crate::graph::sample_gnp;
    use proptest::prelude::*;

    fn signs(s: &str) -> OpinionVector {
        OpinionVector::from_signs(&s.chars().map(|c| if c == '+' { 1 } else { -1 }).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn uniform_is_deterministic_and_fair() {
        assert_eq!(sample_uniform(1, 3).len(), 1);
        assert_eq!(sample_uniform(1000, 3), sample_uniform(1000, 3));
        let n = 10_000usize;
        let biases: Vec<i64> = (0..200).map(|s| sample_uniform(n, s).bias()).collect();
        let mean = biases.iter().sum::<i64>() as f64 / 200.0;
        assert!(mean.abs() <= 4.0 * (n as f64 / 200.0).sqrt(), "mean {mean}");
        // P[|S0| >= sqrt(n)] = 2Ψ(1) ≈ 0.3173.
        let frac = biases.iter().filter(|b| b.unsigned_abs() as f64 >= (n as f64).sqrt()).count() as f64 / 200.0;
        let expected = 2.0 * crate::probkit::psi(1.0);
        assert!((frac - expected).abs() <= 0.1, "frac {frac}");
    }

    #[test]
    fn morning_counts() {
        assert_eq!(sample_morning(4, 1).bias(), 0);
        assert_eq!(sample_morning(5, 1).bias(), 1);
        let a = sample_morning(100, 1);
        let b = sample_morning(100, 2);
        assert_eq!((a.positives(), b.positives()), (50, 50));
        assert_ne!(a, b);
    }

    #[test]
    fn fixed_discrepancy() {
        let s = sample_fixed_discrepancy(10, 4, 1).unwrap();
        assert_eq!(s.bias(), 4);
        assert_eq!(sample_fixed_discrepancy(10, -10, 1).unwrap().bias(), -10);
        assert_eq!(sample_fixed_discrepancy(10, 3, 1), Err(OpinionError::DiscrepancyParity { n: 10, d: 3 }));
        assert_eq!(sample_fixed_discrepancy(10, 12, 1), Err(OpinionError::DiscrepancyRange { n: 10, d: 12 }));
    }

    #[test]
    fn swing_examples() {
        let r0 = sample_morning(100, 4);
        let (s, set) = apply_swing(&r0, 0.0, 1).unwrap();
        assert_eq!((s, set.len()), (r0.clone(), 0));

        let (s, set) = apply_swing(&r0, 1.0, 1).unwrap();
        assert_eq!(set.len(), 10);
        assert_eq!(s.bias(), r0.bias() + 20);

        let r0 = sample_morning(10_000, 4);
        let (s, set) = apply_swing(&r0, 0.5, 9).unwrap();
        assert_eq!(set.len(), 50);
        assert_eq!(s.bias(), 100);
    }

    #[test]
    fn swing_rejections() {
        let r0 = sample_morning(16, 1);
        assert_eq!(
            apply_swing(&r0, 3.0, 1),
            Err(OpinionError::SwingExceedsNegatives { requested: 12, available: 8 })
        );
        assert!(matches!(apply_swing(&r0, -1.0, 1), Err(OpinionError::InvalidSwingCoefficient(_))));
        assert!(matches!(apply_swing(&r0, f64::NAN, 1), Err(OpinionError::InvalidSwingCoefficient(_))));
    }

    #[test]
    fn census_on_empty_graph() {
        let g = Graph::empty(9).unwrap();
        let r0 = sample_morning(9, 2);
        let (_, swing) = apply_swing(&r0, 1.0, 2).unwrap();
        let rep = census(&g, &r0, &swing, 1.0, 0.3).unwrap();
        assert_eq!((rep.almost_positive, rep.unstable, rep.unstable_with_swing), (9, 9, 0));
        assert_eq!(rep.excess, 4);
        assert_eq!(rep.swing_count, 3);
    }

    #[test]
    fn census_on_path() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let rep = census(&g, &signs("+-+"), &[], 1.0, 0.5).unwrap();
        assert!((rep.threshold + 3.0 / (2.0 * 2f64.sqrt())).abs() < 1e-12);
        assert_eq!(rep.almost_positive, 2);
        assert_eq!(rep.unstable, 0);
        assert_eq!(rep.excess, 0);
    }

    #[test]
    fn census_rejects_bad_inputs() {
        let g = Graph::empty(3).unwrap();
        let r0 = signs("+-+");
        assert!(matches!(census(&g, &r0, &[], -1.0, 0.5), Err(OpinionError::InvalidGamma(_))));
        assert!(matches!(census(&g, &r0, &[], 1.0, 0.0), Err(OpinionError::InvalidProbability(_))));
        assert!(matches!(census(&g, &r0, &[5], 1.0, 0.5), Err(OpinionError::SwingOutOfRange { .. })));
        assert!(matches!(census(&g, &signs("+-"), &[], 1.0, 0.5), Err(OpinionError::Dynamics(_))));
    }

    #[test]
    fn census_counts_against_direct_definitions() {
        let g = sample_gnp(400, 0.05, 12).unwrap();
        let r0 = sample_morning(400, 12);
        let (_, swing) = apply_swing(&r0, 1.0, 12).unwrap();
        let rep = census(&g, &r0, &swing, 0.5, 0.05).unwrap();
        let r1 = majority_step(&g, &r0).unwrap();
        let thr = -0.5 * 0.05f64.powf(1.5) * 400.0;
        let ap = (0..400).filter(|&v| neighbor_sum(&g, &r1, v).unwrap() as f64 > thr).count();
        let unstable: Vec<usize> = (0..400).filter(|&v| neighbor_sum(&g, &r0, v).unwrap() == 0).collect();
        let with_swing = unstable.iter().filter(|&&w| swing.iter().any(|&s| g.has_edge(w, s))).count();
        assert_eq!(rep.almost_positive, ap);
        assert_eq!(rep.unstable, unstable.len());
        assert_eq!(rep.unstable_with_swing, with_swing);
    }

    #[test]
    fn census_excess_positive_mostly() {
        let (n, p) = (5000, 0.02);
        let positive = (0..50u64)
            .filter(|&seed| {
                let g = sample_gnp(n, p, seed).unwrap();
                let r0 = sample_morning(n, seed);
                let (_, swing) = apply_swing(&r0, 1.0, seed).unwrap();
                census(&g, &r0, &swing, 0.1, p).unwrap().excess > 0
            })
            .count();
        assert!(positive >= 40, "{positive}/50");
    }

    #[test]
    fn day2_bias_examples() {
        assert_eq!(day2_bias_experiment(&Graph::complete(100).unwrap(), 1.0, 5).unwrap(), 100);
        assert_eq!(day2_bias_experiment(&Graph::empty(100).unwrap(), 1.0, 5).unwrap(), 20);
        assert!(day2_bias_experiment(&Graph::empty(4).unwrap(), 5.0, 5).is_err());
    }

    #[test]
    fn day2_bias_in_regime() {
        let (n, p) = (10_000usize, 0.02);
        let g = sample_gnp(n, p, 11).unwrap();
        let mut biases: Vec<i64> = (0..50).map(|s| day2_bias_experiment(&g, 1.0, s).unwrap()).collect();
        let positive = biases.iter().filter(|&&b| b > 0).count();
        biases.sort_unstable();
        let median = biases[25] as f64;
        assert!(positive >= 45, "{positive}/50");
        assert!(median >= 0.1 * p * (n as f64).powf(1.5), "median {median}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn swing_flips_only_negatives(n in 2usize..400, c in 0.0f64..0.7, seed in any::<u64>()) {
            let r0 = sample_morning(n, seed);
            let (s, set) = apply_swing(&r0, c, seed).unwrap();
            prop_assert_eq!(set.len(), swing_count(n, c));
            for v in 0..n {
                if set.binary_search(&v).is_ok() {
                    prop_assert!(!r0.is_positive(v) && s.is_positive(v));
                } else {
                    prop_assert_eq!(r0.get(v), s.get(v));
                }
            }
        }

        #[test]
        fn almost_positive_monotone_in_gamma(seed in any::<u64>(), g1 in 0.0f64..2.0, dg in 0.0f64..2.0) {
            let g = sample_gnp(150, 0.1, seed).unwrap();
            let r0 = sample_morning(150, seed);
            let a = census(&g, &r0, &[], g1, 0.1).unwrap();
            let b = census(&g, &r0, &[], g1 + dg, 0.1).unwrap();
            prop_assert!(a.almost_positive <= b.almost_positive);
            // γ = 0 counts exactly the vertices with positive r1-sum.
            let zero = census(&g, &r0, &[], 0.0, 0.1).unwrap();
            let r1 = majority_step(&g, &r0).unwrap();
            let strictly = (0..150).filter(|&v| neighbor_sum(&g, &r1, v).unwrap() > 0).count();
            prop_assert_eq!(zero.almost_positive, strictly);
            prop_assert!(a.unstable_with_swing <= a.unstable && a.unstable <= 150);
        }

        #[test]
        fn swing_never_lowers_later_bias(n in 4usize..120, p in 0.02f64..0.6, c in 0.0f64..0.5, seed in any::<u64>()) {
            let g = sample_gnp(n, p, seed).unwrap();
            let r0 = sample_morning(n, seed);
            let (s, _) = apply_swing(&r0, c, seed).unwrap();
            let (mut morning, mut evening) = (r0, s);
            for _ in 0..6 {
                prop_assert!(morning.le(&evening));
                prop_assert!(morning.bias() <= evening.bias());
                morning = majority_step(&g, &morning).unwrap();
                evening = majority_step(&g, &evening).unwrap();
            }
        }
    }
}
