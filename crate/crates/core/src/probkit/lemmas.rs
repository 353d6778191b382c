//! Exact evaluation of the binomial comparison estimates.
//!
//! Each check returns the exact quantity together with the scale the
//! estimate predicts, so callers can fit or assert the hidden constant.

use serde::{Deserialize, Serialize};

use super::{compensated_sum, guard, normal::phi, BinomSpec, Pmf, ProbError, BERRY_ESSEEN_LIMIT};

fn same_prob(a: BinomSpec, b: BinomSpec) -> Result<f64, ProbError> {
    if a.prob != b.prob {
        return Err(ProbError::MismatchedProbabilities(a.prob, b.prob));
    }
    Ok(a.prob)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftCheck {
    /// max_t |P[X−Y = t+1] − P[X−Y = t]|
    pub max_diff: f64,
    /// The t attaining `max_diff`.
    pub argmax: i64,
    /// C / ((m+n)p(1−p)) for the supplied C.
    pub bound: f64,
    /// max_diff · (m+n)p(1−p): the smallest C that would work here.
    pub ratio: f64,
}

impl ShiftCheck {
    pub fn holds(&self) -> bool {
        self.max_diff <= self.bound
    }
}

/// Largest jump between consecutive masses of X − Y, X ~ Bin(n,p) and
/// Y ~ Bin(m,p), against the scale C/((m+n)p(1−p)).
pub fn check_binom_shift(a: BinomSpec, b: BinomSpec, constant: f64) -> Result<ShiftCheck, ProbError> {
    guard(&[a, b])?;
    let p = same_prob(a, b)?;
    if p == 0.0 || p == 1.0 {
        return Err(ProbError::DegenerateProbability(p));
    }
    if a.trials + b.trials == 0 {
        return Err(ProbError::ZeroTrials);
    }
    let d = super::binom_diff_pmf(a, b)?;
    let (mut max_diff, mut argmax) = (0.0f64, d.min() - 1);
    for t in d.min() - 1..=d.max() {
        let jump = (d.mass(t + 1) - d.mass(t)).abs();
        if jump > max_diff {
            max_diff = jump;
            argmax = t;
        }
    }
    let var = (a.trials + b.trials) as f64 * p * (1.0 - p);
    Ok(ShiftCheck { max_diff, argmax, bound: constant / var, ratio: max_diff * var })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EqualityCheck {
    pub p_equal: f64,
    pub p_at_least: f64,
    /// P[X = Y]·sqrt(np); Θ(1) in the sparse regime.
    pub theta_ratio: f64,
    /// |P[X ≥ Y] − 1/2|
    pub ge_deviation: f64,
    /// (1 + |n−m|p) / sqrt(np)
    pub ge_scale: f64,
    /// Whether 1/n < p < 1/ln n and |n−m| ≤ sqrt(n ln n).
    pub in_regime: bool,
}

/// Exact P[X = Y] and P[X ≥ Y] for X ~ Bin(n,p), Y ~ Bin(m,p).
pub fn check_equality_prob(a: BinomSpec, b: BinomSpec) -> Result<EqualityCheck, ProbError> {
    guard(&[a, b])?;
    let p = same_prob(a, b)?;
    if a.trials == 0 {
        return Err(ProbError::ZeroTrials);
    }
    if p == 0.0 {
        return Err(ProbError::DegenerateProbability(p));
    }
    let d = super::binom_diff_pmf(a, b)?;
    let n = a.trials as f64;
    let gap = (a.trials as f64 - b.trials as f64).abs();
    let p_equal = d.mass(0);
    let p_at_least = d.tail_ge(0);
    let root = (n * p).sqrt();
    let ln_n = n.ln();
    Ok(EqualityCheck {
        p_equal,
        p_at_least,
        theta_ratio: p_equal * root,
        ge_deviation: (p_at_least - 0.5).abs(),
        ge_scale: (1.0 + gap * p) / root,
        in_regime: n > 1.0 && p > 1.0 / n && p < 1.0 / ln_n && gap <= (n * ln_n).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingCheck {
    /// −E[W₂]·max_k P[Z₁ − W₁ = k]
    pub lhs: f64,
    /// P[Z − W ≥ ℓ] − P[Z₁ − W₁ ≥ ℓ]
    pub middle: f64,
    /// E[Z₂]·max_k P[Z₁ − W = k]
    pub rhs: f64,
}

impl CouplingCheck {
    pub fn holds(&self, tolerance: f64) -> bool {
        self.lhs <= self.middle + tolerance && self.middle <= self.rhs + tolerance
    }
}

/// Evaluates the sandwich for Z = Z₁ + Z₂ and W = W₁ + W₂ with all four
/// independent binomials.
pub fn check_coupling(
    z1: BinomSpec,
    z2: BinomSpec,
    w1: BinomSpec,
    w2: BinomSpec,
    l: i64,
) -> Result<CouplingCheck, ProbError> {
    guard(&[z1, z2, w1, w2])?;
    let [pz1, pz2, pw1, pw2] = [z1, z2, w1, w2].map(Pmf::binomial);
    let z = pz1.add(&pz2);
    let w = pw1.add(&pw2);
    let z1_w1 = pz1.sub(&pw1);
    let z1_w = pz1.sub(&w);
    let z_w = z.sub(&w);
    Ok(CouplingCheck {
        lhs: -w2.mean() * z1_w1.max_mass(),
        middle: z_w.tail_ge(l) - z1_w1.tail_ge(l),
        rhs: z2.mean() * z1_w.max_mass(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourRvCheck {
    /// |P[X′ − Y′ ≥ ℓ] − P[X − Y ≥ ℓ]|
    pub difference: f64,
    /// pΔ / sqrt(p·n₀)
    pub scale: f64,
    /// difference / scale (0 when both vanish).
    pub ratio: f64,
    pub delta: u64,
    pub n0: u64,
}

/// X′ ~ Bin(n1,p), Y′ ~ Bin(n2,p), X ~ Bin(n3,p), Y ~ Bin(n4,p).
pub fn check_four_rv(n: [u64; 4], p: f64, l: i64) -> Result<FourRvCheck, ProbError> {
    let specs = n.map(|k| BinomSpec { trials: k, prob: p });
    guard(&specs)?;
    if p == 0.0 {
        return Err(ProbError::DegenerateProbability(p));
    }
    let n0 = *n.iter().min().unwrap();
    if n0 == 0 {
        return Err(ProbError::ZeroTrials);
    }
    let [x1, y1, x, y] = specs.map(Pmf::binomial);
    let difference = (x1.sub(&y1).tail_ge(l) - x.sub(&y).tail_ge(l)).abs();
    let delta = n[0].abs_diff(n[2]).max(n[1].abs_diff(n[3]));
    let scale = p * delta as f64 / (p * n0 as f64).sqrt();
    let ratio = if scale > 0.0 {
        difference / scale
    } else if difference <= 1e-15 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(FourRvCheck { difference, scale, ratio, delta, n0 })
}

/// sup_x |P[(X − np)/σ ≤ x] − Φ(x)| for X ~ Bin(n, p).
///
/// The supremum of the gap between a step function and a continuous CDF is
/// attained at a jump, approached from one side or the other, so it is the
/// maximum over k of |F(k) − Φ(x_k)| and |F(k−1) − Φ(x_k)|.
pub fn berry_esseen_gap(n: u64, p: f64) -> Result<f64, ProbError> {
    BinomSpec::new(n, p)?;
    if p == 0.0 || p == 1.0 {
        return Err(ProbError::DegenerateProbability(p));
    }
    if n == 0 {
        return Err(ProbError::ZeroTrials);
    }
    if n > BERRY_ESSEEN_LIMIT {
        return Err(ProbError::GuardExceeded { total: n, limit: BERRY_ESSEEN_LIMIT });
    }
    let pmf = Pmf::binomial(BinomSpec { trials: n, prob: p });
    let mean = n as f64 * p;
    let sigma = (mean * (1.0 - p)).sqrt();
    let mut below = 0.0f64;
    let mut carry = 0.0f64;
    let mut gap = 0.0f64;
    for (k, &m) in pmf.masses.iter().enumerate() {
        let target = phi((k as f64 - mean) / sigma);
        let before = below;
        let y = m - carry;
        let t = below + y;
        carry = (t - below) - y;
        below = t.min(1.0);
        gap = gap.max((before - target).abs()).max((below - target).abs());
    }
    debug_assert!((compensated_sum(pmf.masses.iter().copied()) - 1.0).abs() < 1e-12);
    Ok(gap)
}
