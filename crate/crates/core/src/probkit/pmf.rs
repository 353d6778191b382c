use serde::{Deserialize, Serialize};

use super::{compensated_sum, guard, BinomSpec, ProbError};

/// Finitely supported integer distribution: P[X = support_offset + i] = masses[i].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    pub support_offset: i64,
    pub masses: Vec<f64>,
}

impl Pmf {
    pub fn point(at: i64) -> Self {
        Self { support_offset: at, masses: vec![1.0] }
    }

    /// Exact Bin(n, p) masses.
    ///
    /// Masses are built outward from the mode by the ratio
    /// P[k+1]/P[k] = (n−k)p / ((k+1)(1−p)), then normalized. Every factor is
    /// at most one on the way out, so nothing overflows and tail masses
    /// underflow gracefully to zero.
    pub fn binomial(spec: BinomSpec) -> Self {
        let n = spec.trials as usize;
        let p = spec.prob;
        if p == 0.0 {
            return Self::point(0);
        }
        if p == 1.0 {
            return Self::point(n as i64);
        }
        let q = 1.0 - p;
        let mode = (((n as f64 + 1.0) * p).floor() as usize).min(n);
        let mut w = vec![0.0; n + 1];
        w[mode] = 1.0;
        for k in mode + 1..=n {
            w[k] = w[k - 1] * ((n - k + 1) as f64 * p) / (k as f64 * q);
        }
        for k in (0..mode).rev() {
            w[k] = w[k + 1] * ((k + 1) as f64 * q) / ((n - k) as f64 * p);
        }
        let total = compensated_sum(w.iter().copied());
        w.iter_mut().for_each(|x| *x /= total);
        Self { support_offset: 0, masses: w }
    }

    pub fn min(&self) -> i64 {
        self.support_offset
    }

    pub fn max(&self) -> i64 {
        self.support_offset + self.masses.len() as i64 - 1
    }

    pub fn mass(&self, k: i64) -> f64 {
        let i = k - self.support_offset;
        if i < 0 {
            return 0.0;
        }
        self.masses.get(i as usize).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        compensated_sum(self.masses.iter().copied())
    }

    /// P[X ≥ l].
    pub fn tail_ge(&self, l: i64) -> f64 {
        let start = (l - self.support_offset).clamp(0, self.masses.len() as i64) as usize;
        compensated_sum(self.masses[start..].iter().copied())
    }

    /// P[X ≤ k].
    pub fn cdf(&self, k: i64) -> f64 {
        let end = (k - self.support_offset + 1).clamp(0, self.masses.len() as i64) as usize;
        compensated_sum(self.masses[..end].iter().copied())
    }

    pub fn max_mass(&self) -> f64 {
        self.masses.iter().copied().fold(0.0, f64::max)
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(self.masses.iter().enumerate().map(|(i, m)| (self.support_offset + i as i64) as f64 * m))
    }

    /// Distribution of −X.
    pub fn negated(&self) -> Self {
        Self { support_offset: -self.max(), masses: self.masses.iter().rev().copied().collect() }
    }

    /// Distribution of X + Y for independent X ~ self, Y ~ other.
    pub fn add(&self, other: &Self) -> Self {
        let mut out = vec![0.0; self.masses.len() + other.masses.len() - 1];
        for (i, &a) in self.masses.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.masses.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self { support_offset: self.support_offset + other.support_offset, masses: out }
    }

    /// Distribution of X − Y for independent X ~ self, Y ~ other.
    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.negated())
    }
}

/// Exact distribution of X − Y with X ~ a, Y ~ b independent; support
/// [−b.trials, a.trials].
pub fn binom_diff_pmf(a: BinomSpec, b: BinomSpec) -> Result<Pmf, ProbError> {
    guard(&[a, b])?;
    let x = Pmf::binomial(a);
    let y = Pmf::binomial(b);
    let mut d = x.sub(&y);
    // Degenerate p puts all mass on one point; widen to the full support so
    // the layout is uniform across inputs.
    let lo = -(b.trials as i64);
    let hi = a.trials as i64;
    if d.min() != lo || d.max() != hi {
        let mut masses = vec![0.0; (hi - lo + 1) as usize];
        for k in d.min()..=d.max() {
            masses[(k - lo) as usize] = d.mass(k);
        }
        d = Pmf { support_offset: lo, masses };
    }
    Ok(d)
}
