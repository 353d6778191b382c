//! Synchronous majority dynamics.
//!
//! On each day every vertex takes the sign of the sum of its neighbors'
//! opinions from the previous day and keeps its own opinion when that sum
//! is zero (isolated vertices never change). All vertices update from the
//! same previous state; the step writes into a separate buffer.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;

/// Below this many vertices the step runs on the calling thread.
const PARALLEL_MIN_VERTICES: usize = 1 << 15;
/// Output words per parallel task.
const WORDS_PER_TASK: usize = 256;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DynamicsError {
    #[error("opinion vector has {opinions} entries but the graph has {graph} vertices")]
    SizeMismatch { graph: usize, opinions: usize },
    #[error("vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("day cap must be at least 1")]
    ZeroDayCap,
    #[error("opinion {0} is not +1 or -1")]
    InvalidSign(i64),
}

/// Bit-packed ±1 assignment; bit set means +1. Bits past `n` stay zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OpinionVector {
    n: usize,
    bits: Vec<u64>,
}

impl OpinionVector {
    /// Every vertex holds `positive ? +1 : −1`.
    pub fn constant(n: usize, positive: bool) -> Self {
        let mut s = Self { n, bits: vec![if positive { u64::MAX } else { 0 }; n.div_ceil(64)] };
        s.clear_tail();
        s
    }

    pub fn from_signs(signs: &[i8]) -> Result<Self, DynamicsError> {
        let mut s = Self::constant(signs.len(), false);
        for (v, &x) in signs.iter().enumerate() {
            match x {
                1 => s.set(v, true),
                -1 => {}
                other => return Err(DynamicsError::InvalidSign(other as i64)),
            }
        }
        Ok(s)
    }

    /// Builds from raw words; bits beyond `n` are discarded.
    pub fn from_words(n: usize, mut words: Vec<u64>) -> Self {
        words.resize(n.div_ceil(64), 0);
        let mut s = Self { n, bits: words };
        s.clear_tail();
        s
    }

    fn clear_tail(&mut self) {
        let rem = self.n % 64;
        if rem != 0 {
            if let Some(last) = self.bits.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.bits
    }

    #[inline]
    pub fn is_positive(&self, v: usize) -> bool {
        self.bits[v >> 6] >> (v & 63) & 1 == 1
    }

    /// Opinion of `v` as ±1.
    #[inline]
    pub fn get(&self, v: usize) -> i8 {
        if self.is_positive(v) {
            1
        } else {
            -1
        }
    }

    #[inline]
    pub fn set(&mut self, v: usize, positive: bool) {
        let mask = 1u64 << (v & 63);
        if positive {
            self.bits[v >> 6] |= mask;
        } else {
            self.bits[v >> 6] &= !mask;
        }
    }

    pub fn positives(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn negatives(&self) -> usize {
        self.n - self.positives()
    }

    /// Σ_v s(v) = 2·positives − n.
    pub fn bias(&self) -> i64 {
        2 * self.positives() as i64 - self.n as i64
    }

    /// Number of coordinates where the two vectors differ.
    pub fn hamming(&self, other: &Self) -> usize {
        self.bits.iter().zip(&other.bits).map(|(a, b)| (a ^ b).count_ones() as usize).sum()
    }

    pub fn negated(&self) -> Self {
        Self::from_words(self.n, self.bits.iter().map(|w| !w).collect())
    }

    /// `Some(sign)` when every vertex agrees.
    pub fn unanimous_sign(&self) -> Option<i8> {
        match self.positives() {
            p if p == self.n => Some(1),
            0 => Some(-1),
            _ => None,
        }
    }

    pub fn to_signs(&self) -> Vec<i8> {
        (0..self.n).map(|v| self.get(v)).collect()
    }

    /// Coordinatewise `self ≤ other` as ±1 vectors.
    pub fn le(&self, other: &Self) -> bool {
        self.n == other.n && self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }
}

/// Σ_v s(v).
pub fn bias(s: &OpinionVector) -> i64 {
    s.bias()
}

/// Σ_{u∼v} s(u).
pub fn neighbor_sum(g: &Graph, s: &OpinionVector, v: usize) -> Result<i64, DynamicsError> {
    check_sizes(g, s)?;
    if v >= g.n() {
        return Err(DynamicsError::VertexOutOfRange { vertex: v, n: g.n() });
    }
    Ok(signed_sum(s.words(), g.neighbors(v)))
}

#[inline]
fn positive_neighbors(bits: &[u64], nbrs: &[u32]) -> u32 {
    // Gather up to 64 neighbor bits into one word, then popcount.
    let mut count = 0;
    for block in nbrs.chunks(64) {
        let mut word = 0u64;
        for (j, &u) in block.iter().enumerate() {
            word |= (bits[(u >> 6) as usize] >> (u & 63) & 1) << j;
        }
        count += word.count_ones();
    }
    count
}

#[inline]
pub(crate) fn signed_sum(bits: &[u64], nbrs: &[u32]) -> i64 {
    2 * positive_neighbors(bits, nbrs) as i64 - nbrs.len() as i64
}

fn check_sizes(g: &Graph, s: &OpinionVector) -> Result<(), DynamicsError> {
    if g.n() != s.len() {
        return Err(DynamicsError::SizeMismatch { graph: g.n(), opinions: s.len() });
    }
    Ok(())
}

/// One synchronous day of majority dynamics.
pub fn majority_step(g: &Graph, s: &OpinionVector) -> Result<OpinionVector, DynamicsError> {
    let mut out = OpinionVector::constant(s.len(), false);
    majority_step_into(g, s, &mut out)?;
    Ok(out)
}

/// Like [`majority_step`] but reuses `out`'s storage.
pub fn majority_step_into(g: &Graph, s: &OpinionVector, out: &mut OpinionVector) -> Result<(), DynamicsError> {
    check_sizes(g, s)?;
    let n = s.len();
    if out.n != n {
        *out = OpinionVector::constant(n, false);
    }
    let src = s.words();
    let fill = |first_word: usize, words: &mut [u64]| {
        for (k, slot) in words.iter_mut().enumerate() {
            let base = (first_word + k) * 64;
            let end = (base + 64).min(n);
            let mut word = 0u64;
            for v in base..end {
                let nbrs = g.neighbors(v);
                let pos = positive_neighbors(src, nbrs) as usize;
                let keep_old = 2 * pos == nbrs.len();
                let positive = if keep_old { src[v >> 6] >> (v & 63) & 1 == 1 } else { 2 * pos > nbrs.len() };
                word |= (positive as u64) << (v - base);
            }
            *slot = word;
        }
    };
    if n >= PARALLEL_MIN_VERTICES {
        out.bits
            .par_chunks_mut(WORDS_PER_TASK)
            .enumerate()
            .for_each(|(i, chunk)| fill(i * WORDS_PER_TASK, chunk));
    } else {
        fill(0, &mut out.bits);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayRecord {
    pub day: u32,
    pub bias: i64,
    pub flips: u64,
    pub positives: u64,
}

/// How a run terminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    /// All vertices agree from `day` on; noticed on day `detected`.
    Unanimous { sign: i8, day: u32, detected: u32 },
    /// The state repeats with `period` 1 (a non-unanimous fixed point) or 2
    /// from `day` on; noticed on day `detected`.
    PeriodTwo { period: u8, day: u32, detected: u32 },
    DayCapReached,
}

impl Outcome {
    pub fn is_unanimous(&self) -> bool {
        matches!(self, Outcome::Unanimous { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub n: usize,
    /// Day 0 is the initial state.
    pub days: Vec<DayRecord>,
    pub outcome: Outcome,
    pub day_cap: u32,
}

impl Trajectory {
    pub fn biases(&self) -> Vec<i64> {
        self.days.iter().map(|d| d.bias).collect()
    }

    /// Bias on day `t`, continuing past the last simulated day along the
    /// detected cycle. `None` beyond a capped run.
    pub fn bias_at(&self, t: u32) -> Option<i64> {
        extrapolate_bias(&self.biases(), &self.outcome, t)
    }

    pub fn unanimity_day(&self) -> Option<u32> {
        match self.outcome {
            Outcome::Unanimous { day, .. } => Some(day),
            _ => None,
        }
    }
}

/// Bias on day `t` from recorded biases and the run's outcome.
pub fn extrapolate_bias(biases: &[i64], outcome: &Outcome, t: u32) -> Option<i64> {
    if let Some(&b) = biases.get(t as usize) {
        return Some(b);
    }
    match *outcome {
        Outcome::Unanimous { day, .. } => biases.get(day as usize).copied(),
        Outcome::PeriodTwo { period, day, .. } => {
            let offset = (t - day) % period as u32;
            biases.get((day + offset) as usize).copied()
        }
        Outcome::DayCapReached => None,
    }
}

/// Iterates [`majority_step`] from `s0` until unanimity, a cycle of length
/// at most two, or `day_cap` days.
pub fn run(g: &Graph, s0: &OpinionVector, day_cap: u32) -> Result<Trajectory, DynamicsError> {
    check_sizes(g, s0)?;
    if day_cap == 0 {
        return Err(DynamicsError::ZeroDayCap);
    }
    let n = s0.len();
    let record = |day: u32, s: &OpinionVector, flips: usize| DayRecord {
        day,
        bias: s.bias(),
        flips: flips as u64,
        positives: s.positives() as u64,
    };
    let mut days = vec![record(0, s0, 0)];
    let mut older = OpinionVector::constant(n, false);
    let mut prev = s0.clone();
    let mut cur = OpinionVector::constant(n, false);
    let mut outcome = Outcome::DayCapReached;
    for day in 1..=day_cap {
        majority_step_into(g, &prev, &mut cur)?;
        let flips = cur.hamming(&prev);
        days.push(record(day, &cur, flips));
        if flips == 0 {
            outcome = match cur.unanimous_sign() {
                Some(sign) => Outcome::Unanimous { sign, day: day - 1, detected: day },
                None => Outcome::PeriodTwo { period: 1, day: day - 1, detected: day },
            };
            break;
        }
        if day >= 2 && cur == older {
            outcome = Outcome::PeriodTwo { period: 2, day: day - 2, detected: day };
            break;
        }
        std::mem::swap(&mut older, &mut prev);
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(Trajectory { n, days, outcome, day_cap })
}
