//! Majority dynamics on Erdős–Rényi random graphs.
//!
//! Every vertex of a graph holds an opinion in {−1, +1}; each day all vertices
//! simultaneously adopt the sign of the sum of their neighbours' opinions and
//! keep their own on a tie. The crate samples sparse G(n, p) graphs, runs the
//! process to unanimity or a period-two cycle, counts the vertex classes that
//! drive the early days of the process, evaluates the binomial estimates the
//! analysis relies on, and runs seeded Monte Carlo experiments over all of it.

pub mod dynamics;
pub mod graph;
pub mod harness;
pub mod opinions;
pub mod probkit;
pub mod rng;

pub use dynamics::{majority_step, run, OpinionVector, Outcome, Trajectory};
pub use graph::{sample_gnp, Graph};
pub use harness::{run_experiment, ExperimentConfig, ExperimentReport};
pub use opinions::{census, CensusReport, OpinionKind, OpinionModel};
