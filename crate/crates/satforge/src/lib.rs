//! satforge: a library and CLI that learns to generate synthetic CNF SAT
//! formulas from a corpus of real formulas.
//!
//! Input formulas are turned into bipartite literal-clause graphs, decomposed
//! into forests by node splitting, and a graph-convolutional scorer is trained
//! to recognize which clause-node pairs should be merged back together. New
//! formulas come from replaying learned merges on sampled graph templates.
//! Fidelity is judged with graph statistics (modularity, clustering,
//! scale-free exponents) and a solver-ranking harness.

pub mod bench;
pub mod ca;
pub mod cli;
pub mod cnf;
pub mod generator;
pub mod graph;
pub mod neural;
pub mod stats;
pub mod trainer;
