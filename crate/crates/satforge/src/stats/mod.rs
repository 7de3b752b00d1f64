//! Fidelity metrics for formulas: modularity (via Louvain) on the VIG, VCG
//! and LCG views, average clustering coefficient on the VIG, and scale-free
//! exponents fitted to the VCG degree sequences by maximum likelihood.

mod louvain;
mod powerlaw;

pub use louvain::{louvain, modularity, Partition};
pub use powerlaw::{powerlaw_alpha, powerlaw_alpha_fixed, PowerlawFit, TailModel};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::CnfFormula;
use crate::graph::{lcg_as_simple, vcg_clause_degrees, vcg_of, vcg_variable_degrees, vig_of, Lcg, SimpleGraph};

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("graph has no edges; modularity is undefined")]
    EdgelessGraph,
    #[error("partition must assign every node (got {got}, need {need})")]
    PartialPartition { got: usize, need: usize },
    #[error("need at least {need} samples >= xmin, got {got}")]
    TailTooSmall { need: usize, got: usize },
    #[error("all tail values are identical; exponent is undefined")]
    DegenerateTail,
    #[error("degree sequence is empty after dropping zeros")]
    EmptyDegrees,
}

/// Mean of the local clustering coefficients; nodes of degree < 2 count as 0.
pub fn avg_clustering(g: &SimpleGraph) -> f64 {
    if g.num_nodes() == 0 {
        return 0.0;
    }
    let adj = g.adjacency();
    let mut total = 0.0;
    for v in 0..g.num_nodes() {
        let neigh = &adj[v];
        let d = neigh.len();
        if d < 2 {
            continue;
        }
        let mut tri = 0usize;
        for i in 0..d {
            for j in i + 1..d {
                let (a, b) = (neigh[i] as usize, neigh[j] as usize);
                if adj[a].binary_search(&(b as u32)).is_ok() {
                    tri += 1;
                }
            }
        }
        total += 2.0 * tri as f64 / (d * (d - 1)) as f64;
    }
    total / g.num_nodes() as f64
}

/// The six-metric report of a formula. Metrics that are undefined for the
/// given formula (edgeless view, degenerate degree sequence) are absent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatReport {
    pub clustering_vig: Option<f64>,
    pub modularity_vig: Option<f64>,
    pub modularity_vcg: Option<f64>,
    pub modularity_lcg: Option<f64>,
    pub alpha_v: Option<f64>,
    pub alpha_c: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StatOptions {
    /// Fixed xmin for the power-law fits instead of the KS scan.
    pub xmin_override: Option<u64>,
}

pub fn stat_report(formula: &CnfFormula, seed: u64) -> StatReport {
    stat_report_with(formula, seed, StatOptions::default())
}

pub fn stat_report_with(formula: &CnfFormula, seed: u64, opts: StatOptions) -> StatReport {
    let g = Lcg::of_formula(formula);
    stat_report_of_lcg(&g, seed, opts)
}

pub fn stat_report_of_lcg(g: &Lcg, seed: u64, opts: StatOptions) -> StatReport {
    let vig = vig_of(g);
    let vcg = vcg_of(g);
    let lcg_plain = lcg_as_simple(g);

    let fit = |degrees: Vec<usize>| -> Option<f64> {
        let positive: Vec<u64> = degrees.into_iter().filter(|&d| d > 0).map(|d| d as u64).collect();
        let fit = match opts.xmin_override {
            Some(xmin) => powerlaw_alpha_fixed(&positive, xmin, TailModel::DiscreteHalfShift),
            None => powerlaw_alpha(&positive),
        };
        fit.ok().map(|f| f.alpha)
    };

    StatReport {
        clustering_vig: (vig.num_nodes() > 0).then(|| avg_clustering(&vig)),
        modularity_vig: louvain(&vig, seed).ok().map(|(_, q)| q),
        modularity_vcg: louvain(&vcg, seed).ok().map(|(_, q)| q),
        modularity_lcg: louvain(&lcg_plain, seed).ok().map(|(_, q)| q),
        alpha_v: fit(vcg_variable_degrees(g)),
        alpha_c: fit(vcg_clause_degrees(g)),
    }
}
