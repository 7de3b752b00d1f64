//! Graph representations of CNF formulas.
//!
//! The central structure is [`Lcg`], the bipartite literal-clause graph that
//! is in bijection with CNF formulas: one node per literal (both polarities
//! of every declared variable) and one node per clause, with an edge for each
//! occurrence of a literal in a clause. The generative process mutates an
//! `Lcg` through [`Lcg::node_split`] and [`Lcg::node_merge`], which move a
//! clause node's incident edges to/from a partner clause node while
//! preserving bipartiteness, simplicity, and the literal degree vector.
//!
//! [`SimpleGraph`] is the plain undirected view used by the statistics
//! module, with conversions for the variable-incidence (VIG) and
//! variable-clause (VCG) graphs.

use thiserror::Error;

use crate::cnf::{Clause, CnfFormula, Literal};

/// A literal node. Variable `i` (1-based) maps to `2*(i-1)` for the positive
/// literal and `2*(i-1)+1` for the negative one, so a literal's complement is
/// always `id ^ 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct LitNodeId(pub u32);

impl LitNodeId {
    pub fn from_literal(lit: Literal) -> Self {
        let base = 2 * (lit.var() - 1);
        LitNodeId(if lit.is_positive() { base } else { base + 1 })
    }

    pub fn to_literal(self) -> Literal {
        Literal::new(self.0 / 2 + 1, self.0 % 2 == 0)
    }

    /// The other polarity of the same variable.
    pub fn complement(self) -> Self {
        LitNodeId(self.0 ^ 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn var(self) -> u32 {
        self.0 / 2 + 1
    }
}

/// A clause node. Ids are allocated monotonically and never reused within a
/// graph's lifetime, so references held by training snapshots stay valid.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct ClauseNodeId(pub u32);

/// Kind tag for the three node types of an LCG.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum NodeKind {
    PosLiteral,
    NegLiteral,
    ClauseNode,
}

/// Any node of an LCG.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum NodeId {
    Literal(LitNodeId),
    Clause(ClauseNodeId),
}

impl NodeId {
    pub fn kind(&self) -> NodeKind {
        match self {
            NodeId::Literal(l) if l.is_positive() => NodeKind::PosLiteral,
            NodeId::Literal(_) => NodeKind::NegLiteral,
            NodeId::Clause(_) => NodeKind::ClauseNode,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("clause node {0:?} does not exist")]
    NoSuchClause(ClauseNodeId),
    #[error("cannot split clause node {0:?} of degree {1}")]
    SplitDegreeTooLow(ClauseNodeId, usize),
    #[error("moved edge set must be a nonempty proper subset of the node's edges")]
    BadMovedEdgeSet,
    #[error("edge to literal {0:?} is not incident to the split node")]
    NotAnIncidentEdge(LitNodeId),
    #[error("cannot merge a clause node with itself")]
    MergeSelf,
    #[error("merge of {u:?} and {v:?} would create a parallel edge on literal {lit:?}")]
    MergeParallelEdge {
        u: ClauseNodeId,
        v: ClauseNodeId,
        lit: LitNodeId,
    },
    #[error("merge of {u:?} and {v:?} would create a vacuous clause on variable {var}")]
    MergeVacuous {
        u: ClauseNodeId,
        v: ClauseNodeId,
        var: u32,
    },
    #[error("clause node {0:?} has degree 0")]
    EmptyClauseNode(ClauseNodeId),
}

/// Mutable bipartite literal-clause graph.
///
/// Adjacency is stored in both directions (literal -> clauses and clause ->
/// literals) as sorted vectors, giving O(deg) splits/merges and
/// O(deg * log deg) admissibility checks.
#[derive(Clone, Debug)]
pub struct Lcg {
    num_vars: u32,
    /// Indexed by literal node id; sorted clause ids.
    lit_adj: Vec<Vec<ClauseNodeId>>,
    /// Indexed by clause node id; `None` marks retired or unallocated ids.
    clause_adj: Vec<Option<Vec<LitNodeId>>>,
    /// Dense list of live clause ids, for uniform sampling.
    live_clauses: Vec<ClauseNodeId>,
    /// Position of each clause id in `live_clauses` (`usize::MAX` = dead).
    clause_pos: Vec<usize>,
    num_edges: usize,
}

impl Lcg {
    /// An LCG with the literal partition for `num_vars` variables and no
    /// clause nodes.
    pub fn empty(num_vars: u32) -> Self {
        Lcg {
            num_vars,
            lit_adj: vec![Vec::new(); 2 * num_vars as usize],
            clause_adj: Vec::new(),
            live_clauses: Vec::new(),
            clause_pos: Vec::new(),
            num_edges: 0,
        }
    }

    /// Builds the LCG of a formula. Clause node ids follow clause order.
    pub fn of_formula(formula: &CnfFormula) -> Self {
        let mut g = Lcg::empty(formula.num_vars());
        for clause in formula.clauses() {
            let lits: Vec<LitNodeId> = clause
                .literals()
                .iter()
                .map(|&l| LitNodeId::from_literal(l))
                .collect();
            g.add_clause_node(&lits);
        }
        g
    }

    /// Adds a fresh clause node adjacent to the given distinct,
    /// non-complementary literals.
    pub fn add_clause_node(&mut self, lits: &[LitNodeId]) -> ClauseNodeId {
        let id = ClauseNodeId(self.clause_adj.len() as u32);
        let mut sorted = lits.to_vec();
        sorted.sort_unstable();
        debug_assert!(sorted.windows(2).all(|w| w[0] != w[1]), "parallel edge");
        debug_assert!(
            !sorted
                .iter()
                .any(|l| sorted.binary_search(&l.complement()).is_ok()),
            "vacuous clause node"
        );
        for &lit in &sorted {
            let list = &mut self.lit_adj[lit.0 as usize];
            let pos = list.partition_point(|&c| c < id);
            list.insert(pos, id);
        }
        self.num_edges += sorted.len();
        self.clause_pos.push(self.live_clauses.len());
        self.live_clauses.push(id);
        self.clause_adj.push(Some(sorted));
        id
    }

    /// Recovers the formula. Clauses are emitted in clause-node id order, so
    /// a graph fresh from [`Lcg::of_formula`] reproduces clause order.
    pub fn to_formula(&self) -> Result<CnfFormula, GraphError> {
        let mut clauses = Vec::with_capacity(self.live_clauses.len());
        let mut ids: Vec<ClauseNodeId> = self.live_clauses.clone();
        ids.sort_unstable();
        for id in ids {
            let lits = self.clause_lits(id)?;
            if lits.is_empty() {
                return Err(GraphError::EmptyClauseNode(id));
            }
            let literals: Vec<Literal> = lits.iter().map(|l| l.to_literal()).collect();
            let clause = Clause::new(literals).expect("LCG invariants imply clause invariants");
            clauses.push(clause);
        }
        Ok(CnfFormula::new(self.num_vars, clauses).expect("literals in range by construction"))
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn num_literal_nodes(&self) -> usize {
        2 * self.num_vars as usize
    }

    pub fn num_clause_nodes(&self) -> usize {
        self.live_clauses.len()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    /// Live clause node ids in sampling order (arbitrary but deterministic).
    pub fn live_clauses(&self) -> &[ClauseNodeId] {
        &self.live_clauses
    }

    /// Upper bound over all clause ids ever allocated.
    pub fn clause_id_bound(&self) -> u32 {
        self.clause_adj.len() as u32
    }

    pub fn is_live(&self, c: ClauseNodeId) -> bool {
        (c.0 as usize) < self.clause_adj.len() && self.clause_adj[c.0 as usize].is_some()
    }

    /// Sorted literal neighbors of a clause node.
    pub fn clause_lits(&self, c: ClauseNodeId) -> Result<&[LitNodeId], GraphError> {
        self.clause_adj
            .get(c.0 as usize)
            .and_then(|v| v.as_deref())
            .ok_or(GraphError::NoSuchClause(c))
    }

    /// Sorted clause neighbors of a literal node.
    pub fn lit_clauses(&self, l: LitNodeId) -> &[ClauseNodeId] {
        &self.lit_adj[l.0 as usize]
    }

    pub fn clause_degree(&self, c: ClauseNodeId) -> Result<usize, GraphError> {
        Ok(self.clause_lits(c)?.len())
    }

    pub fn lit_degree(&self, l: LitNodeId) -> usize {
        self.lit_adj[l.0 as usize].len()
    }

    pub fn has_edge(&self, c: ClauseNodeId, l: LitNodeId) -> bool {
        self.clause_adj
            .get(c.0 as usize)
            .and_then(|v| v.as_ref())
            .is_some_and(|lits| lits.binary_search(&l).is_ok())
    }

    fn lit_adj_remove(&mut self, l: LitNodeId, c: ClauseNodeId) {
        let list = &mut self.lit_adj[l.0 as usize];
        let pos = list.binary_search(&c).expect("edge must exist");
        list.remove(pos);
    }

    fn lit_adj_insert(&mut self, l: LitNodeId, c: ClauseNodeId) {
        let list = &mut self.lit_adj[l.0 as usize];
        let pos = list.partition_point(|&x| x < c);
        list.insert(pos, c);
    }

    /// Splits clause node `s`: the edges to `moved` literals are transferred
    /// to a fresh clause node `v`; `s` keeps the rest. Returns `(u, v)` where
    /// `u = s`. `moved` must be a nonempty proper subset of `s`'s edges.
    pub fn node_split(
        &mut self,
        s: ClauseNodeId,
        moved: &[LitNodeId],
    ) -> Result<(ClauseNodeId, ClauseNodeId), GraphError> {
        let lits = self.clause_lits(s)?;
        let degree = lits.len();
        if degree < 2 {
            return Err(GraphError::SplitDegreeTooLow(s, degree));
        }
        if moved.is_empty() || moved.len() >= degree {
            return Err(GraphError::BadMovedEdgeSet);
        }
        let mut moved_sorted = moved.to_vec();
        moved_sorted.sort_unstable();
        moved_sorted.dedup();
        if moved_sorted.len() != moved.len() {
            return Err(GraphError::BadMovedEdgeSet);
        }
        for &m in &moved_sorted {
            if lits.binary_search(&m).is_err() {
                return Err(GraphError::NotAnIncidentEdge(m));
            }
        }

        let v = ClauseNodeId(self.clause_adj.len() as u32);
        let kept: Vec<LitNodeId> = self.clause_adj[s.0 as usize]
            .as_ref()
            .unwrap()
            .iter()
            .copied()
            .filter(|l| moved_sorted.binary_search(l).is_err())
            .collect();
        self.clause_adj[s.0 as usize] = Some(kept);
        for &m in &moved_sorted {
            self.lit_adj_remove(m, s);
            self.lit_adj_insert(m, v);
        }
        self.clause_pos.push(self.live_clauses.len());
        self.live_clauses.push(v);
        self.clause_adj.push(Some(moved_sorted));
        debug_assert!(self.check_invariants().is_ok());
        Ok((s, v))
    }

    /// True if merging `u` and `v` neither creates a parallel edge (shared
    /// literal) nor a vacuous clause (complementary literals).
    pub fn merge_admissible(&self, u: ClauseNodeId, v: ClauseNodeId) -> bool {
        self.check_merge(u, v).is_ok()
    }

    fn check_merge(&self, u: ClauseNodeId, v: ClauseNodeId) -> Result<(), GraphError> {
        if u == v {
            return Err(GraphError::MergeSelf);
        }
        let u_lits = self.clause_lits(u)?;
        let v_lits = self.clause_lits(v)?;
        // Scan the smaller side, binary-search the larger.
        let (scan, probe) = if u_lits.len() <= v_lits.len() {
            (u_lits, v_lits)
        } else {
            (v_lits, u_lits)
        };
        for &x in scan {
            if probe.binary_search(&x).is_ok() {
                return Err(GraphError::MergeParallelEdge { u, v, lit: x });
            }
            if probe.binary_search(&x.complement()).is_ok() {
                return Err(GraphError::MergeVacuous { u, v, var: x.var() });
            }
        }
        Ok(())
    }

    /// Merges clause node `v` into `u`: all of `v`'s edges move to `u` and
    /// `v` is retired. Errors if the pair is inadmissible.
    pub fn node_merge(&mut self, u: ClauseNodeId, v: ClauseNodeId) -> Result<ClauseNodeId, GraphError> {
        self.check_merge(u, v)?;
        self.node_merge_unchecked(u, v);
        debug_assert!(self.check_invariants().is_ok());
        Ok(u)
    }

    /// Merge without the admissibility check, for replaying sequences known
    /// to be admissible (the inverse of a recorded split always is).
    pub(crate) fn node_merge_unchecked(&mut self, u: ClauseNodeId, v: ClauseNodeId) {
        debug_assert!(self.check_merge(u, v).is_ok());
        let v_lits = self.clause_adj[v.0 as usize].take().expect("live clause");
        for &x in &v_lits {
            self.lit_adj_remove(x, v);
            self.lit_adj_insert(x, u);
        }
        let u_lits = self.clause_adj[u.0 as usize].as_mut().expect("live clause");
        let mut merged = Vec::with_capacity(u_lits.len() + v_lits.len());
        let (mut a, mut b) = (u_lits.iter().copied().peekable(), v_lits.iter().copied().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&x), Some(&y)) => {
                    if x < y {
                        merged.push(x);
                        a.next();
                    } else {
                        merged.push(y);
                        b.next();
                    }
                }
                (Some(_), None) => {
                    merged.extend(a);
                    break;
                }
                (None, Some(_)) => {
                    merged.extend(b);
                    break;
                }
                (None, None) => break,
            }
        }
        *u_lits = merged;
        // Swap-remove v from the live list.
        let pos = self.clause_pos[v.0 as usize];
        let last = *self.live_clauses.last().unwrap();
        self.live_clauses.swap_remove(pos);
        if last != v {
            self.clause_pos[last.0 as usize] = pos;
        }
        self.clause_pos[v.0 as usize] = usize::MAX;
    }

    /// Verifies all structural invariants. Used by debug assertions and tests.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut edges = 0;
        for &c in &self.live_clauses {
            let lits = self
                .clause_lits(c)
                .map_err(|e| format!("live clause missing: {e}"))?;
            if lits.is_empty() {
                return Err(format!("clause node {c:?} has degree 0"));
            }
            if lits.windows(2).any(|w| w[0] >= w[1]) {
                return Err(format!("clause node {c:?} adjacency not sorted/unique"));
            }
            for l in lits {
                if l.0 as usize >= self.lit_adj.len() {
                    return Err(format!("literal {l:?} out of range"));
                }
                if lits.binary_search(&l.complement()).is_ok() {
                    return Err(format!("vacuous clause node {c:?} on variable {}", l.var()));
                }
                if self.lit_adj[l.0 as usize].binary_search(&c).is_err() {
                    return Err(format!("edge ({c:?},{l:?}) missing reverse direction"));
                }
            }
            edges += lits.len();
        }
        if edges != self.num_edges {
            return Err(format!("edge count {edges} != recorded {}", self.num_edges));
        }
        for (i, list) in self.lit_adj.iter().enumerate() {
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(format!("literal {i} adjacency not sorted/unique"));
            }
            for c in list {
                let lits = self
                    .clause_lits(*c)
                    .map_err(|_| format!("literal {i} points at dead clause {c:?}"))?;
                if lits.binary_search(&LitNodeId(i as u32)).is_err() {
                    return Err(format!("edge ({c:?},lit {i}) missing forward direction"));
                }
            }
        }
        Ok(())
    }

    /// Degree of every literal node, indexed by literal node id.
    pub fn literal_degree_vector(&self) -> Vec<usize> {
        self.lit_adj.iter().map(Vec::len).collect()
    }
}

/// Plain undirected simple graph for the statistics module.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleGraph {
    num_nodes: usize,
    edges: Vec<(u32, u32)>,
}

impl SimpleGraph {
    /// Builds a simple graph, deduplicating edges and dropping self-loops.
    pub fn new(num_nodes: usize, mut edges: Vec<(u32, u32)>) -> Self {
        for e in &mut edges {
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
        }
        edges.retain(|e| e.0 != e.1);
        edges.sort_unstable();
        edges.dedup();
        for &(a, b) in &edges {
            assert!((b as usize) < num_nodes, "edge ({a},{b}) out of range");
        }
        SimpleGraph { num_nodes, edges }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Adjacency list view.
    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.num_nodes];
        for &(a, b) in &self.edges {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_nodes];
        for &(a, b) in &self.edges {
            deg[a as usize] += 1;
            deg[b as usize] += 1;
        }
        deg
    }
}

/// Variable-incidence graph: one node per variable; an edge joins two
/// variables iff they co-occur in some clause. All declared variables are
/// kept as nodes, including unused ones (degree 0).
pub fn vig_of(g: &Lcg) -> SimpleGraph {
    let mut edges = Vec::new();
    for &c in g.live_clauses() {
        let lits = g.clause_lits(c).expect("live clause");
        let mut vars: Vec<u32> = lits.iter().map(|l| l.var() - 1).collect();
        vars.sort_unstable();
        vars.dedup();
        for i in 0..vars.len() {
            for j in i + 1..vars.len() {
                edges.push((vars[i], vars[j]));
            }
        }
    }
    SimpleGraph::new(g.num_vars() as usize, edges)
}

/// Variable-clause graph: bipartite on variables (0..num_vars) and clauses
/// (num_vars..), with an edge when either polarity of the variable occurs in
/// the clause. Non-vacuity of clauses guarantees multiplicity one.
pub fn vcg_of(g: &Lcg) -> SimpleGraph {
    let nv = g.num_vars() as usize;
    let mut edges = Vec::new();
    for (ci, &c) in g.live_clauses().iter().enumerate() {
        let lits = g.clause_lits(c).expect("live clause");
        for l in lits {
            edges.push((l.var() - 1, (nv + ci) as u32));
        }
    }
    SimpleGraph::new(nv + g.num_clause_nodes(), edges)
}

/// Per-variable VCG degrees (occurrence counts over both polarities).
pub fn vcg_variable_degrees(g: &Lcg) -> Vec<usize> {
    let mut deg = vec![0usize; g.num_vars() as usize];
    for &c in g.live_clauses() {
        for l in g.clause_lits(c).expect("live clause") {
            deg[(l.var() - 1) as usize] += 1;
        }
    }
    deg
}

/// Per-clause VCG degrees (clause lengths).
pub fn vcg_clause_degrees(g: &Lcg) -> Vec<usize> {
    g.live_clauses()
        .iter()
        .map(|&c| g.clause_lits(c).expect("live clause").len())
        .collect()
}

/// The LCG itself as a plain undirected graph: literal nodes first
/// (0..2*num_vars), then live clause nodes in id order.
pub fn lcg_as_simple(g: &Lcg) -> SimpleGraph {
    let nl = g.num_literal_nodes();
    let mut ids: Vec<ClauseNodeId> = g.live_clauses().to_vec();
    ids.sort_unstable();
    let mut edges = Vec::with_capacity(g.num_edges());
    for (ci, &c) in ids.iter().enumerate() {
        for l in g.clause_lits(c).expect("live clause") {
            edges.push((l.0, (nl + ci) as u32));
        }
    }
    SimpleGraph::new(nl + ids.len(), edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand::rngs::StdRng;
    use std::collections::HashSet;

    fn example_formula() -> CnfFormula {
        cnf::parse_dimacs(b"p cnf 3 2\n1 2 -3 0\n-1 -2 0").unwrap().formula
    }

    fn lit(v: i64) -> LitNodeId {
        LitNodeId::from_literal(Literal::from_dimacs(v).unwrap())
    }

    #[test]
    fn literal_node_id_mapping() {
        assert_eq!(lit(1), LitNodeId(0));
        assert_eq!(lit(-1), LitNodeId(1));
        assert_eq!(lit(3), LitNodeId(4));
        assert_eq!(lit(1).complement(), lit(-1));
        assert_eq!(lit(-2).to_literal().to_dimacs(), -2);
        assert_eq!(NodeId::Literal(lit(1)).kind(), NodeKind::PosLiteral);
        assert_eq!(NodeId::Literal(lit(-1)).kind(), NodeKind::NegLiteral);
        assert_eq!(NodeId::Clause(ClauseNodeId(0)).kind(), NodeKind::ClauseNode);
    }

    #[test]
    fn lcg_of_example_formula() {
        let g = Lcg::of_formula(&example_formula());
        assert_eq!(g.num_literal_nodes(), 6);
        assert_eq!(g.num_clause_nodes(), 2);
        assert_eq!(g.num_edges(), 5);
        assert!(g.check_invariants().is_ok());
    }

    #[test]
    fn lcg_of_unit_clause() {
        let f = cnf::parse_dimacs(b"p cnf 1 1\n1 0").unwrap().formula;
        let g = Lcg::of_formula(&f);
        assert_eq!(g.num_literal_nodes(), 2);
        assert_eq!(g.num_clause_nodes(), 1);
        assert_eq!(g.num_edges(), 1);
    }

    #[test]
    fn formula_round_trips_through_lcg() {
        let f = example_formula();
        let g = Lcg::of_formula(&f);
        let back = g.to_formula().unwrap();
        assert!(back.equivalent_up_to_order(&f));
    }

    #[test]
    fn single_clause_node_to_formula() {
        let mut g = Lcg::empty(1);
        g.add_clause_node(&[lit(1)]);
        let f = g.to_formula().unwrap();
        assert_eq!(cnf::write_dimacs(&f), b"p cnf 1 1\n1 0\n");
    }

    #[test]
    fn split_moves_selected_edges() {
        // Clause {x1, x2, !x3}: move the !x3 edge to the new node.
        let f = example_formula();
        let mut g = Lcg::of_formula(&f);
        let (u, v) = g.node_split(ClauseNodeId(0), &[lit(-3)]).unwrap();
        assert_eq!(u, ClauseNodeId(0));
        assert_eq!(g.clause_lits(u).unwrap(), &[lit(1), lit(2)]);
        assert_eq!(g.clause_lits(v).unwrap(), &[lit(-3)]);
        assert_eq!(g.num_edges(), 5);
        assert_eq!(g.num_clause_nodes(), 3);
    }

    #[test]
    fn split_smallest_case() {
        let f = cnf::parse_dimacs(b"p cnf 2 1\n1 2 0").unwrap().formula;
        let mut g = Lcg::of_formula(&f);
        let (u, v) = g.node_split(ClauseNodeId(0), &[lit(2)]).unwrap();
        assert_eq!(g.clause_degree(u).unwrap(), 1);
        assert_eq!(g.clause_degree(v).unwrap(), 1);
    }

    #[test]
    fn split_rejects_bad_inputs() {
        let f = cnf::parse_dimacs(b"p cnf 2 2\n1 2 0\n1 0").unwrap().formula;
        let mut g = Lcg::of_formula(&f);
        assert_eq!(
            g.node_split(ClauseNodeId(1), &[lit(1)]).unwrap_err(),
            GraphError::SplitDegreeTooLow(ClauseNodeId(1), 1)
        );
        assert_eq!(
            g.node_split(ClauseNodeId(0), &[]).unwrap_err(),
            GraphError::BadMovedEdgeSet
        );
        assert_eq!(
            g.node_split(ClauseNodeId(0), &[lit(1), lit(2)]).unwrap_err(),
            GraphError::BadMovedEdgeSet
        );
        assert_eq!(
            g.node_split(ClauseNodeId(0), &[lit(-1)]).unwrap_err(),
            GraphError::NotAnIncidentEdge(lit(-1))
        );
    }

    #[test]
    fn merge_disjoint_neighborhoods() {
        let f = cnf::parse_dimacs(b"p cnf 2 2\n1 0\n2 0").unwrap().formula;
        let mut g = Lcg::of_formula(&f);
        let u = g.node_merge(ClauseNodeId(0), ClauseNodeId(1)).unwrap();
        assert_eq!(g.clause_lits(u).unwrap(), &[lit(1), lit(2)]);
        assert_eq!(g.num_clause_nodes(), 1);
        assert_eq!(g.num_edges(), 2);
    }

    #[test]
    fn merge_rejects_vacuous_pair() {
        let f = cnf::parse_dimacs(b"p cnf 2 2\n1 2 0\n-1 0").unwrap().formula;
        let mut g = Lcg::of_formula(&f);
        assert_eq!(
            g.node_merge(ClauseNodeId(0), ClauseNodeId(1)).unwrap_err(),
            GraphError::MergeVacuous {
                u: ClauseNodeId(0),
                v: ClauseNodeId(1),
                var: 1
            }
        );
    }

    #[test]
    fn merge_rejects_parallel_edge() {
        let f = cnf::parse_dimacs(b"p cnf 1 2\n1 0\n1 0").unwrap().formula;
        let mut g = Lcg::of_formula(&f);
        assert_eq!(
            g.node_merge(ClauseNodeId(0), ClauseNodeId(1)).unwrap_err(),
            GraphError::MergeParallelEdge {
                u: ClauseNodeId(0),
                v: ClauseNodeId(1),
                lit: lit(1)
            }
        );
        assert_eq!(
            g.node_merge(ClauseNodeId(0), ClauseNodeId(0)).unwrap_err(),
            GraphError::MergeSelf
        );
    }

    #[test]
    fn split_then_merge_restores_graph() {
        let f = example_formula();
        let mut g = Lcg::of_formula(&f);
        let before = g.clone();
        let (u, v) = g.node_split(ClauseNodeId(0), &[lit(1), lit(2)]).unwrap();
        g.node_merge(u, v).unwrap();
        assert_eq!(g.to_formula().unwrap(), before.to_formula().unwrap());
        assert_eq!(g.literal_degree_vector(), before.literal_degree_vector());
    }

    #[test]
    fn vig_of_example() {
        let g = Lcg::of_formula(&example_formula());
        let vig = vig_of(&g);
        assert_eq!(vig.num_nodes(), 3);
        assert_eq!(vig.edges(), &[(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn vig_of_unit_clause_has_no_edges() {
        let f = cnf::parse_dimacs(b"p cnf 1 1\n1 0").unwrap().formula;
        assert_eq!(vig_of(&Lcg::of_formula(&f)).num_edges(), 0);
    }

    #[test]
    fn vcg_of_example() {
        let g = Lcg::of_formula(&example_formula());
        let vcg = vcg_of(&g);
        assert_eq!(vcg.num_nodes(), 5);
        assert_eq!(vcg.num_edges(), 5);
    }

    #[test]
    fn lcg_as_simple_counts() {
        let g = Lcg::of_formula(&example_formula());
        let s = lcg_as_simple(&g);
        assert_eq!(s.num_nodes(), 8);
        assert_eq!(s.num_edges(), 5);
    }

    /// Independent brute-force VIG edge oracle over the formula text.
    fn vig_oracle(f: &CnfFormula) -> HashSet<(u32, u32)> {
        let mut set = HashSet::new();
        for clause in f.clauses() {
            let lits = clause.literals();
            for i in 0..lits.len() {
                for j in 0..lits.len() {
                    let (a, b) = (lits[i].var() - 1, lits[j].var() - 1);
                    if a < b {
                        set.insert((a, b));
                    }
                }
            }
        }
        set
    }

    fn random_formula(rng: &mut StdRng, nv: u32, nc: usize, k: usize) -> CnfFormula {
        let mut clauses = Vec::new();
        while clauses.len() < nc {
            let mut vars: Vec<u32> = (1..=nv).collect();
            vars.shuffle(rng);
            let lits: Vec<Literal> = vars[..k]
                .iter()
                .map(|&v| Literal::new(v, rng.random_bool(0.5)))
                .collect();
            clauses.push(Clause::new(lits).unwrap());
        }
        CnfFormula::new(nv, clauses).unwrap()
    }

    #[test]
    fn vig_matches_brute_force_oracle() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..10 {
            let f = random_formula(&mut rng, 20, 50, 3);
            let vig = vig_of(&Lcg::of_formula(&f));
            let got: HashSet<(u32, u32)> = vig.edges().iter().copied().collect();
            assert_eq!(got, vig_oracle(&f));
        }
    }

    #[test]
    fn random_3cnf_round_trip() {
        let mut rng = StdRng::seed_from_u64(11);
        let f = random_formula(&mut rng, 20, 50, 3);
        let back = Lcg::of_formula(&f).to_formula().unwrap();
        assert!(back.equivalent_up_to_order(&f));
    }

    proptest! {
        #[test]
        fn bijection_round_trip(f in crate::cnf::tests::arb_formula(10, 15)) {
            let g = Lcg::of_formula(&f);
            prop_assert!(g.check_invariants().is_ok());
            let back = g.to_formula().unwrap();
            prop_assert!(back.equivalent_up_to_order(&f));
        }

        #[test]
        fn vcg_variable_degree_equals_occurrences(f in crate::cnf::tests::arb_formula(10, 15)) {
            let g = Lcg::of_formula(&f);
            let deg = vcg_variable_degrees(&g);
            for v in 1..=f.num_vars() {
                let occ = f
                    .clauses()
                    .iter()
                    .flat_map(|c| c.literals())
                    .filter(|l| l.var() == v)
                    .count();
                prop_assert_eq!(deg[(v - 1) as usize], occ);
            }
        }

        #[test]
        fn split_preserves_counts_and_merge_inverts(
            f in crate::cnf::tests::arb_formula(8, 10),
            seed in any::<u64>()
        ) {
            let g0 = Lcg::of_formula(&f);
            let mut g = g0.clone();
            let mut rng = StdRng::seed_from_u64(seed);
            let splittable: Vec<ClauseNodeId> = g
                .live_clauses()
                .iter()
                .copied()
                .filter(|&c| g.clause_degree(c).unwrap() > 1)
                .collect();
            prop_assume!(!splittable.is_empty());
            let s = splittable[rng.random_range(0..splittable.len())];
            let lits = g.clause_lits(s).unwrap().to_vec();
            let take = rng.random_range(1..lits.len());
            let moved: Vec<LitNodeId> = lits.choose_multiple(&mut rng, take).copied().collect();

            let lit_degrees = g.literal_degree_vector();
            let edges = g.num_edges();
            let clause_nodes = g.num_clause_nodes();

            let (u, v) = g.node_split(s, &moved).unwrap();
            prop_assert_eq!(g.num_edges(), edges);
            prop_assert_eq!(g.num_clause_nodes(), clause_nodes + 1);
            prop_assert_eq!(g.literal_degree_vector(), lit_degrees);
            prop_assert!(g.clause_degree(u).unwrap() >= 1);
            prop_assert!(g.clause_degree(v).unwrap() >= 1);

            g.node_merge(u, v).unwrap();
            prop_assert_eq!(g.num_clause_nodes(), clause_nodes);
            prop_assert!(g.to_formula().unwrap().equivalent_up_to_order(&f));
        }
    }
}
