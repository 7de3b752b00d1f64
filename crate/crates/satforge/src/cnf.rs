//! CNF formula data model and DIMACS parsing/serialization.
//!
//! The `CnfFormula` here is the canonical external object of the whole
//! pipeline: every generator emits one and every statistic starts from one.
//! Invariants are enforced at construction time so that no formula in the
//! system ever carries an empty, duplicated-literal, or vacuous clause
//! (a clause containing both `x` and `!x`).

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A Boolean variable or its negation. Variables are 1-based as in DIMACS.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    var: u32,
    positive: bool,
}

impl Literal {
    /// Creates a literal for variable `var` (must be >= 1).
    pub fn new(var: u32, positive: bool) -> Self {
        assert!(var >= 1, "variable index must be >= 1");
        Literal { var, positive }
    }

    pub fn var(&self) -> u32 {
        self.var
    }

    pub fn is_positive(&self) -> bool {
        self.positive
    }

    pub fn negated(&self) -> Self {
        Literal {
            var: self.var,
            positive: !self.positive,
        }
    }

    /// Converts from a signed DIMACS integer (nonzero).
    pub fn from_dimacs(value: i64) -> Option<Self> {
        if value == 0 || value.unsigned_abs() > u64::from(u32::MAX) {
            return None;
        }
        Some(Literal {
            var: value.unsigned_abs() as u32,
            positive: value > 0,
        })
    }

    /// The signed DIMACS representation.
    pub fn to_dimacs(&self) -> i64 {
        if self.positive {
            i64::from(self.var)
        } else {
            -i64::from(self.var)
        }
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of literals. Non-empty, duplicate-free, and never vacuous
/// unless explicitly constructed through the permissive path.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    /// Builds a clause, enforcing all clause invariants.
    pub fn new(literals: Vec<Literal>) -> Result<Self, CnfError> {
        if literals.is_empty() {
            return Err(CnfError::EmptyClause);
        }
        let mut seen = std::collections::HashSet::with_capacity(literals.len());
        for lit in &literals {
            if !seen.insert(*lit) {
                return Err(CnfError::DuplicateLiteral { lit: lit.to_dimacs() });
            }
            if seen.contains(&lit.negated()) {
                return Err(CnfError::VacuousClause { var: lit.var() });
            }
        }
        Ok(Clause { literals })
    }

    /// Builds a clause that may be vacuous. Only the permissive DIMACS parse
    /// path uses this; the rest of the pipeline never produces one.
    pub(crate) fn new_permissive(literals: Vec<Literal>) -> Result<Self, CnfError> {
        if literals.is_empty() {
            return Err(CnfError::EmptyClause);
        }
        Ok(Clause { literals })
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    /// True if the clause contains both a variable and its negation.
    pub fn is_vacuous(&self) -> bool {
        let set: std::collections::HashSet<Literal> = self.literals.iter().copied().collect();
        self.literals.iter().any(|l| set.contains(&l.negated()))
    }
}

/// A CNF formula: a declared variable count plus a sequence of clauses.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Clause>,
}

impl CnfFormula {
    /// Builds a formula, checking that every literal stays within `num_vars`.
    pub fn new(num_vars: u32, clauses: Vec<Clause>) -> Result<Self, CnfError> {
        for clause in &clauses {
            for lit in clause.literals() {
                if lit.var() > num_vars {
                    return Err(CnfError::VariableOutOfRange {
                        var: lit.var(),
                        num_vars,
                    });
                }
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Total number of literal occurrences; equals the edge count of the
    /// literal-clause graph.
    pub fn num_literal_occurrences(&self) -> usize {
        self.clauses.iter().map(Clause::len).sum()
    }

    /// Structural equality up to clause order and literal order within
    /// clauses (CNF semantics).
    pub fn equivalent_up_to_order(&self, other: &CnfFormula) -> bool {
        if self.num_vars != other.num_vars || self.clauses.len() != other.clauses.len() {
            return false;
        }
        let canon = |f: &CnfFormula| -> Vec<Vec<i64>> {
            let mut cs: Vec<Vec<i64>> = f
                .clauses
                .iter()
                .map(|c| {
                    let mut lits: Vec<i64> = c.literals().iter().map(Literal::to_dimacs).collect();
                    lits.sort_unstable();
                    lits
                })
                .collect();
            cs.sort();
            cs
        };
        canon(self) == canon(other)
    }
}

/// Errors raised while building or parsing formulas.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CnfError {
    #[error("empty clause")]
    EmptyClause,
    #[error("duplicate literal {lit} in clause")]
    DuplicateLiteral { lit: i64 },
    #[error("vacuous clause: contains both polarities of variable {var}")]
    VacuousClause { var: u32 },
    #[error("literal references variable {var} but header declares only {num_vars}")]
    VariableOutOfRange { var: u32, num_vars: u32 },
    #[error("line {line}: non-ASCII byte 0x{byte:02x}")]
    NonAscii { line: usize, byte: u8 },
    #[error("line {line}: malformed header: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("line {line}: unexpected token {token:?}")]
    BadToken { line: usize, token: String },
    #[error("declared {declared} clauses but found {found}")]
    ClauseCountMismatch { declared: usize, found: usize },
    #[error("clause {index} is vacuous on variable {var} (pass the permissive flag to accept)")]
    VacuousClauseAt { index: usize, var: u32 },
    #[error("clause {index} is empty")]
    EmptyClauseAt { index: usize },
    #[error("unterminated clause at end of input")]
    UnterminatedClause,
}

/// Parser configuration. The only knob is whether vacuous clauses are
/// rejected (the default) or admitted as-is.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    pub allow_vacuous: bool,
}

/// Non-fatal findings produced while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseWarning {
    /// A duplicated literal within one clause that was dropped.
    DuplicateLiteralDropped { clause_index: usize, lit: i64 },
    /// A vacuous clause admitted under the permissive flag.
    VacuousClauseKept { clause_index: usize, var: u32 },
}

/// Result of a DIMACS parse: the formula plus any normalization warnings.
#[derive(Debug, Clone)]
pub struct ParsedCnf {
    pub formula: CnfFormula,
    pub warnings: Vec<ParseWarning>,
}

/// Parses a DIMACS CNF document.
///
/// Accepts comment lines starting with `c`, one `p cnf <vars> <clauses>`
/// header, then whitespace-separated signed integers with each clause
/// terminated by `0`. A line starting with `%` ends the document (SATLIB
/// convention). Duplicate literals inside a clause are dropped with a
/// warning; vacuous clauses are an error unless `allow_vacuous` is set.
pub fn parse_dimacs(input: &[u8]) -> Result<ParsedCnf, CnfError> {
    parse_dimacs_with(input, ParseOptions::default())
}

pub fn parse_dimacs_with(input: &[u8], opts: ParseOptions) -> Result<ParsedCnf, CnfError> {
    let mut warnings = Vec::new();
    let mut header: Option<(u32, usize)> = None;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut current_set: std::collections::HashSet<Literal> = std::collections::HashSet::new();
    let mut done = false;

    'lines: for (line_no, raw_line) in input.split(|&b| b == b'\n').enumerate() {
        let line_no = line_no + 1;
        if let Some(&byte) = raw_line.iter().find(|&&b| !b.is_ascii()) {
            return Err(CnfError::NonAscii { line: line_no, byte });
        }
        // Safe: all bytes checked ASCII above.
        let line = std::str::from_utf8(raw_line).unwrap().trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            // SATLIB files end with a "%" line followed by a stray "0".
            done = true;
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(CnfError::MalformedHeader {
                    line: line_no,
                    reason: "duplicate header".into(),
                });
            }
            let fields: Vec<&str> = line.split_ascii_whitespace().collect();
            if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
                return Err(CnfError::MalformedHeader {
                    line: line_no,
                    reason: format!("expected `p cnf <vars> <clauses>`, got {line:?}"),
                });
            }
            let num_vars: u32 = fields[2].parse().map_err(|_| CnfError::MalformedHeader {
                line: line_no,
                reason: format!("bad variable count {:?}", fields[2]),
            })?;
            let num_clauses: usize = fields[3].parse().map_err(|_| CnfError::MalformedHeader {
                line: line_no,
                reason: format!("bad clause count {:?}", fields[3]),
            })?;
            header = Some((num_vars, num_clauses));
            continue;
        }

        let (num_vars, num_clauses) = header.ok_or(CnfError::MissingHeader)?;
        for token in line.split_ascii_whitespace() {
            let value: i64 = token.parse().map_err(|_| CnfError::BadToken {
                line: line_no,
                token: token.to_string(),
            })?;
            if value == 0 {
                let index = clauses.len();
                if current.is_empty() {
                    return Err(CnfError::EmptyClauseAt { index });
                }
                let lits = std::mem::take(&mut current);
                current_set.clear();
                let clause = if opts.allow_vacuous {
                    let clause = Clause::new_permissive(lits)?;
                    if let Some(var) = clause
                        .literals()
                        .iter()
                        .find(|l| clause.literals().contains(&l.negated()))
                        .map(|l| l.var())
                    {
                        warnings.push(ParseWarning::VacuousClauseKept {
                            clause_index: index,
                            var,
                        });
                    }
                    clause
                } else {
                    Clause::new(lits).map_err(|e| match e {
                        CnfError::VacuousClause { var } => CnfError::VacuousClauseAt { index, var },
                        other => other,
                    })?
                };
                clauses.push(clause);
                if clauses.len() == num_clauses {
                    done = true;
                    continue 'lines;
                }
                continue;
            }
            if done {
                return Err(CnfError::BadToken {
                    line: line_no,
                    token: token.to_string(),
                });
            }
            let lit = Literal::from_dimacs(value).ok_or_else(|| CnfError::BadToken {
                line: line_no,
                token: token.to_string(),
            })?;
            if lit.var() > num_vars {
                return Err(CnfError::VariableOutOfRange {
                    var: lit.var(),
                    num_vars,
                });
            }
            if current_set.contains(&lit) {
                log::warn!(
                    "clause {}: dropping duplicate literal {}",
                    clauses.len(),
                    lit.to_dimacs()
                );
                warnings.push(ParseWarning::DuplicateLiteralDropped {
                    clause_index: clauses.len(),
                    lit: lit.to_dimacs(),
                });
                continue;
            }
            current_set.insert(lit);
            current.push(lit);
        }
    }

    if !current.is_empty() {
        return Err(CnfError::UnterminatedClause);
    }
    let (num_vars, num_clauses) = header.ok_or(CnfError::MissingHeader)?;
    if clauses.len() != num_clauses {
        return Err(CnfError::ClauseCountMismatch {
            declared: num_clauses,
            found: clauses.len(),
        });
    }
    let formula = CnfFormula::new(num_vars, clauses)?;
    Ok(ParsedCnf { formula, warnings })
}

/// Serializes a formula in DIMACS form: header, then one clause per line,
/// literals space-separated and terminated by ` 0\n`. Reparsing the output
/// reproduces the input exactly.
pub fn write_dimacs(formula: &CnfFormula) -> Vec<u8> {
    let mut out = String::new();
    write_dimacs_to(formula, &mut out);
    out.into_bytes()
}

pub fn write_dimacs_to(formula: &CnfFormula, out: &mut String) {
    use std::fmt::Write;
    writeln!(out, "p cnf {} {}", formula.num_vars(), formula.num_clauses()).unwrap();
    for clause in formula.clauses() {
        for lit in clause.literals() {
            write!(out, "{} ", lit.to_dimacs()).unwrap();
        }
        out.push_str("0\n");
    }
}

/// Exact per-formula counts used by reports and the `stats` subcommand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaSummary {
    pub num_vars: u32,
    pub num_clauses: usize,
    pub num_literal_occurrences: usize,
    pub clause_length_histogram: BTreeMap<usize, usize>,
}

pub fn formula_summary(formula: &CnfFormula) -> FormulaSummary {
    let mut hist = BTreeMap::new();
    for clause in formula.clauses() {
        *hist.entry(clause.len()).or_insert(0) += 1;
    }
    FormulaSummary {
        num_vars: formula.num_vars(),
        num_clauses: formula.num_clauses(),
        num_literal_occurrences: formula.num_literal_occurrences(),
        clause_length_histogram: hist,
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lit(v: i64) -> Literal {
        Literal::from_dimacs(v).unwrap()
    }

    fn clause(vs: &[i64]) -> Clause {
        Clause::new(vs.iter().map(|&v| lit(v)).collect()).unwrap()
    }

    #[test]
    fn parses_basic_formula() {
        let parsed = parse_dimacs(b"p cnf 3 2\n1 2 -3 0\n-1 -2 0").unwrap();
        let f = &parsed.formula;
        assert_eq!(f.num_vars(), 3);
        assert_eq!(f.num_clauses(), 2);
        assert_eq!(f.clauses()[0], clause(&[1, 2, -3]));
        assert_eq!(f.clauses()[1], clause(&[-1, -2]));
        assert!(parsed.warnings.is_empty());
    }

    #[test]
    fn parses_unit_clause_formula() {
        let parsed = parse_dimacs(b"p cnf 1 1\n1 0").unwrap();
        assert_eq!(parsed.formula.num_clauses(), 1);
        assert_eq!(parsed.formula.clauses()[0], clause(&[1]));
    }

    #[test]
    fn rejects_vacuous_clause_by_default() {
        let err = parse_dimacs(b"p cnf 2 1\n1 -1 0").unwrap_err();
        assert_eq!(err, CnfError::VacuousClauseAt { index: 0, var: 1 });
    }

    #[test]
    fn permissive_flag_keeps_vacuous_clause() {
        let opts = ParseOptions { allow_vacuous: true };
        let parsed = parse_dimacs_with(b"p cnf 2 1\n1 -1 0", opts).unwrap();
        assert_eq!(parsed.formula.num_clauses(), 1);
        assert_eq!(
            parsed.warnings,
            vec![ParseWarning::VacuousClauseKept {
                clause_index: 0,
                var: 1
            }]
        );
    }

    #[test]
    fn dedups_repeated_literal_with_warning() {
        let parsed = parse_dimacs(b"p cnf 2 1\n1 2 1 0").unwrap();
        assert_eq!(parsed.formula.clauses()[0], clause(&[1, 2]));
        assert_eq!(
            parsed.warnings,
            vec![ParseWarning::DuplicateLiteralDropped {
                clause_index: 0,
                lit: 1
            }]
        );
    }

    #[test]
    fn rejects_out_of_range_literal() {
        let err = parse_dimacs(b"p cnf 2 1\n3 0").unwrap_err();
        assert_eq!(
            err,
            CnfError::VariableOutOfRange { var: 3, num_vars: 2 }
        );
    }

    #[test]
    fn rejects_clause_count_mismatch() {
        let err = parse_dimacs(b"p cnf 2 2\n1 0").unwrap_err();
        assert_eq!(
            err,
            CnfError::ClauseCountMismatch {
                declared: 2,
                found: 1
            }
        );
        let err = parse_dimacs(b"p cnf 2 1\n1 0\n2 0").unwrap_err();
        assert!(matches!(err, CnfError::BadToken { .. }));
    }

    #[test]
    fn rejects_missing_and_malformed_headers() {
        assert_eq!(parse_dimacs(b"1 0").unwrap_err(), CnfError::MissingHeader);
        assert!(matches!(
            parse_dimacs(b"p cnf x 1\n1 0").unwrap_err(),
            CnfError::MalformedHeader { .. }
        ));
        assert!(matches!(
            parse_dimacs(b"p dnf 1 1\n1 0").unwrap_err(),
            CnfError::MalformedHeader { .. }
        ));
    }

    #[test]
    fn rejects_non_ascii() {
        assert!(matches!(
            parse_dimacs("p cnf 1 1\n1 0 é".as_bytes()).unwrap_err(),
            CnfError::NonAscii { .. }
        ));
    }

    #[test]
    fn rejects_unterminated_clause() {
        assert_eq!(
            parse_dimacs(b"p cnf 2 1\n1 2").unwrap_err(),
            CnfError::UnterminatedClause
        );
    }

    #[test]
    fn accepts_satlib_style_percent_footer() {
        let parsed = parse_dimacs(b"c comment\np cnf 2 1\n1 -2 0\n%\n0\n").unwrap();
        assert_eq!(parsed.formula.num_clauses(), 1);
    }

    #[test]
    fn empty_formula_round_trips() {
        let f = CnfFormula::new(0, vec![]).unwrap();
        assert_eq!(write_dimacs(&f), b"p cnf 0 0\n");
        let back = parse_dimacs(&write_dimacs(&f)).unwrap();
        assert_eq!(back.formula, f);
    }

    #[test]
    fn writer_is_bit_exact() {
        let f = CnfFormula::new(3, vec![clause(&[1, 2, -3]), clause(&[-1, -2])]).unwrap();
        assert_eq!(write_dimacs(&f), b"p cnf 3 2\n1 2 -3 0\n-1 -2 0\n");
    }

    #[test]
    fn summary_counts_are_exact() {
        let f = CnfFormula::new(3, vec![clause(&[1, 2, -3]), clause(&[-1, -2])]).unwrap();
        let s = formula_summary(&f);
        assert_eq!(s.num_vars, 3);
        assert_eq!(s.num_clauses, 2);
        assert_eq!(s.num_literal_occurrences, 5);
        assert_eq!(
            s.clause_length_histogram,
            BTreeMap::from([(2, 1), (3, 1)])
        );

        let unit = CnfFormula::new(1, vec![clause(&[1])]).unwrap();
        let s = formula_summary(&unit);
        assert_eq!(
            (s.num_vars, s.num_clauses, s.num_literal_occurrences),
            (1, 1, 1)
        );
        assert_eq!(s.clause_length_histogram, BTreeMap::from([(1, 1)]));
    }

    #[test]
    fn clause_invariants() {
        assert_eq!(Clause::new(vec![]).unwrap_err(), CnfError::EmptyClause);
        assert_eq!(
            Clause::new(vec![lit(1), lit(1)]).unwrap_err(),
            CnfError::DuplicateLiteral { lit: 1 }
        );
        assert_eq!(
            Clause::new(vec![lit(1), lit(-1)]).unwrap_err(),
            CnfError::VacuousClause { var: 1 }
        );
    }

    #[test]
    fn unused_header_variables_are_permitted() {
        let parsed = parse_dimacs(b"p cnf 5 1\n1 0").unwrap();
        assert_eq!(parsed.formula.num_vars(), 5);
    }

    /// Strategy for arbitrary valid formulas.
    pub(crate) fn arb_formula(max_vars: u32, max_clauses: usize) -> impl Strategy<Value = CnfFormula> {
        (1..=max_vars).prop_flat_map(move |nv| {
            let clause_strategy = proptest::collection::vec((1..=nv, any::<bool>()), 1..=5.min(nv as usize))
                .prop_filter_map("distinct vars", |pairs| {
                    let mut seen = std::collections::HashSet::new();
                    let lits: Vec<Literal> = pairs
                        .into_iter()
                        .filter(|(v, _)| seen.insert(*v))
                        .map(|(v, pos)| Literal::new(v, pos))
                        .collect();
                    Clause::new(lits).ok()
                });
            proptest::collection::vec(clause_strategy, 0..=max_clauses)
                .prop_map(move |clauses| CnfFormula::new(nv, clauses).unwrap())
        })
    }

    proptest! {
        #[test]
        fn parse_write_identity(f in arb_formula(12, 20)) {
            let text = write_dimacs(&f);
            let back = parse_dimacs(&text).unwrap();
            prop_assert!(back.warnings.is_empty());
            prop_assert_eq!(back.formula, f);
        }
    }
}
