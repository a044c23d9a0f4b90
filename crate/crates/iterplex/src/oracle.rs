//! Exhaustive reference counting over code supports.
//!
//! The `d`-iterated quasigroup of a table `G` has a `(d+1)`-dimensional code
//! whose support is `{β : left_fold(β) = 1}`. This module counts and
//! enumerates its diagonals (transversals), `k`-plexes, `k`-multiplexes and
//! partial variants by direct backtracking, independently of the recurrence
//! in [`crate::chain`]. The two routes must agree; tests hold them to that.
//!
//! Backtracking explores rows in lexicographically nondecreasing order, so a
//! multiset of rows is produced exactly once and streams are deterministic.
//! The final coordinate of every row is forced by the fold condition, which
//! keeps the search tree at `λ^(D-2)` nodes rather than `λ^(D-1)`.

use crate::algebra::{CayleyTable, Symbol, SymbolVector};
use crate::exact::{binomial, exact_div, factorial, multiset_permutation_count, partial_column_count};
use num_bigint::BigUint;
use thiserror::Error;

/// Errors raised by oracle routines.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("estimated search size {estimate} exceeds the feasibility cap {cap}; raise the cap to force the run")]
    FeasibilityExceeded { estimate: BigUint, cap: BigUint },
    #[error("{argument} out of range: {reason}")]
    ArgumentOutOfRange {
        argument: &'static str,
        reason: String,
    },
    #[error("expected an arrangement of {k} copies of each of {n} symbols: {reason}")]
    BadMultisetPermutation {
        n: usize,
        k: usize,
        reason: String,
    },
    #[error("not a valid {kind}: {reason}")]
    InvalidMultiplex { kind: String, reason: String },
}

/// Guard for oracle entry points: a single size estimate gates every search.
///
/// `max_nodes` bounds the estimated number of search-tree nodes
/// (`λ^(D-2)`-shaped); `max_order` and `max_depth` additionally bound the
/// transversal counter. All limits are configurable; use
/// [`Feasibility::unbounded`] to override.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Feasibility {
    pub max_nodes: u128,
    pub max_order: usize,
    pub max_depth: usize,
}

impl Default for Feasibility {
    fn default() -> Feasibility {
        Feasibility {
            max_nodes: 200_000_000,
            max_order: 6,
            max_depth: 5,
        }
    }
}

impl Feasibility {
    /// No limits; every run is admitted.
    pub fn unbounded() -> Feasibility {
        Feasibility {
            max_nodes: u128::MAX,
            max_order: usize::MAX,
            max_depth: usize::MAX,
        }
    }

    fn admit(&self, estimate: &BigUint) -> Result<(), OracleError> {
        let cap = BigUint::from(self.max_nodes);
        if *estimate > cap {
            return Err(OracleError::FeasibilityExceeded {
                estimate: estimate.clone(),
                cap,
            });
        }
        Ok(())
    }
}

/// Whether enumerated multiplexes may repeat elements.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum EnumerationMode {
    /// Distinct elements only: `k`-plexes.
    Sets,
    /// Multisets: all `k`-multiplexes.
    Multisets,
}

/// A `k`-multiplex: a multiset of `k·n` support indices of a `D`-dimensional
/// code with exactly `k` of them in every hyperplane. Rows are kept sorted,
/// so multiset equality is plain equality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multiplex {
    k: usize,
    order: usize,
    dimension: usize,
    rows: Vec<SymbolVector>,
}

impl Multiplex {
    /// Validates `rows` as a `k`-multiplex of `table`'s code and builds the
    /// canonical (sorted) representation.
    pub fn new(
        table: &CayleyTable,
        k: usize,
        mut rows: Vec<SymbolVector>,
    ) -> Result<Multiplex, OracleError> {
        let n = table.order();
        let invalid = |reason: String| OracleError::InvalidMultiplex {
            kind: format!("{k}-multiplex"),
            reason,
        };
        if k == 0 {
            return Err(invalid("k must be positive".into()));
        }
        if rows.len() != k * n {
            return Err(invalid(format!(
                "expected {} rows, found {}",
                k * n,
                rows.len()
            )));
        }
        let dimension = rows[0].len();
        if dimension < 2 {
            return Err(invalid("rows must have at least 2 coordinates".into()));
        }
        let mut counts = vec![0usize; dimension * n];
        for row in &rows {
            if row.len() != dimension {
                return Err(invalid("rows have mixed lengths".into()));
            }
            if !table.mds_member(row) {
                return Err(invalid(format!("row {row:?} is outside the support")));
            }
            for (j, s) in row.iter().enumerate() {
                counts[j * n + s.index()] += 1;
            }
        }
        for j in 0..dimension {
            for s in 0..n {
                if counts[j * n + s] != k {
                    return Err(invalid(format!(
                        "hyperplane (position {}, symbol {}) holds {} elements, expected {k}",
                        j + 1,
                        s + 1,
                        counts[j * n + s]
                    )));
                }
            }
        }
        rows.sort();
        Ok(Multiplex {
            k,
            order: n,
            dimension,
            rows,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// All `k·n` rows in sorted order, repeats included.
    pub fn rows(&self) -> &[SymbolVector] {
        &self.rows
    }

    /// Distinct rows with their multiplicities, in sorted order.
    pub fn distinct_rows(&self) -> Vec<(&SymbolVector, usize)> {
        let mut out: Vec<(&SymbolVector, usize)> = Vec::new();
        for row in &self.rows {
            match out.last_mut() {
                Some((r, m)) if *r == row => *m += 1,
                _ => out.push((row, 1)),
            }
        }
        out
    }

    /// The number of ways to order the rows: `(kn)! / ∏ mᵣ!` over the
    /// element multiplicities. This is the multiplicity with which the
    /// multiplex is counted by the table recurrence.
    pub fn table_multiplicity(&self) -> BigUint {
        let mut acc = factorial(self.rows.len() as u64);
        for (_, m) in self.distinct_rows() {
            acc = exact_div(acc, &factorial(m as u64));
        }
        acc
    }

    /// 1-based coordinate arrays, e.g. for JSON streaming.
    pub fn to_index_arrays(&self) -> Vec<Vec<u16>> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|s| s.one_based()).collect())
            .collect()
    }
}

/// A partial `k`-multiplex of length `l`: `k·l` support indices with every
/// hyperplane holding exactly `k` or none of them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialMultiplex {
    k: usize,
    length: usize,
    order: usize,
    dimension: usize,
    rows: Vec<SymbolVector>,
}

impl PartialMultiplex {
    /// Validates rows as a partial `k`-multiplex of length `l`.
    pub fn new(
        table: &CayleyTable,
        k: usize,
        l: usize,
        mut rows: Vec<SymbolVector>,
    ) -> Result<PartialMultiplex, OracleError> {
        let n = table.order();
        let invalid = |reason: String| OracleError::InvalidMultiplex {
            kind: format!("partial {k}-multiplex of length {l}"),
            reason,
        };
        if k == 0 || l == 0 || l > n {
            return Err(invalid(format!("need 1 ≤ l ≤ {n} and k ≥ 1")));
        }
        if rows.len() != k * l {
            return Err(invalid(format!(
                "expected {} rows, found {}",
                k * l,
                rows.len()
            )));
        }
        let dimension = rows[0].len();
        if dimension < 2 {
            return Err(invalid("rows must have at least 2 coordinates".into()));
        }
        let mut counts = vec![0usize; dimension * n];
        for row in &rows {
            if row.len() != dimension {
                return Err(invalid("rows have mixed lengths".into()));
            }
            if !table.mds_member(row) {
                return Err(invalid(format!("row {row:?} is outside the support")));
            }
            for (j, s) in row.iter().enumerate() {
                counts[j * n + s.index()] += 1;
            }
        }
        for j in 0..dimension {
            let mut used = 0;
            for s in 0..n {
                let c = counts[j * n + s];
                if c != 0 && c != k {
                    return Err(invalid(format!(
                        "hyperplane (position {}, symbol {}) holds {c} elements, expected 0 or {k}",
                        j + 1,
                        s + 1,
                    )));
                }
                if c == k {
                    used += 1;
                }
            }
            if used != l {
                return Err(invalid(format!(
                    "position {} uses {used} symbols, expected {l}",
                    j + 1
                )));
            }
        }
        rows.sort();
        Ok(PartialMultiplex {
            k,
            length: l,
            order: n,
            dimension,
            rows,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn rows(&self) -> &[SymbolVector] {
        &self.rows
    }
}

/// Structural flags of a multiplex. `is_true = !is_plex` always; `k = 1`
/// implies a plex that is not divisible.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct MultiplexClassification {
    pub is_plex: bool,
    pub is_true: bool,
    pub divisible: bool,
    pub connected: bool,
}

/// Counts transversals of the `d`-iterated quasigroup (diagonals of its
/// `(d+1)`-dimensional code) by dedicated permutation backtracking with one
/// availability bitmask per position.
pub fn count_transversals(
    table: &CayleyTable,
    d: usize,
    feasibility: &Feasibility,
) -> Result<BigUint, OracleError> {
    if d == 0 {
        return Err(OracleError::ArgumentOutOfRange {
            argument: "d",
            reason: "iteration depth must be at least 1".into(),
        });
    }
    let n = table.order();
    if n > feasibility.max_order {
        return Err(OracleError::FeasibilityExceeded {
            estimate: BigUint::from(n),
            cap: BigUint::from(feasibility.max_order),
        });
    }
    if d > feasibility.max_depth {
        return Err(OracleError::FeasibilityExceeded {
            estimate: BigUint::from(d),
            cap: BigUint::from(feasibility.max_depth),
        });
    }
    feasibility.admit(&factorial(n as u64).pow((d as u32).saturating_sub(1)))?;

    // Row r of a diagonal is the unique element with first coordinate r.
    let mut used = vec![0u64; d + 1];
    let count = transversal_rows(table, &mut used, n, d, 0, 1, 0);
    Ok(BigUint::from(count))
}

fn transversal_rows(
    table: &CayleyTable,
    used: &mut [u64],
    n: usize,
    last: usize,
    r: usize,
    j: usize,
    acc: usize,
) -> u128 {
    if j == last {
        let s = table.left_div0(acc, 0);
        if used[j] & (1u64 << s) != 0 {
            return 0;
        }
        if r + 1 == n {
            return 1;
        }
        used[j] |= 1u64 << s;
        let below = transversal_rows(table, used, n, last, r + 1, 1, r + 1);
        used[j] &= !(1u64 << s);
        return below;
    }
    let mut total = 0;
    for s in 0..n {
        if used[j] & (1u64 << s) != 0 {
            continue;
        }
        used[j] |= 1u64 << s;
        total += transversal_rows(table, used, n, last, r, j + 1, table.product0(acc, s));
        used[j] &= !(1u64 << s);
    }
    total
}

struct MultiplexSearch<'a> {
    table: &'a CayleyTable,
    n: usize,
    dimension: usize,
    k: usize,
    strict: bool,
    rows_needed: usize,
    /// For partial searches: max distinct symbols per position.
    symbol_budget: usize,
    counts: Vec<u8>,
    used_symbols: Vec<usize>,
    rows: Vec<Vec<u8>>,
    found: u128,
}

impl<'a> MultiplexSearch<'a> {
    fn new(
        table: &'a CayleyTable,
        dimension: usize,
        k: usize,
        strict: bool,
        length: usize,
    ) -> MultiplexSearch<'a> {
        let n = table.order();
        MultiplexSearch {
            table,
            n,
            dimension,
            k,
            strict,
            rows_needed: k * length,
            symbol_budget: length,
            counts: vec![0; dimension * n],
            used_symbols: vec![0; dimension],
            rows: Vec::with_capacity(k * length),
            found: 0,
        }
    }

    fn run(&mut self, visit: &mut dyn FnMut(&[Vec<u8>])) {
        self.place_row(visit);
    }

    fn place_row(&mut self, visit: &mut dyn FnMut(&[Vec<u8>])) {
        if self.rows.len() == self.rows_needed {
            self.found += 1;
            visit(&self.rows);
            return;
        }
        // Each row owns its buffer: deeper rows reuse nothing of this one.
        let mut current = vec![0u8; self.dimension];
        let prev = self.rows.last().cloned();
        self.place_coord(&mut current, prev.as_deref(), 0, 0, prev.is_some(), visit);
    }

    fn can_place(&self, j: usize, s: usize) -> bool {
        let c = self.counts[j * self.n + s];
        if c as usize >= self.k {
            return false;
        }
        c > 0 || self.used_symbols[j] < self.symbol_budget
    }

    fn place(&mut self, j: usize, s: usize) {
        if self.counts[j * self.n + s] == 0 {
            self.used_symbols[j] += 1;
        }
        self.counts[j * self.n + s] += 1;
    }

    fn unplace(&mut self, j: usize, s: usize) {
        self.counts[j * self.n + s] -= 1;
        if self.counts[j * self.n + s] == 0 {
            self.used_symbols[j] -= 1;
        }
    }

    fn place_coord(
        &mut self,
        current: &mut Vec<u8>,
        prev: Option<&[u8]>,
        j: usize,
        acc: usize,
        tight: bool,
        visit: &mut dyn FnMut(&[Vec<u8>]),
    ) {
        if j == self.dimension - 1 {
            let s = self.table.left_div0(acc, 0);
            if tight {
                let p = prev.unwrap()[j] as usize;
                if s < p || (s == p && self.strict) {
                    return;
                }
            }
            if !self.can_place(j, s) {
                return;
            }
            self.place(j, s);
            current[j] = s as u8;
            self.rows.push(current.clone());
            self.place_row(visit);
            self.rows.pop();
            self.unplace(j, s);
            return;
        }
        let lo = if tight { prev.unwrap()[j] as usize } else { 0 };
        for s in lo..self.n {
            if !self.can_place(j, s) {
                continue;
            }
            self.place(j, s);
            current[j] = s as u8;
            let acc_next = if j == 0 { s } else { self.table.product0(acc, s) };
            let tight_next = tight && s == prev.unwrap()[j] as usize;
            self.place_coord(current, prev, j + 1, acc_next, tight_next, visit);
            self.unplace(j, s);
        }
    }
}

fn check_multiplex_args(
    table: &CayleyTable,
    dimension: usize,
    k: usize,
) -> Result<(), OracleError> {
    if dimension < 2 {
        return Err(OracleError::ArgumentOutOfRange {
            argument: "dimension",
            reason: "codes have dimension at least 2".into(),
        });
    }
    if k == 0 {
        return Err(OracleError::ArgumentOutOfRange {
            argument: "k",
            reason: "k must be at least 1".into(),
        });
    }
    if k * table.order() > 128 {
        return Err(OracleError::ArgumentOutOfRange {
            argument: "k",
            reason: format!("k·n = {} too large to enumerate", k * table.order()),
        });
    }
    Ok(())
}

/// Enumerates all `k`-multiplexes (or `k`-plexes, in [`EnumerationMode::Sets`])
/// of the `dimension`-dimensional code in lexicographic order, calling
/// `visit` once per multiplex. Returns the count.
pub fn enumerate_multiplexes(
    table: &CayleyTable,
    dimension: usize,
    k: usize,
    mode: EnumerationMode,
    feasibility: &Feasibility,
    mut visit: impl FnMut(Multiplex),
) -> Result<BigUint, OracleError> {
    check_multiplex_args(table, dimension, k)?;
    let n = table.order();
    feasibility.admit(
        &multiset_permutation_count(n as u64, k as u64).pow(dimension as u32 - 2),
    )?;
    let mut search = MultiplexSearch::new(table, dimension, k, mode == EnumerationMode::Sets, n);
    let table_ref = table;
    let mut emit = |raw: &[Vec<u8>]| {
        let rows: Vec<SymbolVector> = raw
            .iter()
            .map(|row| row.iter().map(|&s| Symbol::from_index(s as usize)).collect())
            .collect();
        let multiplex = Multiplex::new(table_ref, k, rows)
            .expect("enumerated rows must re-validate as a multiplex");
        visit(multiplex);
    };
    search.run(&mut emit);
    Ok(BigUint::from(search.found))
}

/// Counts `k`-multiplexes or `k`-plexes without materializing them.
pub fn count_multiplexes(
    table: &CayleyTable,
    dimension: usize,
    k: usize,
    mode: EnumerationMode,
    feasibility: &Feasibility,
) -> Result<BigUint, OracleError> {
    check_multiplex_args(table, dimension, k)?;
    let n = table.order();
    feasibility.admit(
        &multiset_permutation_count(n as u64, k as u64).pow(dimension as u32 - 2),
    )?;
    let mut search = MultiplexSearch::new(table, dimension, k, mode == EnumerationMode::Sets, n);
    search.run(&mut |_| {});
    Ok(BigUint::from(search.found))
}

/// Enumerates partial `k`-multiplexes of length `l` (hyperplanes hold `k`
/// or none). Calls `visit` per find; returns the count.
pub fn enumerate_partial_multiplexes(
    table: &CayleyTable,
    dimension: usize,
    k: usize,
    l: usize,
    feasibility: &Feasibility,
    mut visit: impl FnMut(PartialMultiplex),
) -> Result<BigUint, OracleError> {
    check_multiplex_args(table, dimension, k)?;
    let n = table.order();
    if l == 0 || l > n {
        return Err(OracleError::ArgumentOutOfRange {
            argument: "l",
            reason: format!("need 1 ≤ l ≤ {n}"),
        });
    }
    feasibility.admit(
        &partial_column_count(n as u64, k as u64, l as u64).pow(dimension as u32 - 2),
    )?;
    let mut search = MultiplexSearch::new(table, dimension, k, false, l);
    let table_ref = table;
    let mut emit = |raw: &[Vec<u8>]| {
        let rows: Vec<SymbolVector> = raw
            .iter()
            .map(|row| row.iter().map(|&s| Symbol::from_index(s as usize)).collect())
            .collect();
        let partial = PartialMultiplex::new(table_ref, k, l, rows)
            .expect("enumerated rows must re-validate as a partial multiplex");
        visit(partial);
    };
    search.run(&mut emit);
    Ok(BigUint::from(search.found))
}

/// Counts partial `k`-multiplexes of length `l`.
pub fn count_partial_multiplexes(
    table: &CayleyTable,
    dimension: usize,
    k: usize,
    l: usize,
    feasibility: &Feasibility,
) -> Result<BigUint, OracleError> {
    enumerate_partial_multiplexes(table, dimension, k, l, feasibility, |_| {})
}

/// The parity obstruction for cyclic groups of even order: the `d`-iterated
/// cyclic group of even order `n` has no `k`-multiplex when `d` is even and
/// `k` is odd.
pub fn zn_obstruction(n: usize, d: usize, k: usize) -> bool {
    n.is_multiple_of(2) && d.is_multiple_of(2) && !k.is_multiple_of(2)
}

fn row_key(row: &[Symbol]) -> Vec<u8> {
    row.iter().map(|s| s.index() as u8).collect()
}

/// Classifies a multiplex: plex/true, divisible, connected.
pub fn classify_multiplex(multiplex: &Multiplex) -> MultiplexClassification {
    let distinct = multiplex.distinct_rows();
    let is_plex = distinct.len() == multiplex.rows().len();
    let elements: Vec<(Vec<u8>, usize)> = distinct
        .iter()
        .map(|(row, m)| (row_key(row), *m))
        .collect();
    MultiplexClassification {
        is_plex,
        is_true: !is_plex,
        divisible: search_division(&elements, multiplex.order, multiplex.dimension, multiplex.k)
            .is_some(),
        connected: component_count(&elements, multiplex.order, multiplex.dimension) <= 1,
    }
}

/// Splits a divisible multiplex into a certified `(k₁, k₂)` pair of
/// multiplexes, or returns `None` when it is indivisible.
pub fn find_division(
    table: &CayleyTable,
    multiplex: &Multiplex,
) -> Result<Option<(Multiplex, Multiplex)>, OracleError> {
    let distinct = multiplex.distinct_rows();
    let elements: Vec<(Vec<u8>, usize)> = distinct
        .iter()
        .map(|(row, m)| (row_key(row), *m))
        .collect();
    let Some((k1, picks)) =
        search_division(&elements, multiplex.order, multiplex.dimension, multiplex.k)
    else {
        return Ok(None);
    };
    let mut first: Vec<SymbolVector> = Vec::new();
    let mut second: Vec<SymbolVector> = Vec::new();
    for (i, (row, m)) in distinct.iter().enumerate() {
        for _ in 0..picks[i] {
            first.push((*row).clone());
        }
        for _ in 0..(m - picks[i]) {
            second.push((*row).clone());
        }
    }
    Ok(Some((
        Multiplex::new(table, k1, first)?,
        Multiplex::new(table, multiplex.k - k1, second)?,
    )))
}

/// Searches for sub-multiplicities forming a `k₁`-multiplex inside the
/// element list; returns `(k₁, picks)` for the smallest feasible `k₁`.
fn search_division(
    elements: &[(Vec<u8>, usize)],
    n: usize,
    dimension: usize,
    k: usize,
) -> Option<(usize, Vec<usize>)> {
    for k1 in 1..=k / 2 {
        let search = DivisionSearch { elements, n, k1 };
        let mut counts = vec![0usize; dimension * n];
        let mut picks = vec![0usize; elements.len()];
        let remaining: usize = elements.iter().map(|(_, m)| m).sum();
        if search.dfs(0, k1 * n, remaining, &mut counts, &mut picks) {
            return Some((k1, picks));
        }
    }
    None
}

struct DivisionSearch<'a> {
    elements: &'a [(Vec<u8>, usize)],
    n: usize,
    k1: usize,
}

impl DivisionSearch<'_> {
    fn dfs(
        &self,
        i: usize,
        need: usize,
        remaining: usize,
        counts: &mut [usize],
        picks: &mut [usize],
    ) -> bool {
        if need == 0 {
            // k1·n picks with every hyperplane capped at k1 and n hyperplanes
            // per position: each must hold exactly k1. Nothing left to check.
            return true;
        }
        if i == self.elements.len() || remaining < need {
            return false;
        }
        let (row, m) = &self.elements[i];
        let m = *m;
        let max_take = m.min(need);
        // Try larger takes first: tends to hit caps and prune sooner.
        for take in (0..=max_take).rev() {
            let mut ok = true;
            if take > 0 {
                for (j, &s) in row.iter().enumerate() {
                    if counts[j * self.n + s as usize] + take > self.k1 {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                for (j, &s) in row.iter().enumerate() {
                    counts[j * self.n + s as usize] += take;
                }
                picks[i] = take;
                if self.dfs(i + 1, need - take, remaining - m, counts, picks) {
                    return true;
                }
                for (j, &s) in row.iter().enumerate() {
                    counts[j * self.n + s as usize] -= take;
                }
                picks[i] = 0;
            }
        }
        false
    }
}

/// Number of connected components of the element-sharing graph: elements are
/// adjacent when they agree at some position.
fn component_count(elements: &[(Vec<u8>, usize)], n: usize, dimension: usize) -> usize {
    if elements.is_empty() {
        return 0;
    }
    let mut parent: Vec<usize> = (0..elements.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for j in 0..dimension {
        let mut first_with: Vec<Option<usize>> = vec![None; n];
        for (i, (row, _)) in elements.iter().enumerate() {
            let s = row[j] as usize;
            match first_with[s] {
                None => first_with[s] = Some(i),
                Some(f) => {
                    let (a, b) = (find(&mut parent, f), find(&mut parent, i));
                    if a != b {
                        parent[a] = b;
                    }
                }
            }
        }
    }
    (0..elements.len())
        .filter(|&i| find(&mut parent, i) == i)
        .count()
}

/// Appends two coordinates to every element of a multiplex: element `i`
/// gains `(u_i, v_i)` with `v_i` forced by the fold condition, yielding a
/// valid multiplex two dimensions higher. `u` must arrange `k` copies of
/// each symbol; distinct `u` on a plex yield distinct results.
pub fn extend_multiplex(
    table: &CayleyTable,
    multiplex: &Multiplex,
    u: &[Symbol],
) -> Result<Multiplex, OracleError> {
    let n = table.order();
    let k = multiplex.k;
    if u.len() != k * n {
        return Err(OracleError::BadMultisetPermutation {
            n,
            k,
            reason: format!("length {} instead of {}", u.len(), k * n),
        });
    }
    let mut seen = vec![0usize; n];
    for s in u {
        seen[s.index()] += 1;
    }
    if let Some(s) = (0..n).find(|&s| seen[s] != k) {
        return Err(OracleError::BadMultisetPermutation {
            n,
            k,
            reason: format!("symbol {} appears {} times", s + 1, seen[s]),
        });
    }
    let one = Symbol::from_one_based(1);
    let rows: Vec<SymbolVector> = multiplex
        .rows
        .iter()
        .zip(u)
        .map(|(row, &ui)| {
            // fold(row) = 1, so fold(row ++ [u, v]) = (1 ∗ u) ∗ v; force v.
            let vi = table.left_divide(table.product(one, ui), one);
            let mut extended = row.clone();
            extended.push(ui);
            extended.push(vi);
            extended
        })
        .collect();
    Multiplex::new(table, k, rows)
}

/// Closed-form bounds on multiplex counts in the `d`-dimensional code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountBounds {
    /// All `k`-multiplexes number at most `λ^d`.
    pub total: BigUint,
    /// True `k`-multiplexes (k ≥ 2 only): `(n·(kn-2)!/(k!^(n-1)·(k-2)!))^d`.
    pub true_multiplexes: Option<BigUint>,
    /// Disconnected multiplexes splitting at orders `(n₁, n-n₁)`.
    pub disconnected: Option<BigUint>,
    /// No `k`-plex exists when `k` exceeds this hyperplane support size
    /// `n^(d-2)`.
    pub plex_threshold: BigUint,
}

/// Evaluates the closed-form count bounds for `d`-dimensional codes of
/// order `n`. `n1`, when given, selects the disconnected split.
pub fn count_bounds(
    n: usize,
    d: usize,
    k: usize,
    n1: Option<usize>,
) -> Result<CountBounds, OracleError> {
    if n == 0 || k == 0 {
        return Err(OracleError::ArgumentOutOfRange {
            argument: "n,k",
            reason: "order and k must be positive".into(),
        });
    }
    if d < 2 {
        return Err(OracleError::ArgumentOutOfRange {
            argument: "d",
            reason: "bounds apply to dimension 2 and above".into(),
        });
    }
    let (nu, du, ku) = (n as u64, d as u32, k as u64);
    let total = multiset_permutation_count(nu, ku).pow(du);
    let true_multiplexes = (k >= 2).then(|| {
        let numerator = BigUint::from(nu) * factorial(ku * nu - 2);
        let denominator = factorial(ku).pow(n as u32 - 1) * factorial(ku - 2);
        exact_div(numerator, &denominator).pow(du)
    });
    let disconnected = match n1 {
        None => None,
        Some(n1) => {
            if n1 == 0 || n1 >= n {
                return Err(OracleError::ArgumentOutOfRange {
                    argument: "n1",
                    reason: format!("need 1 ≤ n1 < {n}"),
                });
            }
            let n2 = (n - n1) as u64;
            Some(
                (binomial(nu, n1 as u64)
                    * multiset_permutation_count(n1 as u64, ku)
                    * multiset_permutation_count(n2, ku))
                .pow(du),
            )
        }
    };
    Ok(CountBounds {
        total,
        true_multiplexes,
        disconnected,
        plex_threshold: BigUint::from(nu).pow(du - 2),
    })
}
