//! The signature chain: an exact lumped recurrence over symbol-count states.
//!
//! A table with `m` columns over a quasigroup assigns to every row the product
//! of its entries (folded left to right). Appending one more column maps the
//! product vector `V` to `U` with `u_i = v_i ∗ w_i`. Because permuting rows
//! never changes how many tables realize a product vector, the per-vector
//! table count depends only on the vector's *signature* — how many rows
//! currently hold each symbol. This module builds the exact integer step
//! matrix on signatures, analyses its reachability structure and period,
//! iterates the recurrence with big integers, and verifies externally
//! supplied coarser partitions (lumpings) of the state space.
//!
//! Conventions:
//! - states are ordered lexicographically descending, so the all-ones
//!   signature `(kn, 0, …, 0)` is state 0;
//! - `entry(s, t)` counts the admissible final columns `W` with
//!   `sig(U ⊘ W) = t` for the representative `U` of `s`, where `⊘` is
//!   componentwise right division. Mass therefore flows `t → s`:
//!   `l_s(m) = Σ_t entry(s, t) · l_t(m − 1)`;
//! - the base vector `l(1)` is the indicator of the start states (each
//!   admissible single column produces one of them);
//! - admissible columns use each of `length` chosen symbols exactly `k`
//!   times; the full chain is `length = n`, the partial chain picks any
//!   `length`-subset of the symbols.

use std::collections::VecDeque;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::CayleyTable;
use crate::exact;

/// Symbol tally of a product vector: entry `i` counts the rows whose running
/// product is symbol `i + 1`. Entries sum to `k · length`.
pub type SignatureState = Vec<u32>;

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("{what} = {amount} exceeds the cap {cap}; raise ChainLimits to force the build")]
    StateSpaceTooLarge {
        what: &'static str,
        amount: BigUint,
        cap: u128,
    },
    #[error("{argument} out of range: {reason}")]
    ArgumentOutOfRange {
        argument: &'static str,
        reason: String,
    },
    #[error("the all-ones signature is unreachable from the start states; the count is zero at every depth")]
    EUnreachable,
    #[error("{numerator} is not divisible by {divisor} while deriving {context}")]
    NonIntegerDivision {
        numerator: BigUint,
        divisor: BigUint,
        context: &'static str,
    },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("partition is not lumpable ({condition} condition): {witness}")]
    NotLumpable {
        condition: &'static str,
        witness: String,
    },
    #[error("chain structure violates the closed-class property: {0}")]
    Structure(String),
    #[error("matrix cache: {0}")]
    Cache(String),
}

impl From<std::io::Error> for ChainError {
    fn from(err: std::io::Error) -> ChainError {
        ChainError::Cache(err.to_string())
    }
}

/// Size guards for chain construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainLimits {
    /// Cap on the number of signature states.
    pub max_states: usize,
    /// Cap on build effort, measured as states × admissible columns.
    pub max_build_work: u128,
    /// Cap on the number of raw vector states in [`build_unlumped`].
    pub max_vectors: u128,
}

impl Default for ChainLimits {
    fn default() -> Self {
        ChainLimits {
            max_states: 5_000,
            max_build_work: 50_000_000,
            max_vectors: 1_000_000,
        }
    }
}

impl ChainLimits {
    /// No caps; callers accept arbitrarily long builds.
    pub fn unbounded() -> Self {
        ChainLimits {
            max_states: usize::MAX,
            max_build_work: u128::MAX,
            max_vectors: u128::MAX,
        }
    }
}

/// Exact integer step matrix of the signature chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionMatrix {
    fingerprint: String,
    order: usize,
    k: usize,
    length: usize,
    lambda: BigUint,
    states: Vec<SignatureState>,
    entries: Vec<BigUint>,
}

impl TransitionMatrix {
    /// Fingerprint of the table the matrix was built from.
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// Number of symbols `n`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of symbols per admissible column divided by `k`; equals the
    /// order for the full chain and `l < n` for partial chains.
    pub fn length(&self) -> usize {
        self.length
    }

    /// Constant row sum: the number of admissible columns.
    pub fn lambda(&self) -> &BigUint {
        &self.lambda
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[SignatureState] {
        &self.states
    }

    pub fn state(&self, index: usize) -> &SignatureState {
        &self.states[index]
    }

    pub fn entry(&self, row: usize, column: usize) -> &BigUint {
        &self.entries[row * self.states.len() + column]
    }

    pub fn row(&self, row: usize) -> &[BigUint] {
        let m = self.states.len();
        &self.entries[row * m..(row + 1) * m]
    }

    /// Index of a signature, if present.
    pub fn state_index(&self, signature: &[u32]) -> Option<usize> {
        self.states
            .binary_search_by(|probe| probe.as_slice().cmp(signature).reverse())
            .ok()
    }

    /// The all-ones signature `(k·length, 0, …, 0)` — counts finished tables.
    pub fn all_ones_index(&self) -> usize {
        debug_assert_eq!(
            self.states[0][0] as usize,
            self.k * self.length,
            "descending order must put the all-ones signature first"
        );
        0
    }

    /// States produced by a single admissible column: `length` symbols
    /// appearing `k` times each.
    pub fn start_indices(&self) -> Vec<usize> {
        let k = self.k as u32;
        self.states
            .iter()
            .enumerate()
            .filter(|(_, sig)| sig.iter().all(|&c| c == 0 || c == k))
            .map(|(i, _)| i)
            .collect()
    }

    /// Number of vectors sharing the signature: `(k·length)! / ∏ cᵢ!`.
    pub fn class_size(&self, index: usize) -> BigUint {
        let mut size = exact::factorial((self.k * self.length) as u64);
        for &c in &self.states[index] {
            size = exact::exact_div(size, &exact::factorial(c as u64));
        }
        size
    }

    pub fn is_partial(&self) -> bool {
        self.length < self.order
    }

    /// One recurrence step: `out_s = Σ_t entry(s, t) · values_t`.
    pub fn apply(&self, values: &[BigUint]) -> Vec<BigUint> {
        let m = self.states.len();
        assert_eq!(values.len(), m);
        let mut out = Vec::with_capacity(m);
        for s in 0..m {
            let mut acc = BigUint::zero();
            for (a, v) in self.row(s).iter().zip(values) {
                if !a.is_zero() && !v.is_zero() {
                    acc += a * v;
                }
            }
            out.push(acc);
        }
        out
    }

    /// Verify every structural invariant; `Err` carries a human-readable
    /// description of the first violation.
    fn check_invariants(&self) -> Result<(), String> {
        let m = self.states.len();
        if m == 0 {
            return Err("no states".into());
        }
        if self.entries.len() != m * m {
            return Err(format!(
                "entry table holds {} values for {} states",
                self.entries.len(),
                m
            ));
        }
        let total = (self.k * self.length) as u32;
        for (i, sig) in self.states.iter().enumerate() {
            if sig.len() != self.order {
                return Err(format!("state {i} has {} components", sig.len()));
            }
            if sig.iter().sum::<u32>() != total {
                return Err(format!("state {i} does not sum to {total}"));
            }
            if i > 0 && self.states[i - 1] <= *sig {
                return Err(format!("states {} and {i} not in descending order", i - 1));
            }
        }
        if self.states[0][0] != total {
            return Err("first state is not the all-ones signature".into());
        }
        for s in 0..m {
            let sum: BigUint = self.row(s).iter().sum();
            if sum != self.lambda {
                return Err(format!(
                    "row {s} sums to {sum}, expected lambda = {}",
                    self.lambda
                ));
            }
        }
        // Class sizes form a left eigenvector for the eigenvalue lambda:
        // Σ_s size(s)·entry(s, t) = lambda·size(t). Equivalent to the column
        // sums of the unlumped (0,1) chain all being lambda.
        let sizes: Vec<BigUint> = (0..m).map(|i| self.class_size(i)).collect();
        for t in 0..m {
            let mut acc = BigUint::zero();
            for (s, size) in sizes.iter().enumerate() {
                let a = self.entry(s, t);
                if !a.is_zero() {
                    acc += a * size;
                }
            }
            if acc != &self.lambda * &sizes[t] {
                return Err(format!(
                    "class sizes are not a left eigenvector at column {t}"
                ));
            }
        }
        Ok(())
    }
}

/// All signatures of `parts` nonnegative counts summing to `total`, in
/// lexicographically descending order.
fn signatures(parts: usize, total: u32) -> Vec<SignatureState> {
    let mut out = Vec::new();
    let mut current = vec![0u32; parts];
    fill(&mut out, &mut current, 0, total);
    out
}

fn fill(out: &mut Vec<SignatureState>, current: &mut [u32], position: usize, remaining: u32) {
    if position + 1 == current.len() {
        current[position] = remaining;
        out.push(current.to_vec());
        return;
    }
    for value in (0..=remaining).rev() {
        current[position] = value;
        fill(out, current, position + 1, remaining - value);
    }
}

/// All signature states for the full chain of an order-`n` table at a given
/// `k`, in the canonical (descending) order.
pub fn build_states(
    order: usize,
    k: usize,
    limits: &ChainLimits,
) -> Result<Vec<SignatureState>, ChainError> {
    check_dimensions(order, k, order, limits)?;
    Ok(signatures(order, (k * order) as u32))
}

fn check_dimensions(
    order: usize,
    k: usize,
    length: usize,
    limits: &ChainLimits,
) -> Result<BigUint, ChainError> {
    if order == 0 {
        return Err(ChainError::ArgumentOutOfRange {
            argument: "order",
            reason: "must be at least 1".into(),
        });
    }
    if k == 0 {
        return Err(ChainError::ArgumentOutOfRange {
            argument: "k",
            reason: "must be at least 1".into(),
        });
    }
    if length == 0 || length > order {
        return Err(ChainError::ArgumentOutOfRange {
            argument: "length",
            reason: format!("must be in 1..={order}"),
        });
    }
    let state_count = exact::binomial((k * length + order - 1) as u64, (order - 1) as u64);
    if state_count > BigUint::from(limits.max_states) {
        return Err(ChainError::StateSpaceTooLarge {
            what: "signature states",
            amount: state_count,
            cap: limits.max_states as u128,
        });
    }
    Ok(state_count)
}

/// Build the full signature step matrix for a table at multiplicity `k`.
pub fn build_transition(
    table: &CayleyTable,
    k: usize,
    limits: &ChainLimits,
) -> Result<TransitionMatrix, ChainError> {
    build_matrix(table, k, table.order(), limits)
}

/// Build the partial-chain step matrix: admissible columns use any
/// `length`-subset of the symbols, each `k` times.
pub fn build_partial_transition(
    table: &CayleyTable,
    k: usize,
    length: usize,
    limits: &ChainLimits,
) -> Result<TransitionMatrix, ChainError> {
    build_matrix(table, k, length, limits)
}

fn build_matrix(
    table: &CayleyTable,
    k: usize,
    length: usize,
    limits: &ChainLimits,
) -> Result<TransitionMatrix, ChainError> {
    let n = table.order();
    let state_count = check_dimensions(n, k, length, limits)?;
    let lambda = exact::partial_column_count(n as u64, k as u64, length as u64);
    let work = &state_count * &lambda;
    if work > BigUint::from(limits.max_build_work) {
        return Err(ChainError::StateSpaceTooLarge {
            what: "build work (states × columns)",
            amount: work,
            cap: limits.max_build_work,
        });
    }
    let states = signatures(n, (k * length) as u32);
    let m = states.len();
    let mut entries = vec![BigUint::zero(); m * m];
    let mut target = vec![0u32; n];
    for (s, sig) in states.iter().enumerate() {
        let rep = representative(sig);
        for_each_column(n, k, length, |column| {
            for slot in target.iter_mut() {
                *slot = 0;
            }
            for (&u, &w) in rep.iter().zip(column) {
                target[table.right_div0(u, w)] += 1;
            }
            let t = states
                .binary_search_by(|probe| probe.as_slice().cmp(&target).reverse())
                .expect("right division stays within the signature space");
            entries[s * m + t] += 1u32;
        });
    }
    let matrix = TransitionMatrix {
        fingerprint: table.fingerprint(),
        order: n,
        k,
        length,
        lambda,
        states,
        entries,
    };
    matrix
        .check_invariants()
        .expect("freshly built step matrix must satisfy its invariants");
    Ok(matrix)
}

/// Zero-based, nondecreasing symbol layout of a signature.
fn representative(signature: &[u32]) -> Vec<usize> {
    let mut rep = Vec::with_capacity(signature.iter().sum::<u32>() as usize);
    for (symbol, &count) in signature.iter().enumerate() {
        rep.extend(std::iter::repeat_n(symbol, count as usize));
    }
    rep
}

/// Visit every admissible column: each `length`-subset of the symbols laid
/// out `k` times each, in every arrangement.
fn for_each_column(n: usize, k: usize, length: usize, mut visit: impl FnMut(&[usize])) {
    let mut subset: Vec<usize> = (0..length).collect();
    loop {
        let mut column = Vec::with_capacity(k * length);
        for &symbol in &subset {
            column.extend(std::iter::repeat_n(symbol, k));
        }
        loop {
            visit(&column);
            if !exact::next_multiset_permutation(&mut column) {
                break;
            }
        }
        // Advance the subset in lexicographic order.
        let mut i = length;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if subset[i] != i + n - length {
                break;
            }
        }
        if subset[i] == i + n - length {
            return;
        }
        subset[i] += 1;
        for j in i + 1..length {
            subset[j] = subset[j - 1] + 1;
        }
    }
}

/// On which depths the all-ones count is (eventually) positive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsequence {
    #[serde(rename = "all-d")]
    AllDepths,
    #[serde(rename = "even-d-only")]
    EvenDepthsOnly,
    #[serde(rename = "odd-d-only")]
    OddDepthsOnly,
}

impl fmt::Display for Subsequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self {
            Subsequence::AllDepths => "all-d",
            Subsequence::EvenDepthsOnly => "even-d-only",
            Subsequence::OddDepthsOnly => "odd-d-only",
        };
        f.write_str(label)
    }
}

/// Flow structure of a step matrix: what the start states can reach, the
/// strongly connected component of the all-ones state, and its period.
#[derive(Clone, Debug)]
pub struct Reachability {
    /// Reachable from the start states along mass flow.
    pub reachable: Vec<bool>,
    /// Sorted state indices of the SCC containing the all-ones state.
    pub scc: Vec<usize>,
    pub in_scc: Vec<bool>,
    /// Gcd of closed-walk lengths through the all-ones state; 1 or 2.
    pub period: usize,
    /// Flow distance from the all-ones state, within its SCC only.
    pub levels: Vec<Option<u32>>,
    /// Distinct parities (`level mod 2`) of start states inside the SCC.
    pub start_parities: Vec<u8>,
    pub subsequence: Subsequence,
}

/// Forward-flow adjacency: `flow[t]` lists the states that receive mass from
/// `t`, i.e. every `s` with `entry(s, t) > 0`; `reverse[s]` lists the sources.
fn flow_adjacency(matrix: &TransitionMatrix) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let m = matrix.state_count();
    let mut flow = vec![Vec::new(); m];
    let mut reverse = vec![Vec::new(); m];
    for (s, sources) in reverse.iter_mut().enumerate() {
        for (t, a) in matrix.row(s).iter().enumerate() {
            if !a.is_zero() {
                flow[t].push(s);
                sources.push(t);
            }
        }
    }
    (flow, reverse)
}

fn breadth_first(adjacency: &[Vec<usize>], sources: &[usize]) -> Vec<bool> {
    let mut seen = vec![false; adjacency.len()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &s in sources {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &w in &adjacency[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Component id per state; Kosaraju's two passes, iterative.
fn strongly_connected(adjacency: &[Vec<usize>], reverse: &[Vec<usize>]) -> Vec<usize> {
    let n = adjacency.len();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut stack = vec![(root, 0usize)];
        while let Some(frame) = stack.last_mut() {
            let v = frame.0;
            if frame.1 < adjacency[v].len() {
                let w = adjacency[v][frame.1];
                frame.1 += 1;
                if !seen[w] {
                    seen[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(v);
                stack.pop();
            }
        }
    }
    let mut component = vec![usize::MAX; n];
    let mut next = 0;
    for &root in order.iter().rev() {
        if component[root] != usize::MAX {
            continue;
        }
        component[root] = next;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for &w in &reverse[v] {
                if component[w] == usize::MAX {
                    component[w] = next;
                    stack.push(w);
                }
            }
        }
        next += 1;
    }
    component
}

/// Analyse reachability from the start states and the cycle structure at the
/// all-ones state.
pub fn reachability_and_period(matrix: &TransitionMatrix) -> Result<Reachability, ChainError> {
    let (flow, reverse) = flow_adjacency(matrix);
    let starts = matrix.start_indices();
    let reachable = breadth_first(&flow, &starts);
    let ones = matrix.all_ones_index();
    if !reachable[ones] {
        return Err(ChainError::EUnreachable);
    }
    let component = strongly_connected(&flow, &reverse);
    let ones_component = component[ones];
    let m = matrix.state_count();
    let in_scc: Vec<bool> = (0..m).map(|v| component[v] == ones_component).collect();
    let scc: Vec<usize> = (0..m).filter(|&v| in_scc[v]).collect();

    // The chain has no transient mass (its unlumped form is a disjoint union
    // of closed classes), so a start state reaching the all-ones state must
    // already sit inside its SCC.
    let reaches_ones = breadth_first(&reverse, &[ones]);
    for &b in &starts {
        if reaches_ones[b] && !in_scc[b] {
            return Err(ChainError::Structure(format!(
                "start state {:?} reaches the all-ones state without sharing its closed class",
                matrix.state(b)
            )));
        }
    }

    // Levels: flow distance from the all-ones state, restricted to the SCC.
    let mut levels: Vec<Option<u32>> = vec![None; m];
    levels[ones] = Some(0);
    let mut queue = VecDeque::from([ones]);
    while let Some(v) = queue.pop_front() {
        for &w in &flow[v] {
            if in_scc[w] && levels[w].is_none() {
                levels[w] = Some(levels[v].unwrap() + 1);
                queue.push_back(w);
            }
        }
    }

    let mut period_gcd: u64 = 0;
    for &u in &scc {
        for &v in &flow[u] {
            if in_scc[v] {
                let diff = levels[u].unwrap() as i64 + 1 - levels[v].unwrap() as i64;
                period_gcd = num_integer::gcd(period_gcd, diff.unsigned_abs());
            }
        }
    }
    let period = period_gcd as usize;
    assert!(
        period == 1 || period == 2,
        "the chain period must be 1 or 2, found {period}"
    );

    let mut start_parities: Vec<u8> = starts
        .iter()
        .filter(|&&b| in_scc[b])
        .map(|&b| (levels[b].unwrap() % 2) as u8)
        .collect();
    start_parities.sort_unstable();
    start_parities.dedup();

    // A walk from a start state b to the all-ones state has length ≡
    // level(b) (mod period); lengths equal depths, so positivity holds on
    // the matching parity class of d.
    let subsequence = if period == 1 || start_parities.len() == 2 {
        Subsequence::AllDepths
    } else if start_parities == [0] {
        Subsequence::EvenDepthsOnly
    } else {
        Subsequence::OddDepthsOnly
    };

    Ok(Reachability {
        reachable,
        scc,
        in_scc,
        period,
        levels,
        start_parities,
        subsequence,
    })
}

/// Exact per-state table counts after `step` columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountVector {
    pub step: usize,
    pub values: Vec<BigUint>,
}

/// Count vectors for every step `1..=max_step`.
pub fn count_sequence(
    matrix: &TransitionMatrix,
    max_step: usize,
) -> Result<Vec<CountVector>, ChainError> {
    if max_step == 0 {
        return Err(ChainError::ArgumentOutOfRange {
            argument: "step",
            reason: "must be at least 1".into(),
        });
    }
    let mut values = vec![BigUint::zero(); matrix.state_count()];
    for b in matrix.start_indices() {
        values[b] = BigUint::one();
    }
    let mut out = vec![CountVector { step: 1, values }];
    for step in 2..=max_step {
        let next = matrix.apply(&out.last().unwrap().values);
        out.push(CountVector { step, values: next });
    }
    Ok(out)
}

/// The count vector after exactly `step` columns.
pub fn iterate_counts(matrix: &TransitionMatrix, step: usize) -> Result<CountVector, ChainError> {
    Ok(count_sequence(matrix, step)?.pop().unwrap())
}

/// Σ_s class_size(s) · l_s — the total number of tables, which must equal
/// λ^step.
pub fn weighted_total(matrix: &TransitionMatrix, counts: &CountVector) -> BigUint {
    let mut acc = BigUint::zero();
    for (i, v) in counts.values.iter().enumerate() {
        if !v.is_zero() {
            acc += matrix.class_size(i) * v;
        }
    }
    acc
}

/// Depth-indexed exact counts read off the chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivedCounts {
    pub depth: usize,
    /// Tables of `depth + 1` columns whose product vector is all ones; for
    /// `k = 1` this is `length! ×` the number of counted sets, in general it
    /// is the multiplicity-weighted multiplex count.
    pub tables: BigUint,
    /// For `k = 1` only: `tables / length!`, the exact number of transversals
    /// (full chain) or partial transversals (partial chain).
    pub transversals: Option<BigUint>,
}

/// Exact counts at table depth `d` (the code has `d + 1` coordinates).
pub fn derived_counts(matrix: &TransitionMatrix, depth: usize) -> Result<DerivedCounts, ChainError> {
    if depth == 0 {
        return Err(ChainError::ArgumentOutOfRange {
            argument: "depth",
            reason: "must be at least 1".into(),
        });
    }
    let counts = iterate_counts(matrix, depth + 1)?;
    let tables = counts.values[matrix.all_ones_index()].clone();
    let transversals = if matrix.k() == 1 {
        let divisor = exact::factorial(matrix.length() as u64);
        let (q, r) = tables.div_rem(&divisor);
        if !r.is_zero() {
            return Err(ChainError::NonIntegerDivision {
                numerator: tables,
                divisor,
                context: "the transversal count",
            });
        }
        Some(q)
    } else {
        None
    };
    Ok(DerivedCounts {
        depth,
        tables,
        transversals,
    })
}

/// One block of a state partition, as stored in fixture files: either a bare
/// list of signatures or a labeled object.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PartitionBlock {
    Labeled {
        label: String,
        states: Vec<SignatureState>,
    },
    Bare(Vec<SignatureState>),
}

impl PartitionBlock {
    pub fn states(&self) -> &[SignatureState] {
        match self {
            PartitionBlock::Labeled { states, .. } => states,
            PartitionBlock::Bare(states) => states,
        }
    }

    pub fn label(&self, index: usize) -> String {
        match self {
            PartitionBlock::Labeled { label, .. } => label.clone(),
            PartitionBlock::Bare(_) => format!("B{}", index + 1),
        }
    }
}

/// Parse a partition fixture: a JSON list of blocks.
pub fn parse_partition(text: &str) -> Result<Vec<PartitionBlock>, ChainError> {
    serde_json::from_str(text).map_err(|err| ChainError::InvalidPartition(err.to_string()))
}

/// A verified lumping of the signature chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LumpedMatrix {
    pub labels: Vec<String>,
    /// State indices per block.
    pub blocks: Vec<Vec<usize>>,
    /// Σ class_size over each block.
    pub block_sizes: Vec<BigUint>,
    /// `R[i][j]`: total flow of any single state of block `i` into block `j`
    /// (the classic lumpability quotient; equals the step matrix itself under
    /// the partition into singletons).
    pub row_matrix: Vec<Vec<BigUint>>,
    /// `C[i][j] = sizes_i · R[i][j] / sizes_j`: the matrix of the aggregated
    /// count recurrence `Y_i(m) = Σ_j C[i][j] · Y_j(m−1)` where
    /// `Y_i = Σ_{s ∈ block i} class_size(s) · l_s`.
    pub block_matrix: Vec<Vec<BigUint>>,
}

/// Check that a partition of the signature states is an exact lumping of the
/// chain and emit both quotient matrices.
///
/// Two conditions are verified, each exactly:
/// - the row condition: states in one block agree on their total transition
///   count into every block;
/// - the weighted-column condition: for each target state `t`, the class-size
///   weighted inflow `Σ_{s ∈ block i} class_size(s)·entry(s,t)/class_size(t)`
///   is constant over `t` within a block. This is what makes the aggregated
///   count recurrence exact.
///
/// The partition must cover every state reachable from the start states;
/// unreachable states may be included or omitted freely.
pub fn verify_lumping(
    matrix: &TransitionMatrix,
    blocks: &[PartitionBlock],
) -> Result<LumpedMatrix, ChainError> {
    if blocks.is_empty() {
        return Err(ChainError::InvalidPartition("no blocks".into()));
    }
    let m = matrix.state_count();
    let mut owner: Vec<Option<usize>> = vec![None; m];
    let mut block_indices: Vec<Vec<usize>> = Vec::with_capacity(blocks.len());
    for (i, block) in blocks.iter().enumerate() {
        let mut indices = Vec::with_capacity(block.states().len());
        if block.states().is_empty() {
            return Err(ChainError::InvalidPartition(format!(
                "block {} is empty",
                block.label(i)
            )));
        }
        for sig in block.states() {
            let index = matrix.state_index(sig).ok_or_else(|| {
                ChainError::InvalidPartition(format!("unknown signature {sig:?}"))
            })?;
            if let Some(previous) = owner[index] {
                return Err(ChainError::InvalidPartition(format!(
                    "signature {sig:?} appears in blocks {} and {}",
                    blocks[previous].label(previous),
                    block.label(i)
                )));
            }
            owner[index] = Some(i);
            indices.push(index);
        }
        block_indices.push(indices);
    }

    let (flow, _) = flow_adjacency(matrix);
    let reachable = breadth_first(&flow, &matrix.start_indices());
    for s in 0..m {
        if reachable[s] && owner[s].is_none() {
            return Err(ChainError::InvalidPartition(format!(
                "reachable signature {:?} is not covered",
                matrix.state(s)
            )));
        }
    }

    let b = block_indices.len();
    let labels: Vec<String> = blocks.iter().enumerate().map(|(i, bl)| bl.label(i)).collect();
    let sizes: Vec<BigUint> = (0..m).map(|s| matrix.class_size(s)).collect();
    let block_sizes: Vec<BigUint> = block_indices
        .iter()
        .map(|ix| ix.iter().map(|&s| sizes[s].clone()).sum())
        .collect();

    // Row condition: per-state outflow into each covered block is constant
    // within the source block. Flow into uncovered (unreachable) states is
    // ignored — it never carries mass.
    let mut row_matrix: Vec<Vec<BigUint>> = Vec::with_capacity(b);
    for (i, members) in block_indices.iter().enumerate() {
        let outflow = |s: usize| -> Vec<BigUint> {
            let mut sums = vec![BigUint::zero(); b];
            for (a, own) in matrix.row(s).iter().zip(&owner) {
                if let Some(j) = *own {
                    if !a.is_zero() {
                        sums[j] += a;
                    }
                }
            }
            sums
        };
        let first = outflow(members[0]);
        for &s in &members[1..] {
            let other = outflow(s);
            if other != first {
                let j = (0..b).find(|&j| other[j] != first[j]).unwrap();
                return Err(ChainError::NotLumpable {
                    condition: "row",
                    witness: format!(
                        "states {:?} and {:?} of block {} flow {} and {} into block {}",
                        matrix.state(members[0]),
                        matrix.state(s),
                        labels[i],
                        first[j],
                        other[j],
                        labels[j]
                    ),
                });
            }
        }
        row_matrix.push(first);
    }

    // Weighted-column condition: the class-size weighted inflow from block i
    // is the same for every target state of block j.
    let mut block_matrix: Vec<Vec<BigUint>> = vec![vec![BigUint::zero(); b]; b];
    for (j, targets) in block_indices.iter().enumerate() {
        for (i, members) in block_indices.iter().enumerate() {
            let weighted = |t: usize| -> Result<BigUint, ChainError> {
                let mut acc = BigUint::zero();
                for &s in members {
                    let a = matrix.entry(s, t);
                    if !a.is_zero() {
                        acc += a * &sizes[s];
                    }
                }
                let (q, r) = acc.div_rem(&sizes[t]);
                if !r.is_zero() {
                    return Err(ChainError::NonIntegerDivision {
                        numerator: acc,
                        divisor: sizes[t].clone(),
                        context: "the weighted block inflow",
                    });
                }
                Ok(q)
            };
            let first = weighted(targets[0])?;
            for &t in &targets[1..] {
                let other = weighted(t)?;
                if other != first {
                    return Err(ChainError::NotLumpable {
                        condition: "weighted-column",
                        witness: format!(
                            "targets {:?} and {:?} of block {} draw {} and {} from block {}",
                            matrix.state(targets[0]),
                            matrix.state(t),
                            labels[j],
                            first,
                            other,
                            labels[i]
                        ),
                    });
                }
            }
            block_matrix[i][j] = first;
        }
    }

    // Cross identity tying the two quotients together.
    for i in 0..b {
        for j in 0..b {
            assert_eq!(
                &block_sizes[i] * &row_matrix[i][j],
                &block_matrix[i][j] * &block_sizes[j],
                "quotient matrices must satisfy sizes_i·R[i][j] = C[i][j]·sizes_j"
            );
        }
    }

    Ok(LumpedMatrix {
        labels,
        blocks: block_indices,
        block_sizes,
        row_matrix,
        block_matrix,
    })
}

/// Raw chain over all `n^(kn)` product vectors; test scale only.
pub struct UnlumpedMatrix {
    order: usize,
    k: usize,
    lambda: BigUint,
    /// `rows[u]` lists, sorted, the vectors `v` with a one-entry at `(u, v)`,
    /// i.e. those one admissible column away from `u`.
    rows: Vec<Vec<u32>>,
}

impl UnlumpedMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn lambda(&self) -> &BigUint {
        &self.lambda
    }

    pub fn vector_count(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    /// Decode a vector index into its symbol signature.
    pub fn vector_signature(&self, mut index: usize) -> SignatureState {
        let mut sig = vec![0u32; self.order];
        for _ in 0..self.k * self.order {
            sig[index % self.order] += 1;
            index /= self.order;
        }
        sig
    }

    /// Check that summing raw entries over signature classes reproduces the
    /// lumped matrix at every vector, not just at representatives.
    pub fn lumps_to(&self, matrix: &TransitionMatrix) -> Result<(), String> {
        if matrix.order() != self.order || matrix.k() != self.k || matrix.is_partial() {
            return Err("matrix shape does not match".into());
        }
        let m = matrix.state_count();
        for (u, sources) in self.rows.iter().enumerate() {
            let row_state = matrix
                .state_index(&self.vector_signature(u))
                .ok_or("missing row signature")?;
            let mut tally = vec![0u64; m];
            for &v in sources {
                let t = matrix
                    .state_index(&self.vector_signature(v as usize))
                    .ok_or("missing column signature")?;
                tally[t] += 1;
            }
            for (t, (count, expected)) in tally.iter().zip(matrix.row(row_state)).enumerate() {
                if BigUint::from(*count) != *expected {
                    return Err(format!(
                        "vector {u} disagrees with the lumped row {row_state} at column {t}"
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Build the raw vector-level chain: a (0,1) incidence with both row and
/// column sums λ.
pub fn build_unlumped(
    table: &CayleyTable,
    k: usize,
    limits: &ChainLimits,
) -> Result<UnlumpedMatrix, ChainError> {
    let n = table.order();
    if k == 0 {
        return Err(ChainError::ArgumentOutOfRange {
            argument: "k",
            reason: "must be at least 1".into(),
        });
    }
    let kn = k * n;
    let vectors = (n as u128).checked_pow(kn as u32).filter(|&v| v <= limits.max_vectors);
    let Some(vectors) = vectors else {
        return Err(ChainError::StateSpaceTooLarge {
            what: "vector states",
            amount: BigUint::from(n as u64).pow(kn as u32),
            cap: limits.max_vectors,
        });
    };
    let vectors = vectors as usize;
    let lambda = exact::multiset_permutation_count(n as u64, k as u64);
    let mut rows: Vec<Vec<u32>> = vec![Vec::new(); vectors];
    let mut digits = vec![0usize; kn];
    for v in 0..vectors {
        let mut rest = v;
        for d in digits.iter_mut() {
            *d = rest % n;
            rest /= n;
        }
        for_each_column(n, k, n, |column| {
            let mut u = 0usize;
            for (i, (&vi, &wi)) in digits.iter().zip(column).enumerate().rev() {
                let _ = i;
                u = u * n + table.product0(vi, wi);
            }
            rows[u].push(v as u32);
        });
    }
    for (u, row) in rows.iter_mut().enumerate() {
        row.sort_unstable();
        let distinct = row.windows(2).all(|w| w[0] < w[1]);
        assert!(
            distinct && BigUint::from(row.len()) == lambda,
            "row {u} of the raw chain must hold λ distinct entries"
        );
    }
    let mut column_tallies = vec![0u64; vectors];
    for row in &rows {
        for &v in row {
            column_tallies[v as usize] += 1;
        }
    }
    assert!(
        column_tallies
            .iter()
            .all(|&c| BigUint::from(c) == lambda),
        "every raw column must sum to λ"
    );
    Ok(UnlumpedMatrix {
        order: n,
        k,
        lambda,
        rows,
    })
}

#[derive(Serialize, Deserialize)]
struct MatrixFile {
    fingerprint: String,
    order: usize,
    k: usize,
    length: usize,
    lambda: String,
    states: Vec<SignatureState>,
    entries: Vec<Vec<String>>,
}

/// Serialize a matrix to a cache file, atomically (write + rename).
pub fn save_matrix(matrix: &TransitionMatrix, path: &Path) -> Result<(), ChainError> {
    let m = matrix.state_count();
    let file = MatrixFile {
        fingerprint: matrix.fingerprint.clone(),
        order: matrix.order,
        k: matrix.k,
        length: matrix.length,
        lambda: matrix.lambda.to_string(),
        states: matrix.states.clone(),
        entries: (0..m)
            .map(|s| matrix.row(s).iter().map(BigUint::to_string).collect())
            .collect(),
    };
    let text = serde_json::to_string(&file).map_err(|err| ChainError::Cache(err.to_string()))?;
    let mut temporary = path.as_os_str().to_owned();
    temporary.push(format!(".tmp{}", std::process::id()));
    let temporary = PathBuf::from(temporary);
    fs::write(&temporary, text)?;
    fs::rename(&temporary, path)?;
    Ok(())
}

/// Load and fully revalidate a cached matrix.
pub fn load_matrix(path: &Path) -> Result<TransitionMatrix, ChainError> {
    let text = fs::read_to_string(path)?;
    let file: MatrixFile =
        serde_json::from_str(&text).map_err(|err| ChainError::Cache(err.to_string()))?;
    let parse = |digits: &str| -> Result<BigUint, ChainError> {
        digits
            .parse::<BigUint>()
            .map_err(|_| ChainError::Cache(format!("bad integer {digits:?}")))
    };
    let mut entries = Vec::with_capacity(file.states.len() * file.states.len());
    for row in &file.entries {
        for value in row {
            entries.push(parse(value)?);
        }
    }
    let matrix = TransitionMatrix {
        fingerprint: file.fingerprint,
        order: file.order,
        k: file.k,
        length: file.length,
        lambda: parse(&file.lambda)?,
        states: file.states,
        entries,
    };
    matrix
        .check_invariants()
        .map_err(|reason| ChainError::Cache(format!("invalid cached matrix: {reason}")))?;
    Ok(matrix)
}

/// Cache file name for a (table, k, length) combination.
pub fn cache_file_name(fingerprint: &str, k: usize, length: usize) -> String {
    format!("matrix-{fingerprint}-k{k}-l{length}.json")
}

/// Fetch a step matrix through the cache directory, rebuilding and rewriting
/// on any miss, fingerprint mismatch, or unreadable file.
pub fn cached_transition(
    table: &CayleyTable,
    k: usize,
    length: usize,
    cache_dir: Option<&Path>,
    limits: &ChainLimits,
) -> Result<TransitionMatrix, ChainError> {
    let Some(dir) = cache_dir else {
        return build_matrix(table, k, length, limits);
    };
    let path = dir.join(cache_file_name(&table.fingerprint(), k, length));
    if let Ok(matrix) = load_matrix(&path) {
        if matrix.fingerprint == table.fingerprint()
            && matrix.k == k
            && matrix.length == length
            && matrix.order == table.order()
        {
            return Ok(matrix);
        }
    }
    let matrix = build_matrix(table, k, length, limits)?;
    fs::create_dir_all(dir)?;
    save_matrix(&matrix, &path)?;
    Ok(matrix)
}
