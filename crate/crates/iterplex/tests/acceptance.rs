//! The acceptance gate: one test per release criterion, each ending in a
//! single `[PASS]` line. Every comparison is exact — no floating point, no
//! tolerances — and the stated wall-clock budgets are asserted.

use std::collections::HashSet;
use std::fs;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;

use iterplex::algebra::{CayleyTable, Symbol, SymbolVector};
use iterplex::chain::{self, ChainLimits, PartitionBlock, TransitionMatrix};
use iterplex::exact;
use iterplex::oracle::{
    self, EnumerationMode, Feasibility, Multiplex, MultiplexClassification,
};
use iterplex::reference::{transversal_closed_form, SmallGroup};
use iterplex::spectral;

fn limits() -> ChainLimits {
    ChainLimits::default()
}

fn feasibility() -> Feasibility {
    Feasibility::default()
}

fn fixture_table(name: &str) -> CayleyTable {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    let text = fs::read_to_string(&path)
        .unwrap_or_else(|err| panic!("reading {}: {err}", path.display()));
    CayleyTable::parse(&text).expect("fixture table parses")
}

fn fixture_partition(name: &str) -> Vec<PartitionBlock> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    let text = fs::read_to_string(&path)
        .unwrap_or_else(|err| panic!("reading {}: {err}", path.display()));
    serde_json::from_str(&text).expect("fixture partition parses")
}

fn cyclic(n: usize) -> CayleyTable {
    CayleyTable::cyclic(n).unwrap()
}

fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

fn frac(numerator: i64, denominator: i64) -> BigRational {
    BigRational::new(numerator.into(), denominator.into())
}

fn full_matrix(table: &CayleyTable) -> TransitionMatrix {
    chain::build_transition(table, 1, &limits()).unwrap()
}

/// `l_ones(step)`: tables of `step` columns whose product is all ones.
fn ones_count(matrix: &TransitionMatrix, step: usize) -> BigUint {
    let counts = chain::iterate_counts(matrix, step).unwrap();
    counts.values[matrix.all_ones_index()].clone()
}

/// All multiset permutations of `{1^k, …, n^k}` in lexicographic order.
fn admissible_columns(n: usize, k: usize) -> Vec<SymbolVector> {
    let mut word: Vec<u16> = (1..=n as u16)
        .flat_map(|s| std::iter::repeat_n(s, k))
        .collect();
    let mut all = Vec::new();
    loop {
        all.push(word.iter().map(|&s| Symbol::from_one_based(s)).collect());
        let Some(i) = (0..word.len() - 1).rev().find(|&i| word[i] < word[i + 1]) else {
            break;
        };
        let j = (i + 1..word.len()).rev().find(|&j| word[j] > word[i]).unwrap();
        word.swap(i, j);
        word[i + 1..].reverse();
    }
    all
}

/// Criterion 1 — for the four groups with closed-form transversal counts,
/// the chain reproduces the formula at every depth 1..=12, within 5 seconds.
#[test]
fn criterion_01_closed_forms_match_the_chain() {
    let clock = Instant::now();
    for group in SmallGroup::ALL {
        let matrix = full_matrix(&group.table());
        for depth in 1..=12 {
            let derived = chain::derived_counts(&matrix, depth).unwrap();
            let expected = transversal_closed_form(group, depth);
            assert_eq!(
                derived.transversals.unwrap(),
                expected,
                "{} at depth {depth}",
                group.label()
            );
        }
    }
    let elapsed = clock.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    println!(
        "[PASS] criterion 1: chain matches the closed forms for all four groups, depths 1-12 ({elapsed:?})"
    );
}

/// Criterion 2 — the backtracking count and the chain count agree on every
/// built-in table of order at most 5 plus the non-group fixture, at depths
/// 1..=3 (1..=4 for order <= 4), within 2 minutes.
#[test]
fn criterion_02_oracle_and_chain_agree_on_transversals() {
    let clock = Instant::now();
    let tables = [
        ("cyclic-2", cyclic(2)),
        ("cyclic-3", cyclic(3)),
        ("cyclic-4", cyclic(4)),
        ("cyclic-5", cyclic(5)),
        ("klein", CayleyTable::klein()),
        ("q5", fixture_table("q5.tbl")),
    ];
    let mut checked = 0;
    for (name, table) in &tables {
        let matrix = full_matrix(table);
        let max_depth = if table.order() <= 4 { 4 } else { 3 };
        for depth in 1..=max_depth {
            let counted = oracle::count_transversals(table, depth, &feasibility()).unwrap();
            let derived = chain::derived_counts(&matrix, depth).unwrap();
            assert_eq!(
                counted,
                derived.transversals.unwrap(),
                "{name} at depth {depth}"
            );
            checked += 1;
        }
    }
    let elapsed = clock.elapsed();
    assert!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
    println!(
        "[PASS] criterion 2: oracle and chain agree on {checked} (table, depth) transversal counts ({elapsed:?})"
    );
}

/// Shared body for criteria 3 and 4: verify a committed partition fixture,
/// compare the lumped matrix, the aggregated profile, and the constant.
fn lumping_fixture_checks(
    table: &CayleyTable,
    partition: &str,
    expected_matrix: &[&[u64]],
    expected_profile_numerators: &[i64],
    profile_denominator: i64,
    expected_constant: BigRational,
) {
    let matrix = full_matrix(table);
    let lumped = chain::verify_lumping(&matrix, &fixture_partition(partition)).unwrap();
    let expected: Vec<Vec<BigUint>> = expected_matrix
        .iter()
        .map(|row| row.iter().map(|&v| big(v)).collect())
        .collect();
    assert_eq!(lumped.block_matrix, expected, "lumped one-step matrix");

    let reach = chain::reachability_and_period(&matrix).unwrap();
    let eigen = spectral::dominant_eigenvector(&matrix, &reach).unwrap();
    let aggregated = spectral::aggregate_eigenvector(&matrix, &eigen, &lumped);
    let expected_profile: Vec<BigRational> = expected_profile_numerators
        .iter()
        .map(|&numerator| frac(numerator, profile_denominator))
        .collect();
    assert_eq!(aggregated, expected_profile, "aggregated profile");

    let constant = spectral::constant_from_matrix(&matrix).unwrap();
    assert_eq!(constant.value, expected_constant, "limit constant");
}

/// Criterion 3 — the order-5 cyclic chain lumps to the documented 4-class
/// matrix with the documented profile and constant, within 10 seconds.
#[test]
fn criterion_03_four_class_lumping_of_the_cyclic_group() {
    let clock = Instant::now();
    lumping_fixture_checks(
        &cyclic(5),
        "z5-4class.json",
        &[
            &[0, 5, 0, 0],
            &[120, 15, 30, 20],
            &[0, 50, 30, 40],
            &[0, 50, 60, 60],
        ],
        &[1, 24, 40, 60],
        125,
        frac(24, 125),
    );
    let elapsed = clock.elapsed();
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    println!(
        "[PASS] criterion 3: 4-class lumping, profile x125, and constant 24/125 all match ({elapsed:?})"
    );
}

/// Criterion 4 — the order-5 non-group chain lumps to the documented
/// 13-class matrix with the documented profile and constant, within 30
/// seconds.
#[test]
fn criterion_04_thirteen_class_lumping_of_the_non_group() {
    let clock = Instant::now();
    lumping_fixture_checks(
        &fixture_table("q5.tbl"),
        "q5-13class.json",
        &[
            &[0, 5, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
            &[120, 3, 6, 12, 12, 0, 2, 2, 8, 0, 4, 12, 0],
            &[0, 18, 18, 18, 0, 0, 12, 18, 18, 12, 12, 24, 0],
            &[0, 24, 12, 12, 0, 0, 8, 6, 6, 12, 12, 8, 0],
            &[0, 8, 0, 0, 0, 0, 4, 0, 0, 8, 8, 0, 0],
            &[0, 0, 0, 0, 0, 0, 6, 6, 6, 8, 8, 8, 0],
            &[0, 12, 24, 24, 36, 36, 30, 24, 24, 28, 28, 16, 72],
            &[0, 4, 12, 6, 0, 12, 8, 12, 6, 12, 8, 8, 24],
            &[0, 16, 12, 6, 0, 12, 8, 6, 0, 16, 12, 0, 24],
            &[0, 0, 12, 18, 36, 24, 14, 18, 24, 4, 8, 24, 0],
            &[0, 12, 12, 18, 36, 24, 14, 12, 18, 8, 12, 16, 0],
            &[0, 18, 12, 6, 0, 12, 4, 6, 0, 12, 8, 4, 0],
            &[0, 0, 0, 0, 0, 0, 10, 10, 10, 0, 0, 0, 0],
        ],
        &[1, 24, 72, 48, 16, 24, 144, 48, 48, 72, 72, 36, 20],
        625,
        frac(24, 625),
    );
    let elapsed = clock.elapsed();
    assert!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    println!(
        "[PASS] criterion 4: 13-class lumping, profile x625, and constant 24/625 all match ({elapsed:?})"
    );
}

/// Criterion 5 — the even-order parity obstruction: for the listed
/// (order, depth, k) triples the multiplex count is zero and the closed
/// predicate agrees; the first non-obstructed neighbour is positive.
#[test]
fn criterion_05_parity_obstruction_forbids_odd_multiplexes() {
    for (n, depth, k) in [(2, 2, 1), (4, 2, 1), (2, 4, 1), (2, 2, 3)] {
        let count = oracle::count_multiplexes(
            &cyclic(n),
            depth + 1,
            k,
            EnumerationMode::Multisets,
            &feasibility(),
        )
        .unwrap();
        assert!(count.is_zero(), "expected zero for n={n} d={depth} k={k}");
        assert!(
            oracle::zn_obstruction(n, depth, k),
            "predicate must flag n={n} d={depth} k={k}"
        );
    }
    let even_k = oracle::count_multiplexes(
        &cyclic(2),
        3,
        2,
        EnumerationMode::Multisets,
        &feasibility(),
    )
    .unwrap();
    assert!(!even_k.is_zero(), "k=2 must escape the obstruction");
    assert!(!oracle::zn_obstruction(2, 2, 2));
    println!(
        "[PASS] criterion 5: the even-order obstruction zeroes all four counts and clears k=2"
    );
}

/// Criterion 6 — every built-in group of order at most 5 admits a 2-plex.
/// At dimension 2 no line holds two distinct cells, so the first dimension
/// where the statement is meaningful is 3; it is checked there.
#[test]
fn criterion_06_small_groups_admit_two_plexes() {
    let tables = [
        ("cyclic-2", cyclic(2)),
        ("cyclic-3", cyclic(3)),
        ("cyclic-4", cyclic(4)),
        ("cyclic-5", cyclic(5)),
        ("klein", CayleyTable::klein()),
    ];
    for (name, table) in &tables {
        let plexes =
            oracle::count_multiplexes(table, 3, 2, EnumerationMode::Sets, &feasibility())
                .unwrap();
        assert!(!plexes.is_zero(), "{name} must admit a 2-plex");
    }
    println!("[PASS] criterion 6: every built-in group of order <= 5 has a 2-plex at dimension 3");
}

/// Criterion 7 — the raw vector-level chain is a (0,1) matrix with all row
/// and column sums equal to the admissible-column count, and summing its
/// entries over signature classes reproduces the lumped chain exactly.
#[test]
fn criterion_07_vector_chain_sums_and_lumping() {
    for (n, k) in [(2, 1), (3, 1), (2, 2), (3, 2), (5, 1)] {
        let table = cyclic(n);
        let raw = chain::build_unlumped(&table, k, &limits()).unwrap();
        let lambda = raw.lambda().clone();
        let vectors = raw.vector_count();
        let mut column_sums = vec![0u64; vectors];
        for sources in raw.rows() {
            assert_eq!(big(sources.len() as u64), lambda, "row sum at n={n} k={k}");
            for &v in sources {
                column_sums[v as usize] += 1;
            }
        }
        assert!(
            column_sums.iter().all(|&s| big(s) == lambda),
            "column sums at n={n} k={k}"
        );
        let matrix = chain::build_transition(&table, k, &limits()).unwrap();
        raw.lumps_to(&matrix).unwrap();
    }
    println!(
        "[PASS] criterion 7: vector chain is doubly balanced and lumps exactly for all five (n, k) pairs"
    );
}

/// Criterion 8 — the weighted table identity: the chain's all-ones count at
/// `step = dimension` equals the sum of per-multiplex table multiplicities
/// over the full enumeration.
#[test]
fn criterion_08_table_counts_match_enumerated_multiplicities() {
    let mut cases: Vec<(String, CayleyTable, usize, usize)> = Vec::new();
    for n in [2usize, 3] {
        for k in [1usize, 2] {
            for dimension in [2usize, 3] {
                cases.push((format!("cyclic-{n}"), cyclic(n), k, dimension));
            }
        }
    }
    cases.push(("cyclic-5".into(), cyclic(5), 1, 3));
    cases.push(("q5".into(), fixture_table("q5.tbl"), 1, 3));

    for (name, table, k, dimension) in &cases {
        let matrix = chain::build_transition(table, *k, &limits()).unwrap();
        let from_chain = ones_count(&matrix, *dimension);
        let mut from_enumeration = BigUint::zero();
        oracle::enumerate_multiplexes(
            table,
            *dimension,
            *k,
            EnumerationMode::Multisets,
            &feasibility(),
            |multiplex| from_enumeration += multiplex.table_multiplicity(),
        )
        .unwrap();
        assert_eq!(
            from_chain, from_enumeration,
            "{name} k={k} dimension={dimension}"
        );
    }
    println!(
        "[PASS] criterion 8: weighted multiplex enumeration reproduces the chain's table counts in all {} cases",
        cases.len()
    );
}

/// Criterion 9 — the structural toolkit: two-step extensions are valid,
/// distinct, and witness the recurrence inequality; closed-form bounds hold;
/// classification tallies are consistent and divisions re-validate.
#[test]
fn criterion_09_extensions_bounds_and_classification() {
    // Extension invariants, from the unique base multiplex in each case.
    let extension_cases = [
        ("cyclic-3", cyclic(3), 1usize, 2usize),
        ("cyclic-2", cyclic(2), 2, 3),
    ];
    for (name, table, k, dimension) in &extension_cases {
        let mut bases = Vec::new();
        oracle::enumerate_multiplexes(
            table,
            *dimension,
            *k,
            EnumerationMode::Sets,
            &feasibility(),
            |multiplex| bases.push(multiplex),
        )
        .unwrap();
        assert_eq!(bases.len(), 1, "{name}: unique base at dimension {dimension}");
        let base = &bases[0];

        let columns = admissible_columns(table.order(), *k);
        let mut extended: HashSet<Vec<SymbolVector>> = HashSet::new();
        for column in &columns {
            let bigger = oracle::extend_multiplex(table, base, column).unwrap();
            assert_eq!(bigger.dimension(), dimension + 2);
            assert_eq!(bigger.k(), *k);
            extended.insert(bigger.rows().to_vec());
        }
        assert_eq!(
            extended.len(),
            columns.len(),
            "{name}: distinct columns give distinct extensions"
        );

        // The recurrence inequality two dimensions up.
        let before =
            oracle::count_multiplexes(table, *dimension, *k, EnumerationMode::Sets, &feasibility())
                .unwrap();
        let after = oracle::count_multiplexes(
            table,
            dimension + 2,
            *k,
            EnumerationMode::Sets,
            &feasibility(),
        )
        .unwrap();
        let lambda = exact::multiset_permutation_count(table.order() as u64, *k as u64);
        assert!(after >= lambda * before, "{name}: recurrence inequality");
    }

    // The same inequality on a case with several base plexes.
    let three = cyclic(3);
    let plexes_dim3 =
        oracle::count_multiplexes(&three, 3, 1, EnumerationMode::Sets, &feasibility()).unwrap();
    let plexes_dim5 =
        oracle::count_multiplexes(&three, 5, 1, EnumerationMode::Sets, &feasibility()).unwrap();
    assert!(plexes_dim5 >= big(6) * &plexes_dim3);

    // Closed-form bounds against full enumerations.
    for (table, k, dimension) in [(cyclic(3), 2usize, 3usize), (cyclic(2), 2, 3), (cyclic(2), 2, 4)]
    {
        let n = table.order();
        let mut total = BigUint::zero();
        let mut plexes = BigUint::zero();
        let mut true_count = BigUint::zero();
        let mut disconnected = BigUint::zero();
        let mut divisible: Vec<Multiplex> = Vec::new();
        let mut indivisible = 0u64;
        oracle::enumerate_multiplexes(
            &table,
            dimension,
            k,
            EnumerationMode::Multisets,
            &feasibility(),
            |multiplex| {
                let class: MultiplexClassification = oracle::classify_multiplex(&multiplex);
                total += 1u32;
                if class.is_plex {
                    plexes += 1u32;
                }
                if class.is_true {
                    true_count += 1u32;
                }
                if !class.connected {
                    disconnected += 1u32;
                }
                if class.divisible {
                    divisible.push(multiplex);
                } else {
                    indivisible += 1;
                }
            },
        )
        .unwrap();

        // Tally consistency: a multiplex is a plex or true, never both.
        assert_eq!(&plexes + &true_count, total, "plex + true = total");

        let bounds = oracle::count_bounds(n, dimension, k, Some(1)).unwrap();
        assert!(total <= bounds.total, "total bound at n={n} dim={dimension}");
        assert!(
            true_count <= bounds.true_multiplexes.unwrap(),
            "true bound at n={n} dim={dimension}"
        );
        assert!(
            disconnected <= bounds.disconnected.unwrap(),
            "disconnected bound at n={n} dim={dimension}"
        );
        // k beyond the hyperplane support kills all plexes.
        if big(k as u64) > bounds.plex_threshold {
            assert!(plexes.is_zero(), "threshold at n={n} dim={dimension}");
        }

        // Every divisible multiplex decomposes into parts that re-validate
        // and merge back to the original.
        assert!(indivisible > 0 || !divisible.is_empty());
        for multiplex in &divisible {
            let (left, right) = oracle::find_division(&table, multiplex)
                .unwrap()
                .expect("a divisible multiplex must split");
            assert_eq!(left.k() + right.k(), k);
            Multiplex::new(&table, left.k(), left.rows().to_vec()).unwrap();
            Multiplex::new(&table, right.k(), right.rows().to_vec()).unwrap();
            let mut merged: Vec<SymbolVector> = left.rows().to_vec();
            merged.extend_from_slice(right.rows());
            merged.sort();
            assert_eq!(merged.as_slice(), multiplex.rows(), "parts merge back");
        }
    }

    // An infeasible k admits no plex at all, matching the threshold.
    let too_many =
        oracle::count_multiplexes(&cyclic(2), 3, 3, EnumerationMode::Sets, &feasibility())
            .unwrap();
    assert!(too_many.is_zero());

    println!(
        "[PASS] criterion 9: extensions, recurrence inequality, closed-form bounds, and classification all consistent"
    );
}

/// Criterion 10 — partial counts: full-length partial multiplexes are
/// exactly the full multiplexes, the partial chain matches the partial
/// oracle, and the full-length partial constant is the full constant.
#[test]
fn criterion_10_partial_counts_agree_across_routes() {
    // l = n collapses to the full count.
    for (table, k, dimension) in [(cyclic(3), 1usize, 3usize), (cyclic(3), 2, 2), (cyclic(2), 2, 3)]
    {
        let n = table.order();
        let full = oracle::count_multiplexes(
            &table,
            dimension,
            k,
            EnumerationMode::Multisets,
            &feasibility(),
        )
        .unwrap();
        let partial =
            oracle::count_partial_multiplexes(&table, dimension, k, n, &feasibility()).unwrap();
        assert_eq!(full, partial, "n={n} k={k} dimension={dimension}");
    }

    // Partial chain vs partial oracle.
    let three = cyclic(3);
    for length in [1usize, 2] {
        let matrix = chain::build_partial_transition(&three, 1, length, &limits()).unwrap();
        for dimension in [3usize, 4] {
            let derived = chain::derived_counts(&matrix, dimension - 1).unwrap();
            let counted =
                oracle::count_partial_multiplexes(&three, dimension, 1, length, &feasibility())
                    .unwrap();
            assert_eq!(
                derived.transversals.unwrap(),
                counted,
                "length {length} dimension {dimension}"
            );
        }
    }

    // Full-length partial constant equals the full constant.
    let full = spectral::limit_constant(&three, 1, &limits()).unwrap();
    let partial = spectral::partial_limit_constant(&three, 1, 3, &limits()).unwrap();
    assert_eq!(full.value, partial.value);
    assert_eq!(full.subsequence, partial.subsequence);

    println!("[PASS] criterion 10: partial and full routes agree on counts and constants");
}

/// Criterion 11 — positivity pattern of the all-ones counts: every even
/// step up to 12 is positive on every valid table, and once an odd step is
/// positive it stays positive.
#[test]
fn criterion_11_all_ones_counts_positive_by_parity() {
    let tables = [
        ("cyclic-2", cyclic(2)),
        ("cyclic-3", cyclic(3)),
        ("cyclic-4", cyclic(4)),
        ("cyclic-5", cyclic(5)),
        ("klein", CayleyTable::klein()),
        ("q5", fixture_table("q5.tbl")),
    ];
    for (name, table) in &tables {
        let matrix = full_matrix(table);
        let ones = matrix.all_ones_index();
        let sequence = chain::count_sequence(&matrix, 12).unwrap();
        let positive: Vec<bool> = sequence
            .iter()
            .map(|counts| !counts.values[ones].is_zero())
            .collect();
        for m in (2..=12).step_by(2) {
            assert!(positive[m - 1], "{name}: even step {m} must be positive");
        }
        let first_odd = (1..=11).step_by(2).find(|&m| positive[m - 1]);
        if let Some(first) = first_odd {
            for m in (first..=11).step_by(2) {
                assert!(
                    positive[m - 1],
                    "{name}: odd step {m} must stay positive after {first}"
                );
            }
        }
    }
    println!(
        "[PASS] criterion 11: all-ones counts are positive at every even step to 12 and persist on odd steps"
    );
}

/// Criterion 12 — convergence: on the three aperiodic order-3/5 chains the
/// normalized deviation strictly shrinks two steps apart, for m = 4..=10.
#[test]
fn criterion_12_deviations_shrink_two_steps_apart() {
    let tables = [
        ("cyclic-3", cyclic(3)),
        ("cyclic-5", cyclic(5)),
        ("q5", fixture_table("q5.tbl")),
    ];
    for (name, table) in &tables {
        let matrix = full_matrix(table);
        let report = spectral::sequence_report(&matrix, 11).unwrap();
        for m in 4..=10usize {
            let here = &report.rows[m - 2];
            let two_later = &report.rows[m];
            assert_eq!(here.depth, m - 1);
            assert_eq!(two_later.depth, m + 1);
            assert!(
                two_later.deviation < here.deviation,
                "{name}: deviation must shrink from step {m} to {}",
                m + 2
            );
        }
    }
    println!(
        "[PASS] criterion 12: normalized deviations strictly shrink two steps apart on all three chains"
    );
}
