//! Exact rational eigen-analysis of the signature chain.
//!
//! The step matrix restricted to the closed class of the all-ones state has
//! the column count λ as its Perron eigenvalue (row sums are constant). The
//! normalized counts `x(m) = l(m)/λ^m` therefore converge — along every
//! depth, or along one parity class when the chain has period 2 — to a
//! profile χ solving `A·χ = λ·χ` (or `A²·χ = λ²·χ` on the even-level part).
//! All arithmetic is exact: the kernel is found by rational elimination, the
//! limits and constants are rationals, and decimal strings are display-only.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::algebra::CayleyTable;
use crate::chain::{
    self, ChainError, ChainLimits, LumpedMatrix, Reachability, Subsequence, TransitionMatrix,
};
use crate::exact;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("the eigenspace at the dominant eigenvalue has dimension {dimension}, expected 1")]
    KernelDimensionNotOne { dimension: usize },
    #[error("the column count is not an eigenvalue of the restricted step matrix")]
    LambdaNotEigenvalue,
    #[error(
        "start states of both parities feed a period-2 chain; the normalized counts have two \
         subsequential limits and no single constant"
    )]
    MixedParity,
}

/// The dominant profile χ of a step matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Eigenvector {
    /// State indices carrying the profile: the whole closed class of the
    /// all-ones state for period 1, its even-level part for period 2.
    pub support: Vec<usize>,
    /// Strictly positive values per support state, scaled so that
    /// `Σ class_size(s)·χ_s = 1`.
    pub values: Vec<BigRational>,
}

impl Eigenvector {
    /// The profile value at a state, zero off the support.
    pub fn value_at(&self, state: usize) -> BigRational {
        match self.support.binary_search(&state) {
            Ok(i) => self.values[i].clone(),
            Err(_) => BigRational::zero(),
        }
    }
}

fn big_ratio(n: &BigUint) -> BigRational {
    BigRational::from_integer(n.clone().into())
}

/// Divide a row through by the gcd of its entries, when that saves anything.
fn reduce_row(row: &mut [BigInt]) {
    let mut content = BigInt::zero();
    for cell in row.iter() {
        if !cell.is_zero() {
            content = content.gcd(cell);
            if content.is_one() {
                return;
            }
        }
    }
    if content.is_zero() {
        return;
    }
    for cell in row.iter_mut() {
        *cell = &*cell / &content;
    }
}

/// Exact kernel basis of a square rational matrix, via fraction-free
/// Gauss–Jordan elimination over the integers (each row kept gcd-reduced, so
/// entries stay near determinant size instead of paying a rational
/// normalization per cell). Rows are equations; the basis spans
/// `{x : M·x = 0}`, one vector per free column with a one at that column —
/// the reduced-echelon convention.
fn kernel_basis(rows: Vec<Vec<BigRational>>) -> Vec<Vec<BigRational>> {
    let nrows = rows.len();
    let ncols = if nrows == 0 { return vec![] } else { rows[0].len() };
    // Row operations preserve the kernel, so denominators can be cleared up
    // front.
    let mut work: Vec<Vec<BigInt>> = rows
        .into_iter()
        .map(|row| {
            let common = row
                .iter()
                .fold(BigInt::one(), |acc, cell| acc.lcm(cell.denom()));
            let mut cleared: Vec<BigInt> = row
                .iter()
                .map(|cell| cell.numer() * (&common / cell.denom()))
                .collect();
            reduce_row(&mut cleared);
            cleared
        })
        .collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut rank = 0usize;
    for col in 0..ncols {
        let Some(pivot_row) = (rank..nrows).find(|&i| !work[i][col].is_zero()) else {
            continue;
        };
        work.swap(rank, pivot_row);
        let pivot = work[rank].clone();
        for (i, row) in work.iter_mut().enumerate() {
            if i != rank && !row[col].is_zero() {
                let factor = row[col].clone();
                // row ← pivot_value·row − factor·pivot keeps everything
                // integral; the pivot row is zero left of its column, so
                // earlier columns only rescale (zeros stay zeros).
                for (cell, p) in row.iter_mut().zip(&pivot) {
                    *cell = &*cell * &pivot[col] - &factor * p;
                }
                reduce_row(row);
            }
        }
        pivots.push((rank, col));
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let mut basis = Vec::new();
    for free in 0..ncols {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut vector = vec![BigRational::zero(); ncols];
        vector[free] = BigRational::one();
        for &(row, col) in &pivots {
            if !work[row][free].is_zero() {
                vector[col] =
                    BigRational::new(-work[row][free].clone(), work[row][col].clone());
            }
        }
        basis.push(vector);
    }
    basis
}

/// Solve for the dominant profile on the closed class of the all-ones state.
pub fn dominant_eigenvector(
    matrix: &TransitionMatrix,
    reach: &Reachability,
) -> Result<Eigenvector, SpectralError> {
    let scc = &reach.scc;
    let m = matrix.state_count();

    // The closed class admits no outflow; anything else breaks both the
    // restricted recurrence and the left-eigenvector normalization.
    for &t in scc {
        for s in 0..m {
            if !reach.in_scc[s] && !matrix.entry(s, t).is_zero() {
                return Err(ChainError::Structure(format!(
                    "mass escapes the closed class: {:?} feeds {:?}",
                    matrix.state(t),
                    matrix.state(s)
                ))
                .into());
            }
        }
    }

    let r = scc.len();
    let restricted: Vec<Vec<BigUint>> = scc
        .iter()
        .map(|&s| scc.iter().map(|&t| matrix.entry(s, t).clone()).collect())
        .collect();

    // Period 2: square the restriction and keep the even-level part, where
    // the all-ones state lives and the squared chain is aperiodic.
    let (support_in_scc, working, eigenvalue): (Vec<usize>, Vec<Vec<BigUint>>, BigRational) =
        if reach.period == 1 {
            (
                (0..r).collect(),
                restricted,
                big_ratio(matrix.lambda()),
            )
        } else {
            let part: Vec<usize> = (0..r)
                .filter(|&i| reach.levels[scc[i]].unwrap().is_multiple_of(2))
                .collect();
            let squared: Vec<Vec<BigUint>> = part
                .iter()
                .map(|&i| {
                    part.iter()
                        .map(|&j| {
                            let mut acc = BigUint::zero();
                            for (u, step_in) in restricted[i].iter().enumerate() {
                                if !step_in.is_zero() && !restricted[u][j].is_zero() {
                                    acc += step_in * &restricted[u][j];
                                }
                            }
                            acc
                        })
                        .collect()
                })
                .collect();
            let lambda = big_ratio(matrix.lambda());
            (part, squared, &lambda * &lambda)
        };

    let size = support_in_scc.len();
    let mut shifted: Vec<Vec<BigRational>> = (0..size)
        .map(|i| {
            (0..size)
                .map(|j| {
                    let mut value = big_ratio(&working[i][j]);
                    if i == j {
                        value -= &eigenvalue;
                    }
                    value
                })
                .collect()
        })
        .collect();
    // Rows and columns are already in ascending state order.
    let basis = kernel_basis(std::mem::take(&mut shifted));
    match basis.len() {
        0 => return Err(SpectralError::LambdaNotEigenvalue),
        1 => {}
        dimension => return Err(SpectralError::KernelDimensionNotOne { dimension }),
    }
    let mut values = basis.into_iter().next().unwrap();
    if values.iter().any(|v| v.is_negative()) {
        for v in values.iter_mut() {
            *v = -v.clone();
        }
    }
    assert!(
        values.iter().all(|v| v.is_positive()),
        "the dominant profile of an irreducible restriction must be strictly positive"
    );

    let support: Vec<usize> = support_in_scc.iter().map(|&i| scc[i]).collect();
    let total: BigRational = support
        .iter()
        .zip(&values)
        .map(|(&s, v)| big_ratio(&matrix.class_size(s)) * v)
        .sum();
    let scale = total.recip();
    for v in values.iter_mut() {
        *v = &*v * &scale;
    }
    Ok(Eigenvector { support, values })
}

/// A limit constant with its provenance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LimitConstant {
    /// The constant under the adopted normalization: weighted table counts
    /// divided by `(k·length)!` per counted multiplex.
    pub value: BigRational,
    /// For `k ≥ 2` only: the same constant under the multiset-permutation
    /// normalization (differs by the factor `k!^length`).
    pub alternate: Option<BigRational>,
    /// Limit of the normalized count `x(m) = l_ones(m)/λ^m` over the
    /// positive subsequence.
    pub normalized_limit: BigRational,
    pub subsequence: Subsequence,
    pub period: usize,
    pub scc_size: usize,
    pub lambda: BigUint,
    pub k: usize,
    pub length: usize,
    pub fingerprint: String,
    /// 12-significant-digit rendering of `value`; display-only.
    pub decimal: String,
}

/// Compute the limit constant of a built step matrix (full or partial).
pub fn constant_from_matrix(matrix: &TransitionMatrix) -> Result<LimitConstant, SpectralError> {
    let reach = chain::reachability_and_period(matrix)?;
    if reach.period == 2 && reach.start_parities.len() == 2 {
        return Err(SpectralError::MixedParity);
    }
    let eigen = dominant_eigenvector(matrix, &reach)?;
    let profile_at_ones = eigen.value_at(matrix.all_ones_index());
    assert!(
        profile_at_ones.is_positive(),
        "the all-ones state always belongs to the solved part"
    );
    let start_mass: BigRational = matrix
        .start_indices()
        .iter()
        .filter(|&&b| reach.in_scc[b])
        .map(|&b| big_ratio(&matrix.class_size(b)))
        .sum();
    let lambda = big_ratio(matrix.lambda());
    let normalized_limit = &profile_at_ones * &start_mass / &lambda;
    let per_set = exact::factorial((matrix.k() * matrix.length()) as u64);
    let value = &lambda * &start_mass * &profile_at_ones / big_ratio(&per_set);
    assert!(value.is_positive());
    let alternate = (matrix.k() >= 2).then(|| {
        let k_factorials = exact::factorial(matrix.k() as u64).pow(matrix.length() as u32);
        &value * &big_ratio(&k_factorials)
    });
    let decimal = decimal_string(&value, 12);
    Ok(LimitConstant {
        value,
        alternate,
        normalized_limit,
        subsequence: reach.subsequence,
        period: reach.period,
        scc_size: reach.scc.len(),
        lambda: matrix.lambda().clone(),
        k: matrix.k(),
        length: matrix.length(),
        fingerprint: matrix.fingerprint().to_string(),
        decimal,
    })
}

/// The limit constant governing full multiplex counts at multiplicity `k`.
pub fn limit_constant(
    table: &CayleyTable,
    k: usize,
    limits: &ChainLimits,
) -> Result<LimitConstant, SpectralError> {
    constant_from_matrix(&chain::build_transition(table, k, limits)?)
}

/// The limit constant for partial multiplexes of a given length.
pub fn partial_limit_constant(
    table: &CayleyTable,
    k: usize,
    length: usize,
    limits: &ChainLimits,
) -> Result<LimitConstant, SpectralError> {
    constant_from_matrix(&chain::build_partial_transition(table, k, length, limits)?)
}

/// One depth of the convergence diagnostics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceRow {
    pub depth: usize,
    /// Tables with all-ones product at this depth: `l_ones(depth + 1)`.
    pub tables: BigUint,
    /// Exact set count for `k = 1` chains.
    pub transversals: Option<BigUint>,
    /// `x(m) = l_ones(m)/λ^m` at `m = depth + 1`.
    pub normalized: BigRational,
    /// `|x(m) − limit|`, exact.
    pub deviation: BigRational,
}

/// Exact convergence diagnostics for depths `1..=max_depth`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceReport {
    pub limit: BigRational,
    pub subsequence: Subsequence,
    pub rows: Vec<SequenceRow>,
}

pub fn sequence_report(
    matrix: &TransitionMatrix,
    max_depth: usize,
) -> Result<SequenceReport, SpectralError> {
    if max_depth == 0 {
        return Err(ChainError::ArgumentOutOfRange {
            argument: "depth",
            reason: "must be at least 1".into(),
        }
        .into());
    }
    let constant = constant_from_matrix(matrix)?;
    let counts = chain::count_sequence(matrix, max_depth + 1)?;
    let ones = matrix.all_ones_index();
    let set_divisor = exact::factorial(matrix.length() as u64);
    let mut lambda_power = big_ratio(matrix.lambda());
    let mut rows = Vec::with_capacity(max_depth);
    for counts_at_step in &counts[1..] {
        lambda_power = &lambda_power * &big_ratio(matrix.lambda());
        let tables = counts_at_step.values[ones].clone();
        let transversals = (matrix.k() == 1).then(|| exact::exact_div(tables.clone(), &set_divisor));
        let normalized = big_ratio(&tables) / &lambda_power;
        let deviation = (&normalized - &constant.normalized_limit).abs();
        rows.push(SequenceRow {
            depth: counts_at_step.step - 1,
            tables,
            transversals,
            normalized,
            deviation,
        });
    }
    Ok(SequenceReport {
        limit: constant.normalized_limit,
        subsequence: constant.subsequence,
        rows,
    })
}

/// Aggregate a profile over the blocks of a verified lumping:
/// `Σ class_size(s)·χ_s` per block.
pub fn aggregate_eigenvector(
    matrix: &TransitionMatrix,
    eigen: &Eigenvector,
    lumped: &LumpedMatrix,
) -> Vec<BigRational> {
    lumped
        .blocks
        .iter()
        .map(|members| {
            members
                .iter()
                .map(|&s| big_ratio(&matrix.class_size(s)) * eigen.value_at(s))
                .sum()
        })
        .collect()
}

/// Positional decimal rendering with `significant` significant digits,
/// trailing zeros trimmed; display-only.
pub fn decimal_string(value: &BigRational, significant: usize) -> String {
    assert!(significant >= 1);
    if value.is_zero() {
        return "0".into();
    }
    let numerator = value.numer().magnitude();
    let denominator = value.denom().magnitude();
    let digit_count = |x: &BigUint| x.to_string().len() as i64;
    let mut shift = significant as i64 - (digit_count(numerator) - digit_count(denominator));
    let (digits, exponent) = loop {
        let ten = BigUint::from(10u32);
        let (num, den) = if shift >= 0 {
            (numerator * ten.pow(shift as u32), denominator.clone())
        } else {
            (numerator.clone(), denominator * ten.pow((-shift) as u32))
        };
        let (quotient, remainder) = num_integer::Integer::div_rem(&num, &den);
        let rounded = if &remainder * 2u32 >= den {
            quotient + 1u32
        } else {
            quotient
        };
        let rendered = rounded.to_string();
        let len = rendered.len() as i64;
        if len != significant as i64 {
            shift += significant as i64 - len;
            continue;
        }
        break (rendered, significant as i64 - 1 - shift);
    };
    let mut out = String::new();
    if value.is_negative() {
        out.push('-');
    }
    if exponent >= significant as i64 {
        out.push_str(&digits);
        out.push_str(&"0".repeat((exponent + 1 - significant as i64) as usize));
    } else if exponent >= 0 {
        let split = (exponent + 1) as usize;
        out.push_str(&digits[..split]);
        let fraction = digits[split..].trim_end_matches('0');
        if !fraction.is_empty() {
            out.push('.');
            out.push_str(fraction);
        }
    } else {
        out.push_str("0.");
        out.push_str(&"0".repeat((-exponent - 1) as usize));
        out.push_str(digits.trim_end_matches('0'));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::CayleyTable;

    fn rational(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn constant_of(table: &CayleyTable, k: usize) -> LimitConstant {
        limit_constant(table, k, &ChainLimits::default()).unwrap()
    }

    #[test]
    fn two_element_profile_solves_the_squared_chain() {
        let table = CayleyTable::cyclic(2).unwrap();
        let matrix = chain::build_transition(&table, 1, &ChainLimits::default()).unwrap();
        let reach = chain::reachability_and_period(&matrix).unwrap();
        assert_eq!(reach.period, 2);
        let eigen = dominant_eigenvector(&matrix, &reach).unwrap();
        // Even-level part: the all-ones signature and the all-twos signature.
        assert_eq!(eigen.support.len(), 2);
        assert_eq!(eigen.values, vec![rational(1, 2), rational(1, 2)]);
        let constant = constant_of(&table, 1);
        assert_eq!(constant.value, rational(1, 1));
        assert_eq!(constant.subsequence, Subsequence::OddDepthsOnly);
        assert_eq!(constant.decimal, "1");
    }

    #[test]
    fn group_constants_match_the_known_values() {
        let z3 = constant_of(&CayleyTable::cyclic(3).unwrap(), 1);
        assert_eq!(z3.value, rational(2, 3));
        assert_eq!(z3.subsequence, Subsequence::AllDepths);
        assert_eq!(z3.decimal, "0.666666666667");

        let z4 = constant_of(&CayleyTable::cyclic(4).unwrap(), 1);
        assert_eq!(z4.value, rational(3, 8));
        assert_eq!(z4.subsequence, Subsequence::OddDepthsOnly);

        let klein = constant_of(&CayleyTable::klein(), 1);
        assert_eq!(klein.value, rational(3, 8));
        assert_eq!(klein.subsequence, Subsequence::AllDepths);

        let z5 = constant_of(&CayleyTable::cyclic(5).unwrap(), 1);
        assert_eq!(z5.value, rational(24, 125));
        assert_eq!(z5.decimal, "0.192");
        assert_eq!(z5.scc_size, 26);
    }

    #[test]
    fn group_profiles_are_uniform_on_the_closed_class() {
        // For these tables the raw chain's closed class is a union of whole
        // signature classes, so the profile is flat: 1 over the class size.
        for table in [
            CayleyTable::cyclic(2).unwrap(),
            CayleyTable::cyclic(3).unwrap(),
            CayleyTable::cyclic(4).unwrap(),
            CayleyTable::cyclic(5).unwrap(),
            CayleyTable::klein(),
        ] {
            let matrix = chain::build_transition(&table, 1, &ChainLimits::default()).unwrap();
            let reach = chain::reachability_and_period(&matrix).unwrap();
            let eigen = dominant_eigenvector(&matrix, &reach).unwrap();
            let total: BigRational = eigen
                .support
                .iter()
                .map(|&s| big_ratio(&matrix.class_size(s)))
                .sum();
            let flat = total.recip();
            assert!(
                eigen.values.iter().all(|v| v == &flat),
                "profile must be uniform for {}",
                matrix.fingerprint()
            );
        }
    }

    #[test]
    fn partial_constant_of_length_one_is_the_order() {
        // One-symbol columns: counts are n^(D−1), so the constant under the
        // λ^(D−2) normalization is exactly n.
        let table = CayleyTable::cyclic(2).unwrap();
        let constant =
            partial_limit_constant(&table, 1, 1, &ChainLimits::default()).unwrap();
        assert_eq!(constant.value, rational(2, 1));
        assert_eq!(constant.period, 1);
    }

    #[test]
    fn full_length_partial_constant_equals_the_full_constant() {
        for table in [CayleyTable::cyclic(3).unwrap(), CayleyTable::cyclic(4).unwrap()] {
            let n = table.order();
            let full = constant_of(&table, 1);
            let partial =
                partial_limit_constant(&table, 1, n, &ChainLimits::default()).unwrap();
            assert_eq!(full.value, partial.value);
            assert_eq!(full.subsequence, partial.subsequence);
        }
    }

    #[test]
    fn deviations_shrink_two_steps_apart() {
        let table = CayleyTable::cyclic(3).unwrap();
        let matrix = chain::build_transition(&table, 1, &ChainLimits::default()).unwrap();
        let report = sequence_report(&matrix, 9).unwrap();
        assert_eq!(report.limit, rational(1, 9));
        for m in 4..=7 {
            let now = &report.rows[m - 1].deviation;
            let later = &report.rows[m + 1].deviation;
            assert!(later < now, "deviation must shrink from depth {m}");
        }
    }

    #[test]
    fn two_plex_constant_carries_both_conventions() {
        let table = CayleyTable::cyclic(2).unwrap();
        let constant = constant_of(&table, 2);
        assert_eq!(
            constant.alternate,
            Some(&constant.value * &rational(4, 1)),
            "the alternate convention differs by k!^n = 4"
        );
        assert!(constant.value.is_positive());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal_string(&rational(2, 3), 12), "0.666666666667");
        assert_eq!(decimal_string(&rational(24, 125), 12), "0.192");
        assert_eq!(decimal_string(&rational(1, 1), 12), "1");
        assert_eq!(decimal_string(&rational(-7, 2), 12), "-3.5");
        assert_eq!(decimal_string(&rational(1, 3000), 12), "0.000333333333333");
        assert_eq!(decimal_string(&rational(10_000, 1), 3), "10000");
        assert_eq!(decimal_string(&BigRational::zero(), 12), "0");
        assert_eq!(decimal_string(&rational(9999, 10), 3), "1000");
    }

    #[test]
    fn kernel_solver_finds_the_nullspace() {
        // Rank-2 3×3 system with kernel spanned by (1, 1, 1).
        let rows = vec![
            vec![rational(1, 1), rational(-2, 1), rational(1, 1)],
            vec![rational(0, 1), rational(3, 1), rational(-3, 1)],
            vec![rational(1, 1), rational(1, 1), rational(-2, 1)],
        ];
        let basis = kernel_basis(rows);
        assert_eq!(basis.len(), 1);
        let v = &basis[0];
        assert_eq!(v[0], v[2]);
        assert_eq!(v[1], v[2]);
        assert!(!v[2].is_zero());
    }
}
