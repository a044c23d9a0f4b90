//! Closed-form reference counts for the smallest groups.
//!
//! The transversal counts of iterated tables built from the four groups of
//! order up to 4 obey exact closed forms in the depth. They provide an
//! independent yardstick for both counting routes: the backtracking oracle
//! and the signature-chain recurrence.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::algebra::CayleyTable;

/// The groups with known closed-form transversal counts.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum SmallGroup {
    Cyclic2,
    Cyclic3,
    Cyclic4,
    Klein,
}

impl SmallGroup {
    pub const ALL: [SmallGroup; 4] = [
        SmallGroup::Cyclic2,
        SmallGroup::Cyclic3,
        SmallGroup::Cyclic4,
        SmallGroup::Klein,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SmallGroup::Cyclic2 => "cyclic-2",
            SmallGroup::Cyclic3 => "cyclic-3",
            SmallGroup::Cyclic4 => "cyclic-4",
            SmallGroup::Klein => "klein",
        }
    }

    pub fn table(self) -> CayleyTable {
        match self {
            SmallGroup::Cyclic2 => CayleyTable::cyclic(2).unwrap(),
            SmallGroup::Cyclic3 => CayleyTable::cyclic(3).unwrap(),
            SmallGroup::Cyclic4 => CayleyTable::cyclic(4).unwrap(),
            SmallGroup::Klein => CayleyTable::klein(),
        }
    }
}

fn ratio(numerator: i64, denominator: i64) -> BigRational {
    BigRational::new(numerator.into(), denominator.into())
}

fn power(base: i64, exponent: i64) -> BigRational {
    BigRational::from_integer(base.into()).pow(
        i32::try_from(exponent).expect("depth fits easily within i32"),
    )
}

/// Exact closed-form count of transversals of the `depth`-iterated table.
///
/// The even- and odd-depth branches differ; at depth 1 every form evaluates
/// to 1 (a 2-dimensional table is a permutation matrix and carries exactly
/// one transversal). The rational arithmetic keeps the small-depth negative
/// exponents exact.
pub fn transversal_closed_form(group: SmallGroup, depth: usize) -> BigUint {
    assert!(depth >= 1, "the closed forms start at depth 1");
    let d = depth as i64;
    let even = depth.is_multiple_of(2);
    let value: BigRational = match (group, even) {
        (SmallGroup::Cyclic2, true) => BigRational::zero(),
        (SmallGroup::Cyclic2, false) => power(2, d - 1),
        (SmallGroup::Cyclic3, _) => {
            let main = ratio(2, 3) * power(6, d - 1);
            let swing = power(3, d - 2);
            if even {
                main - swing
            } else {
                main + swing
            }
        }
        (SmallGroup::Cyclic4, true) => BigRational::zero(),
        (SmallGroup::Cyclic4, false) | (SmallGroup::Klein, false) => {
            ratio(3, 8) * power(24, d - 1) + ratio(5, 1) * power(8, d - 2)
        }
        (SmallGroup::Klein, true) => ratio(3, 8) * power(24, d - 1) - power(8, d - 2),
    };
    assert!(value.is_integer() && !value.is_negative());
    value
        .to_integer()
        .to_biguint()
        .expect("count is nonnegative")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{self, Feasibility};

    #[test]
    fn small_depths_match_the_frozen_counts() {
        let expect = |g, d, v: u64| {
            assert_eq!(transversal_closed_form(g, d), BigUint::from(v), "{g:?} d={d}");
        };
        for group in SmallGroup::ALL {
            expect(group, 1, 1);
        }
        expect(SmallGroup::Cyclic2, 2, 0);
        expect(SmallGroup::Cyclic3, 2, 3);
        expect(SmallGroup::Cyclic4, 2, 0);
        expect(SmallGroup::Klein, 2, 8);
        expect(SmallGroup::Cyclic2, 3, 4);
        expect(SmallGroup::Cyclic3, 3, 27);
        expect(SmallGroup::Cyclic4, 3, 256);
        expect(SmallGroup::Klein, 3, 256);
        expect(SmallGroup::Cyclic2, 5, 16);
    }

    #[test]
    fn closed_forms_agree_with_the_oracle() {
        for group in SmallGroup::ALL {
            let table = group.table();
            for depth in 1..=3 {
                let counted =
                    oracle::count_transversals(&table, depth, &Feasibility::default()).unwrap();
                assert_eq!(
                    counted,
                    transversal_closed_form(group, depth),
                    "{group:?} depth {depth}"
                );
            }
        }
    }
}
