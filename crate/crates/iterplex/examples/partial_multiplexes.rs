//! Partial multiplexes fill only `l` of the `n` symbol classes. Their counts
//! come from the same two routes — backtracking and a length-`l` signature
//! chain — and carry their own limit constants.

use iterplex::chain::{self, ChainLimits};
use iterplex::oracle::{self, Feasibility};
use iterplex::spectral;
use iterplex::CayleyTable;

fn main() {
    let table = CayleyTable::cyclic(3).unwrap();
    let feasibility = Feasibility::default();
    let limits = ChainLimits::default();

    println!("partial transversals of iterated cyclic-3 (k = 1)");
    println!("{:>7} {:>6} {:>14} {:>14}", "length", "depth", "backtracking", "recurrence");
    for length in 1..=table.order() {
        let matrix = chain::build_partial_transition(&table, 1, length, &limits).unwrap();
        for depth in [2usize, 3] {
            let counted =
                oracle::count_partial_multiplexes(&table, depth + 1, 1, length, &feasibility)
                    .unwrap();
            let derived = chain::derived_counts(&matrix, depth).unwrap();
            let from_chain = derived.transversals.unwrap();
            assert_eq!(counted, from_chain);
            println!("{length:>7} {depth:>6} {counted:>14} {from_chain:>14}");
        }
    }

    // Full length is no longer partial: the counts and the constant both
    // collapse to the ordinary transversal ones.
    let full = spectral::limit_constant(&table, 1, &limits).unwrap();
    let partial = spectral::partial_limit_constant(&table, 1, table.order(), &limits).unwrap();
    assert_eq!(full.value, partial.value);
    println!();
    println!("length-3 partial constant equals the full constant: {}", full.value);

    // Shorter lengths grow strictly faster than full transversals.
    for length in 1..table.order() {
        let constant = spectral::partial_limit_constant(&table, 1, length, &limits).unwrap();
        println!(
            "length-{length} partial constant: {} ({})",
            constant.value, constant.decimal
        );
    }
}
