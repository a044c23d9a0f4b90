//! Count transversals of iterated quasigroups two independent ways — by
//! exhaustive backtracking and by the signature recurrence — and watch the
//! numbers agree, depth by depth.

use iterplex::chain::{self, ChainLimits};
use iterplex::oracle::{self, Feasibility};
use iterplex::CayleyTable;

fn main() {
    let tables = [
        ("cyclic-4", CayleyTable::cyclic(4).unwrap()),
        ("klein", CayleyTable::klein()),
        ("cyclic-5", CayleyTable::cyclic(5).unwrap()),
    ];
    let feasibility = Feasibility::default();
    let limits = ChainLimits::default();

    println!("{:<10} {:>5} {:>14} {:>14}", "table", "depth", "backtracking", "recurrence");
    for (name, table) in &tables {
        let matrix = chain::build_transition(table, 1, &limits).unwrap();
        let max_depth = if table.order() <= 4 { 4 } else { 3 };
        for depth in 1..=max_depth {
            let counted = oracle::count_transversals(table, depth, &feasibility).unwrap();
            let derived = chain::derived_counts(&matrix, depth).unwrap();
            let from_chain = derived.transversals.unwrap();
            assert_eq!(counted, from_chain);
            println!("{name:<10} {depth:>5} {counted:>14} {from_chain:>14}");
        }
        // The recurrence alone reaches far beyond the backtracking horizon.
        let deep = chain::derived_counts(&matrix, 12).unwrap();
        println!(
            "{name:<10} {:>5} {:>14} {:>14}",
            12,
            "-",
            deep.transversals.unwrap()
        );
    }
}
