//! Compare the signature recurrence against the closed-form transversal
//! counts known for the four smallest groups, across a sweep of depths.

use iterplex::chain::{self, ChainLimits};
use iterplex::reference::{transversal_closed_form, SmallGroup};

fn main() {
    let limits = ChainLimits::default();
    println!("{:<9} {:>5} {:>16} {:>16}  verdict", "group", "depth", "recurrence", "closed form");
    for group in SmallGroup::ALL {
        let matrix = chain::build_transition(&group.table(), 1, &limits).unwrap();
        for depth in 1..=8 {
            let from_chain = chain::derived_counts(&matrix, depth)
                .unwrap()
                .transversals
                .unwrap();
            let from_formula = transversal_closed_form(group, depth);
            let verdict = if from_chain == from_formula { "EQUAL" } else { "DIFFER" };
            println!(
                "{:<9} {depth:>5} {from_chain:>16} {from_formula:>16}  {verdict}",
                group.label()
            );
            assert_eq!(from_chain, from_formula);
        }
    }
}
