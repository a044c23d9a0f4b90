//! Derive the constants governing transversal growth: the ratios
//! `T(d)/λ^(d-1)` converge (along all depths, or along one parity), and the
//! limit is an exact rational computed from the dominant eigenvector of the
//! signature chain.

use std::error::Error;
use std::fs;
use std::path::PathBuf;

use iterplex::chain::ChainLimits;
use iterplex::spectral;
use iterplex::CayleyTable;

fn main() -> Result<(), Box<dyn Error>> {
    let q5_path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/q5.tbl");
    let tables = [
        ("cyclic-2", CayleyTable::cyclic(2).unwrap()),
        ("cyclic-3", CayleyTable::cyclic(3).unwrap()),
        ("cyclic-4", CayleyTable::cyclic(4).unwrap()),
        ("klein", CayleyTable::klein()),
        ("cyclic-5", CayleyTable::cyclic(5).unwrap()),
        ("q5", CayleyTable::parse(&fs::read_to_string(&q5_path)?)?),
    ];
    let limits = ChainLimits::default();

    println!(
        "{:<9} {:>9} {:>14} {:<12} period  closed class",
        "table", "c", "decimal", "subsequence"
    );
    for (name, table) in &tables {
        let constant = spectral::limit_constant(table, 1, &limits)?;
        println!(
            "{name:<9} {:>9} {:>14} {:<12} {:>6}  {:>12}",
            constant.value,
            constant.decimal,
            constant.subsequence.to_string(),
            constant.period,
            constant.scc_size
        );
    }

    // For k >= 2 the count can be normalized per set or per multiset; both
    // conventions are reported.
    let two_plex = spectral::limit_constant(&CayleyTable::cyclic(3).unwrap(), 2, &limits)?;
    println!();
    println!("2-plexes of cyclic-3:");
    println!("  per-set constant      {} ({})", two_plex.value, two_plex.decimal);
    let alternate = two_plex.alternate.unwrap();
    println!("  per-multiset constant {alternate}");

    // The convergence is visible in the deviation column of a report.
    let matrix = iterplex::chain::build_transition(&tables[1].1, 1, &limits)?;
    let report = spectral::sequence_report(&matrix, 8)?;
    println!();
    println!("cyclic-3 convergence toward x = {}:", report.limit);
    for row in &report.rows {
        println!(
            "  depth {:>2}  transversals {:>12}  deviation {}",
            row.depth,
            row.transversals.clone().unwrap(),
            row.deviation
        );
    }
    Ok(())
}
