//! Verify that a hand-named partition of the chain's states is an exact
//! lumping, then print the block-level matrices it induces.
//!
//! A partition lumps when, for any two blocks, every state of the source
//! block sends the same column mass into the target block. The committed
//! 4-class partition of the order-5 cyclic chain is verified here, and the
//! dominant profile is aggregated over its blocks.

use std::error::Error;
use std::fs;
use std::path::PathBuf;

use iterplex::chain::{self, ChainLimits, PartitionBlock};
use iterplex::spectral;
use iterplex::CayleyTable;

fn main() -> Result<(), Box<dyn Error>> {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let table = CayleyTable::cyclic(5).unwrap();
    let limits = ChainLimits::default();

    let matrix = chain::build_transition(&table, 1, &limits)?;
    println!(
        "cyclic-5 chain: {} signature states, lambda = {}",
        matrix.state_count(),
        matrix.lambda()
    );

    let text = fs::read_to_string(fixtures.join("z5-4class.json"))?;
    let blocks: Vec<PartitionBlock> = serde_json::from_str(&text)?;
    let lumped = chain::verify_lumping(&matrix, &blocks)?;

    println!("\nthe 4-class partition is an exact lumping:");
    for (label, size) in lumped.labels.iter().zip(&lumped.block_sizes) {
        println!("  {label:<12} {size:>4} vectors");
    }

    println!("\nblock-level step matrix (one column, state-to-state):");
    for (label, row) in lumped.labels.iter().zip(&lumped.row_matrix) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>4}")).collect();
        println!("  {label:<12} {}", cells.join(" "));
    }

    println!("\nsize-weighted block matrix:");
    for (label, row) in lumped.labels.iter().zip(&lumped.block_matrix) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>4}")).collect();
        println!("  {label:<12} {}", cells.join(" "));
    }

    // The dominant profile respects the same blocks.
    let reach = chain::reachability_and_period(&matrix)?;
    let eigen = spectral::dominant_eigenvector(&matrix, &reach)?;
    let aggregated = spectral::aggregate_eigenvector(&matrix, &eigen, &lumped);
    println!("\ndominant profile mass per block:");
    for (label, mass) in lumped.labels.iter().zip(&aggregated) {
        println!("  {label:<12} {mass}");
    }
    Ok(())
}
