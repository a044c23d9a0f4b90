//! Parse a Cayley-table file, confirm it is a quasigroup, and probe the
//! basic algebra: products, divisions, folds, and an isotopy.
//!
//! Pass a file path to check your own table; the bundled order-5 non-group
//! is used otherwise.

use std::env;
use std::error::Error;
use std::fs;
use std::path::PathBuf;

use iterplex::algebra::{Isotopy, Permutation, Symbol};
use iterplex::CayleyTable;

fn main() -> Result<(), Box<dyn Error>> {
    let path = env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/q5.tbl")
    });
    let text = fs::read_to_string(&path)?;
    let table = CayleyTable::parse(&text)?;

    println!("{} is a quasigroup of order {}", path.display(), table.order());
    println!("fingerprint {}", table.fingerprint());
    println!();
    print!("{}", table.to_text());

    let a = Symbol::from_one_based(2);
    let b = Symbol::from_one_based(3);
    let product = table.product(a, b);
    println!();
    println!("2 * 3 = {}", product.one_based());
    println!(
        "left division:  2 * y = {} gives y = {}",
        product.one_based(),
        table.left_divide(a, product).one_based()
    );
    println!(
        "right division: x * 3 = {} gives x = {}",
        product.one_based(),
        table.right_divide(product, b).one_based()
    );

    let word: Vec<Symbol> = [1, 2, 3].iter().map(|&s| Symbol::from_one_based(s)).collect();
    println!(
        "left-to-right fold of (1, 2, 3) = {}",
        table.left_fold(&word).one_based()
    );

    // Relabeling rows, columns, or values keeps the quasigroup property.
    let swap_last_two: Vec<u16> = (1..=table.order() as u16)
        .map(|s| match s as usize {
            x if x == table.order() => s - 1,
            x if x == table.order() - 1 => s + 1,
            _ => s,
        })
        .collect();
    let isotopy = Isotopy {
        output: Permutation::identity(table.order()),
        left: Permutation::from_one_based(&swap_last_two)?,
        right: Permutation::identity(table.order()),
    };
    let relabeled = table.apply_isotopy(&isotopy)?;
    println!();
    println!("swapping the last two rows is still a quasigroup:");
    print!("{}", relabeled.to_text());

    // And here is what rejection looks like.
    let broken = "1 2\n2 2\n";
    match CayleyTable::parse(broken) {
        Ok(_) => unreachable!("a repeated symbol cannot validate"),
        Err(err) => println!("\nrejected {broken:?}: {err}"),
    }
    Ok(())
}
