//! Enumerate the 2-multiplexes of a 3-dimensional code and sort them into
//! the taxonomy: plex or true, divisible or indivisible, connected or not —
//! then check the tallies against the closed-form bounds.

use num_bigint::BigUint;
use num_traits::Zero;

use iterplex::oracle::{self, EnumerationMode, Feasibility, Multiplex};
use iterplex::CayleyTable;

fn main() {
    let table = CayleyTable::cyclic(3).unwrap();
    let feasibility = Feasibility::default();
    let (dimension, k) = (3usize, 2usize);

    let mut total = 0u64;
    let mut plexes = 0u64;
    let mut divisible: Vec<Multiplex> = Vec::new();
    let mut disconnected = 0u64;
    oracle::enumerate_multiplexes(
        &table,
        dimension,
        k,
        EnumerationMode::Multisets,
        &feasibility,
        |multiplex| {
            let class = oracle::classify_multiplex(&multiplex);
            total += 1;
            if class.is_plex {
                plexes += 1;
            }
            if !class.connected {
                disconnected += 1;
            }
            if class.divisible {
                divisible.push(multiplex);
            }
        },
    )
    .unwrap();

    println!("2-multiplexes of the 3-dimensional cyclic-3 code");
    println!("  total        {total}");
    println!("  plexes       {plexes}");
    println!("  true         {}", total - plexes);
    println!("  divisible    {}", divisible.len());
    println!("  indivisible  {}", total - divisible.len() as u64);
    println!("  disconnected {disconnected}");

    let bounds = oracle::count_bounds(table.order(), dimension, k, Some(1)).unwrap();
    println!("\nclosed-form ceilings:");
    println!("  total        <= {}", bounds.total);
    println!("  true         <= {}", bounds.true_multiplexes.unwrap());
    println!("  disconnected <= {}", bounds.disconnected.unwrap());
    println!(
        "  plexes need k <= {} (here k = {k})",
        bounds.plex_threshold
    );
    assert!(BigUint::from(total) <= bounds.total);

    // A divisible multiplex splits into smaller multiplexes on the same
    // support; the split is found by subset search over its distinct rows.
    let sample = &divisible[0];
    let (left, right) = oracle::find_division(&table, sample).unwrap().unwrap();
    println!("\na divisible one, split into a {}-plex and a {}-plex:", left.k(), right.k());
    for (part, name) in [(&left, "left"), (&right, "right")] {
        let rows: Vec<String> = part
            .rows()
            .iter()
            .map(|row| {
                let cells: Vec<String> =
                    row.iter().map(|s| s.one_based().to_string()).collect();
                cells.join("")
            })
            .collect();
        println!("  {name}:  {}", rows.join(" "));
    }

    // Higher multiplicity can be infeasible outright: no 3-plex fits a
    // 3-dimensional binary code.
    let too_tight = oracle::count_multiplexes(
        &CayleyTable::cyclic(2).unwrap(),
        3,
        3,
        EnumerationMode::Sets,
        &feasibility,
    )
    .unwrap();
    assert!(too_tight.is_zero());
    println!("\nno 3-plex exists in the 3-dimensional cyclic-2 code (k over the threshold)");
}
