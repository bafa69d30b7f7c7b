//! Lattices, regions and separations.
//!
//! Run with `cargo run --example lattice_regions`.

use spinbell::analysis::{leftmost_regions, max_feasible_tau};
use spinbell::{Lattice, Result};

fn main() -> Result<()> {
    let chain = Lattice::chain(12)?;
    let grid = Lattice::grid(3, 4)?;
    println!("{} has diameter {}", chain.describe(), chain.diameter());
    println!("{} has diameter {}", grid.describe(), grid.diameter());

    // Site numbers are 1-based in configs, 0-based in code.
    let a = chain.region_from_numbers(&[1, 2])?;
    let b = chain.region_from_numbers(&[6])?;
    let c = chain.region_from_numbers(&[10, 11])?;
    println!("d({a}, {b}) = {}", chain.region_distance(&a, &b)?);
    println!(
        "min separation of A, B, C = {}",
        chain.min_separation(&[a, b, c])?
    );

    // Grid distance is Manhattan.
    let corner = grid.region([0])?;
    let far = grid.region([11])?;
    println!(
        "grid corner to corner: {}",
        grid.region_distance(&corner, &far)?
    );

    // Leftmost packing used by separation sweeps.
    let tmax = max_feasible_tau(12, 3, 1);
    for tau in 1..=tmax {
        let regions = leftmost_regions(&chain, 3, 1, tau)?;
        let shown: Vec<String> = regions.iter().map(ToString::to_string).collect();
        println!("τ = {tau}: {}", shown.join(" "));
    }
    if let Err(e) = leftmost_regions(&chain, 3, 1, tmax + 1) {
        println!("τ = {}: {e}", tmax + 1);
    }
    Ok(())
}
