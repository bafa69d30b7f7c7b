//! Correlation defects, partitions and the telescoping chain.
//!
//! Run with `cargo run --release --example correlation_defects`.

use spinbell::correlators::{
    defect_bipartition, defect_chain_bound_check, defect_sequential, max_defect, Partition,
};
use spinbell::operators::{Observable, Pauli};
use spinbell::seesaw::SeesawOptions;
use spinbell::states::QuantumState;
use spinbell::{Lattice, Result};

fn main() -> Result<()> {
    let lat = Lattice::chain(4)?;
    let ghz = QuantumState::ghz(4);
    let z: Vec<Observable> = (0..4).map(|s| Observable::pauli(Pauli::Z, s)).collect();

    let seq = defect_sequential(&ghz, &z)?;
    println!(
        "sequential: joint {:+.3}, factored {:+.3}, defect {:.3}",
        seq.joint, seq.factored, seq.defect
    );
    let split = defect_bipartition(&ghz, &z, &[0, 1])?;
    println!("{}: defect {:.3}", split.partition.label(4), split.defect);

    let chain = defect_chain_bound_check(&ghz, &z)?;
    println!(
        "telescoping: {:.3} ≤ {:.3} ({:?}) holds {}",
        chain.lhs, chain.rhs, chain.steps, chain.holds
    );

    // The largest defect over norm-one observables.
    let regions: Vec<_> = (0..4).map(|s| lat.region([s])).collect::<Result<_>>()?;
    let opts = SeesawOptions {
        restarts: 8,
        seed: 1,
        ..Default::default()
    };
    let best = max_defect(&ghz, &regions, Partition::Sequential, &opts)?;
    println!(
        "maximized sequential defect on GHZ: {:.6}",
        best.record.defect
    );

    let product = QuantumState::basis(&[false, true, false, true]);
    let best = max_defect(&product, &regions, Partition::Sequential, &opts)?;
    println!(
        "maximized defect on a product state: {:.2e}",
        best.record.defect
    );
    Ok(())
}
