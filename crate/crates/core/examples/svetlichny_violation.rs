//! See-saw optimization of Svetlichny-type inequalities.
//!
//! Run with `cargo run --release --example svetlichny_violation`.

use spinbell::bell::{catalog, optimize, seevinck_svetlichny, svetlichny3, Sign};
use spinbell::seesaw::SeesawOptions;
use spinbell::states::QuantumState;
use spinbell::{Lattice, Result};

fn main() -> Result<()> {
    let opts = SeesawOptions {
        restarts: 20,
        seed: 7,
        ..Default::default()
    };
    for n in [3, 4, 5] {
        let lat = Lattice::chain(n)?;
        let regions: Vec<_> = (0..n).map(|s| lat.region([s])).collect::<Result<_>>()?;
        let ineq = if n == 3 {
            svetlichny3()
        } else {
            seevinck_svetlichny(n, Sign::Plus)?
        };
        let r = optimize(&QuantumState::ghz(n), &ineq, &regions, &opts)?;
        println!(
            "{}: GHZ value {:.6}, biseparable bound {}, restart {} of {}",
            ineq.name(),
            r.value,
            ineq.delta_loc().unwrap_or(f64::NAN),
            r.best_restart,
            r.restarts_used
        );
    }

    // A product state cannot beat the bound.
    let lat = Lattice::chain(3)?;
    let regions: Vec<_> = (0..3).map(|s| lat.region([s])).collect::<Result<_>>()?;
    let r = optimize(
        &QuantumState::basis(&[false; 3]),
        &catalog("svetlichny3", None, None)?,
        &regions,
        &opts,
    )?;
    println!("|000⟩: {:.6}", r.value);
    Ok(())
}
