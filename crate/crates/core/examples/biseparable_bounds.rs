//! Biseparable bounds by strategy enumeration, checked against sampled states.
//!
//! Run with `cargo run --release --example biseparable_bounds`.

use spinbell::bell::{
    bipartitions, biseparable_bound, optimize, random_biseparable_state, seevinck_svetlichny,
    svetlichny3, svetlichny4, Sign,
};
use spinbell::seesaw::SeesawOptions;
use spinbell::{Lattice, Result};

fn main() -> Result<()> {
    for ineq in [
        svetlichny3(),
        svetlichny4(),
        seevinck_svetlichny(4, Sign::Minus)?,
    ] {
        println!(
            "{}: enumeration {}, catalog {:?}",
            ineq.name(),
            biseparable_bound(&ineq)?,
            ineq.delta_loc()
        );
    }
    let labels: Vec<String> = bipartitions(3).iter().map(|b| b.label()).collect();
    println!("three-party bipartitions: {}", labels.join(", "));

    let lat = Lattice::chain(3)?;
    let regions: Vec<_> = (0..3).map(|s| lat.region([s])).collect::<Result<_>>()?;
    let opts = SeesawOptions {
        restarts: 10,
        seed: 3,
        ..Default::default()
    };
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..20 {
        let rho = random_biseparable_state(3, &[0.5, 0.3, 0.2], seed)?;
        worst = worst.max(optimize(&rho, &svetlichny3(), &regions, &opts)?.value);
    }
    println!("largest value over 20 biseparable states: {worst:.6}");
    Ok(())
}
