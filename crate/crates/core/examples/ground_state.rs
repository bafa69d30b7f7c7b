//! Ground states, spectral gaps and the Lanczos path.
//!
//! Run with `cargo run --release --example ground_state`.

use spinbell::operators::xy_chain_hamiltonian;
use spinbell::states::{ground_state, spectrum};
use spinbell::{Lattice, Result};

fn main() -> Result<()> {
    // The critical field of this normalization is c = 2.
    for &(l, c) in &[(8, 1.0), (8, 3.0), (10, 3.0), (13, 3.0)] {
        let lat = Lattice::chain(l)?;
        let h = xy_chain_hamiltonian(&lat, 0.5, &vec![c; l])?;
        let (psi, spec) = ground_state(&h)?;
        println!(
            "L = {l:2}, c = {c}: E0 = {:.8}, gap = {:.3e}, degenerate {}, solver {}",
            spec.ground_energy,
            spec.gap,
            spec.degenerate,
            if spec.complete { "dense" } else { "lanczos" }
        );
        assert_eq!(psi.n_sites(), l);
    }

    let lat = Lattice::chain(6)?;
    let h = xy_chain_hamiltonian(&lat, 0.5, &[1.0; 6])?;
    let spec = spectrum(&h)?;
    println!("L = 6 lowest levels: {:?}", &spec.eigenvalues[..4]);
    Ok(())
}
