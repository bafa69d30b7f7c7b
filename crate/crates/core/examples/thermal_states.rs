//! Gibbs states at several temperatures.
//!
//! Run with `cargo run --release --example thermal_states`.

use spinbell::correlators::defect_sequential;
use spinbell::operators::{xy_chain_hamiltonian, Observable, Pauli};
use spinbell::states::EigenSystem;
use spinbell::{Lattice, Result};

fn main() -> Result<()> {
    let lat = Lattice::chain(8)?;
    let h = xy_chain_hamiltonian(&lat, 0.5, &[1.0; 8])?;
    let eig = EigenSystem::new(&h)?;
    let obs = [
        Observable::pauli(Pauli::Z, 0),
        Observable::pauli(Pauli::Z, 3),
        Observable::pauli(Pauli::Z, 6),
    ];
    for beta in [0.0, 0.1, 0.5, 2.0, 10.0] {
        let rho = eig.gibbs(beta)?;
        let d = defect_sequential(&rho, &obs)?;
        println!(
            "β = {beta:5}: purity {:.6}, ⟨Z1 Z4 Z7⟩ = {:+.6}, defect {:.3e}",
            rho.purity(),
            d.joint,
            d.defect
        );
    }
    Ok(())
}
