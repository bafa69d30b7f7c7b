//! Pauli-string operators and the two Hamiltonian families.
//!
//! Run with `cargo run --example pauli_hamiltonians`.

use spinbell::operators::{
    grid_hamiltonian, operator_norm, xy_chain_hamiltonian, Observable, Operator, Pauli, PauliTerm,
};
use spinbell::{Lattice, Result};

fn main() -> Result<()> {
    // X_0 Z_2 + 0.5 Y_1 on three sites.
    let op = Operator::from_terms(
        3,
        vec![
            PauliTerm::new(1.0, [(0, Pauli::X), (2, Pauli::Z)]),
            PauliTerm::new(0.5, [(1, Pauli::Y)]),
        ],
    )?;
    println!(
        "support {:?}, hermitian {}, ‖A‖ = {:.6}",
        op.support(),
        op.is_hermitian(),
        operator_norm(&op)?
    );

    let chain = Lattice::chain(8)?;
    let h = xy_chain_hamiltonian(&chain, 0.5, &[1.0; 8])?;
    println!(
        "XY chain: {} Pauli terms, parity conserving {}, ‖H‖ ≤ {:.3}",
        h.terms().map_or(0, <[_]>::len),
        h.conserves_parity(),
        h.norm_upper_bound()
    );

    let grid = Lattice::grid(3, 3)?;
    let g = grid_hamiltonian(&grid, 2, [1.0, 1.0, 0.5], &[0.2; 9])?;
    println!(
        "3x3 grid, k = 2: {} bonds, all-to-all {}",
        g.bonds, g.all_to_all
    );

    // A Pauli string observable on a two-site region.
    let r = chain.region([2, 3])?;
    let zz = Observable::pauli_string(&[Pauli::Z, Pauli::Z], &r)?;
    println!("Z⊗Z on {r}: norm {}", zz.norm());
    Ok(())
}
