//! Exact simulation of small spin lattices and Bell-type locality certification.
//!
//! The crate builds Hamiltonians on chains and grids, prepares ground,
//! thermal and time-evolved states by exact diagonalization, measures how
//! multi-region correlations factorize with separation, and maximizes
//! Svetlichny-type Bell functionals over local observables. Fitted decay
//! constants turn into an empirical locality slack `ε`, and [`analysis::certify`]
//! checks `S ≤ Δ_loc + ε`.
//!
//! ```
//! use spinbell::bell::{optimize, svetlichny3};
//! use spinbell::seesaw::SeesawOptions;
//! use spinbell::states::QuantumState;
//! use spinbell::Lattice;
//!
//! let lat = Lattice::chain(3)?;
//! let regions: Vec<_> = (0..3).map(|s| lat.region([s])).collect::<Result<_, _>>()?;
//! let opts = SeesawOptions { restarts: 20, seed: 7, ..Default::default() };
//! let r = optimize(&QuantumState::ghz(3), &svetlichny3(), &regions, &opts)?;
//! assert!((r.value - 4.0 * 2f64.sqrt()).abs() < 1e-4);
//! # Ok::<(), spinbell::Error>(())
//! ```

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bell;
pub mod commands;
pub mod config;
pub mod correlators;
pub mod error;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod marginal;
pub mod operators;
pub mod seesaw;
pub mod states;

pub use error::{Error, Result};
pub use lattice::{Lattice, Region};
pub use linalg::C64;

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
