//! Weyl coefficients of two-dimensional canonical systems `y' = zJHy` on
//! `(0, inf)`, together with their high-energy diagnostics and executable
//! checks of the explicit inequalities relating them.

pub mod asymptotics;
pub mod error;
pub mod hamiltonian;
pub mod intervals;
pub mod linalg;
pub mod quadrature;
pub mod roots;
pub mod verify;
pub mod weyl;

pub use error::{Error, Result};
pub use hamiltonian::{Entries, HamiltonianModel, PrimitiveMatrix};
