//! Integrators for multipartite Schrödinger dynamics, unrestricted and
//! restricted to separable states.
//!
//! The crate covers state primitives ([`state`]), Hamiltonian constructors
//! ([`hamiltonian`]), partially reduced operators ([`reduced`]), splitting
//! propagators ([`propagate`]), closed-form oracles for the exchange system
//! ([`exact_swap`]), variational integrators ([`variational`]), modified
//! equations from backward error analysis ([`bea`]), trajectory diagnostics
//! ([`analysis`]) and the experiment runner behind the `sepdyn` binary
//! ([`cli`]).

pub mod error;
pub mod state;
pub mod hamiltonian;
pub mod reduced;
pub mod propagate;
pub mod exact_swap;
pub mod variational;
pub mod bea;
pub mod analysis;
pub mod cli;

pub use error::{Error, Result};

pub type C64 = nalgebra::Complex<f64>;
pub type CVector = nalgebra::DVector<C64>;
pub type CMatrix = nalgebra::DMatrix<C64>;
