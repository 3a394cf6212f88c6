//! Simulation and verification toolkit for an isothermal anharmonic chain
//! coupled to a heat bath, together with its macroscopic counterpart, the
//! viscous p-system with mixed Dirichlet–Neumann boundary conditions.
//!
//! The crate has three layers:
//!
//! * single-spring equilibrium thermodynamics ([`thermo`], [`table`]):
//!   tension–elongation duality, free energy, internal energy and entropy,
//!   all from quadrature over the tilted Gibbs density;
//! * dynamics: exact Gibbs sampling ([`sampler`]), Euler–Maruyama
//!   integration of the microscopic SDE system with work/heat ledgers
//!   ([`micro`]), and an RK4 method-of-lines solver for the macroscopic
//!   equations ([`pde`]);
//! * verification drivers ([`experiments`]) that tie the two levels
//!   together: hydrodynamic-limit convergence, Clausius inequality,
//!   exponential relaxation and the first/second laws.
//!
//! Monte Carlo ensembles and refinement ladders run data-parallel through
//! [`par`] when the `parallel` feature (default) is enabled; disabling it
//! leaves a sequential fallback with bit-identical results.

pub mod error;
pub mod experiments;
pub mod micro;
pub mod numerics;
pub mod output;
pub mod par;
pub mod pde;
pub mod potential;
pub mod protocol;
pub mod rng;
pub mod sampler;
pub mod table;
pub mod thermo;

pub use error::Error;
pub use potential::Potential;
pub use protocol::TensionProtocol;
pub use table::ThermoTable;
pub use thermo::Thermo;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
