//! Hamiltonian Monte Carlo over the quantum state space.
//!
//! States are parameterized by angles so that every point of the
//! coordinate space is a physical density matrix; posterior sampling for a
//! measurement then runs as plain HMC in those angles. The crate covers:
//!
//! - the triangular-factor angle parameterization for any dimension
//!   ([`param`]), with the measure Jacobians needed to target
//!   probability-space densities;
//! - ready-made targets for common qubit measurements — tetrahedron,
//!   Pauli, trine, crosshair — with primitive, Jeffreys, or conjugate
//!   priors ([`targets`]);
//! - a leapfrog integrator with step jittering ([`leapfrog`]) and the HMC
//!   engine with a random-walk baseline and chain diagnostics
//!   ([`engine`]);
//! - the double-crosshair measurement of BB84 pairs: physicality of a
//!   probability table, bounds on the unmeasured correlation q, the
//!   nine-angle sampler, and marginalization weights ([`bb84`]);
//! - CHSH values, optimization over in-plane settings, and weighted
//!   posterior summaries ([`chsh`]);
//! - sample tables, count files, and reproducible run manifests ([`io`]),
//!   plus the `qhmc` command-line front end ([`cli`]).
//!
//! The `examples/` directory demonstrates each capability end to end.

pub mod matrix;
pub mod param;
pub mod targets;
pub mod leapfrog;
pub mod engine;
pub mod bb84;
pub mod chsh;
pub mod io;
pub mod cli;
