//! Spectral Galerkin simulator and verification harness for the
//! vorticity-form Navier-Stokes systems with generalized dissipation
//! `|grad|^alpha` on the 2- and 3-torus.
//!
//! The crate has two halves. The simulation half evolves the truncated
//! Fourier-mode ODE systems (direct or dealiased-transform convolution,
//! integrating-factor RK4). The verification half computes certified
//! decay-envelope constants (enstrophy/energy bounds, convolution-lemma
//! constants, critical wavenumbers) and audits trapping regions: decay
//! envelopes whose boundaries the vector field crosses inward, so
//! trajectories never escape.

pub mod dealias;
pub mod dynamics;
pub mod envelopes;
pub mod estimates;
pub mod forcing;
pub mod integrator;
pub mod io;
pub mod lattice;
pub mod oracle;
pub mod scenario;
pub mod state;

pub use dynamics::PhysicalParams;
pub use lattice::{TruncationSet, TruncationShape, WaveVector};
pub use state::{Spectrum2D, Spectrum3D};
