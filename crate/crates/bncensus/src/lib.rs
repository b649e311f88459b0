//! Exact computation of linear series on binary curves over finite fields.
//!
//! A binary curve is two projective lines glued along `g+1` pairs of distinct
//! points. This crate models line bundles and rank-one torsion-free sheaves on
//! such curves by their gluing data, computes global-section spaces and
//! vanishing filtrations by exact prime-field linear algebra, and counts
//! points of Brill-Noether and ramification loci over finite fields. Point
//! counts across several primes give an empirical dimension estimate that is
//! compared against the expected dimension
//! `rho = g - (r+1)(g-d+r) - corrections`.
//!
//! Modules:
//! - [`exactalg`]: prime-field matrices, reduced row echelon form, kernels,
//!   subspace intersection, q-binomial counts.
//! - [`curvemodel`]: the curve, multidegrees, polarizations, stability.
//! - [`sections`]: section spaces of sheaves, vanishing subspaces,
//!   multi-vanishing sequences.
//! - [`ramification`]: admissible sequences and the expected-dimension
//!   formula.
//! - [`census`]: torus enumeration, Schubert counting, dimension estimates.
//! - [`chordspace`]: the chord/Grassmannian model and its dictionary with
//!   linear series.

pub mod census;
pub mod chordspace;
pub mod cli;
pub mod curvemodel;
pub mod exactalg;
pub mod ramification;
pub mod sections;

mod error;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
