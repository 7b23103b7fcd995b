//! Equilibration diagnostics for random tensor network (RTN) states.
//!
//! The crate is organised around one data type, [`Geometry`], and a handful of
//! numerical layers built on top of it:
//!
//! - [`geometry`]: builders (tensor trains, square discs, hyperbolic patches),
//!   vertex fusion and minimal cuts.
//! - [`ising`]: exact and bounded rescaled Ising partition functions.
//! - [`effdim`]: inverse effective dimensions, closed forms and the geometry
//!   hierarchy.
//! - [`ensembles`]: circular ensembles and low-order Weingarten moments.
//! - [`contraction`]: dense RTN state assembly and Monte-Carlo statistics.
//! - [`dynamics`]: exact-diagonalization time evolution and fluctuations.

pub mod contraction;
pub mod dynamics;
pub mod effdim;
pub mod ensembles;
mod error;
pub mod exact;
pub mod geometry;
pub mod ising;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use geometry::Geometry;
