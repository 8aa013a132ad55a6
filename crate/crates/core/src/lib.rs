//! Kinetic model for gliding bacteria on a flat substrate: directions relax by
//! angular diffusion and change in hard binary collisions of two types,
//! alignment (both partners jump to their angular midpoint) and reversal (both
//! partners turn around).
//!
//! The crate provides
//!
//! * the discrete angular torus ([`grid`]) and the mass-conserving discrete
//!   collision operator ([`collision`]),
//! * explicit time integration of the spatially homogeneous equation
//!   ([`homogeneous`]) and of the full transport model on the flat torus
//!   ([`spatial`]),
//! * linear stability of the uniform state ([`spectral`]) and tracing of the
//!   pitchfork branch that appears below the critical diffusivity
//!   ([`bifurcation`]),
//! * the small-diffusivity peak profile as the fixed point of a Green's
//!   function map on the real line ([`fixedpoint`]).
//!
//! With the default `parallel` feature the data-parallel loops (spatial
//! cells, sweep rows, quadrature output nodes, matrix columns) run on rayon.
//! Without it every loop runs sequentially. Every reduction is evaluated in a
//! fixed order per output element, so both builds and all thread counts give
//! bitwise identical results.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bifurcation;
pub mod collision;
pub mod error;
pub mod fixedpoint;
pub mod grid;
pub mod homogeneous;
pub mod par;
pub mod spatial;
pub mod spectral;

pub use collision::{AngularDensity, CollisionKernel, CollisionOperator};
pub use error::{Error, Result};
pub use grid::AngularGrid;
pub use homogeneous::{DistributionState, InitialCondition, SimConfig};
