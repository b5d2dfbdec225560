//! Simulation and verification engine for opinion dynamics on the unit
//! hypersphere.
//!
//! Agents hold unit vectors in `R^d` and react to a stream of random issue
//! vectors; depending on the update model the population either clusters
//! around a single direction or splits into sign-aligned camps. This crate
//! provides the update models, the geometry of the polarized set, trajectory
//! diagnostics, and numeric checks for the inequalities that drive the
//! convergence arguments.

// Numeric kernels work on flat `n * d` buffers with stride arithmetic, where
// explicit indices read better than iterator chains.
#![allow(clippy::needless_range_loop)]

pub mod checks;
pub mod diagnostics;
pub mod dynamics;
pub mod geometry;
pub mod rng;
