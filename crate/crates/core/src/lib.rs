//! Competence-progress driven goal babbling.
//!
//! The crate learns inverse models of redundant systems by actively generating
//! goals in a low-dimensional task space. A region tree over the task space
//! tracks how competence evolves in each region and steers goal sampling toward
//! regions where competence is changing fastest; a low-level explorer then tries
//! to reach each goal with local pseudo-inverse models built from an incremental
//! sensorimotor memory.
//!
//! Layout:
//!
//! - [`env`]: planar arm stepped by joint micro-actions, and an episodic
//!   parameter-to-effect map with a resettable context.
//! - [`memory`]: nearest-neighbour memory with local linear forward/inverse
//!   models.
//! - [`competence`]: normalized competence and its clipping.
//! - [`regions`]: region tree, interest, splitting and goal selection.
//! - [`explore`]: goal-directed reaching with local exploration.
//! - [`experiment`]: the top-level loop and its baselines.
//! - [`evaluation`]: test databases, reaching error, strategy comparison.
//! - [`harness`]: config files, CSV outputs and the `sagg` command line.

pub mod competence;
pub mod env;
pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod explore;
pub mod harness;
pub mod memory;
pub mod regions;
pub mod rng;
pub mod space;

pub use error::{Error, Result};
pub use space::{Bounds, Point};
