//! Memory-augmented gradient-descent optimizers.
//!
//! `gradmem` implements gradient-descent optimizers (SGD, SGD with momentum,
//! RMSprop, Adam) augmented with a fixed-capacity buffer of past gradients
//! selected by a decaying l2 proxy-norm priority, the convergence machinery
//! for the resulting linear multi-step view (worst-case contraction factors
//! over aggregation weights and curvatures, variance bounds, and an exact
//! simulator of the stacked linear system), strongly convex test problems
//! with exact constants, and an experiment harness that writes plot-ready
//! CSV/JSON artifacts.
//!
//! Start with the runnable programs in `examples/`, or the `gradmem` binary
//! for the command-line interface.

pub mod buffer;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod optim;
pub mod problems;
pub mod theory;

pub use error::{Error, Result};
