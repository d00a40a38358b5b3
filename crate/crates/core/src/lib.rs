//! Discrete-time asset pricing on finite lattices.
//!
//! * [`probspace`]: trees, adapted processes, exact conditional expectation.
//! * [`kernel`]: pricing kernels built from increasing drivers, Doob parts.
//! * [`assets`]: Axiom A pricing of dividend-paying assets.
//! * [`bonds`]: discount bonds, rational models, Flesaker–Hughston families,
//!   the natural money-market account.
//! * [`infoflow`]: Brownian-bridge information processes and filtering.
//! * [`inflation`]: money-in-utility price level, nominal and real kernels.
//!
//! Monte Carlo loops run on rayon when the `parallel` feature is enabled
//! (the default); see [`exec`].

// Guards written as `!(x > 0.0)` also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assets;
pub mod bonds;
pub mod error;
pub mod exec;
pub mod infoflow;
pub mod inflation;
pub mod kernel;
pub mod probspace;
pub mod rng;
pub mod stats;
pub mod tolerance;

pub use error::{Error, Result};
pub use exec::Exec;
pub use probspace::{AdaptedProcess, LatticeSpace, TimeGrid};
pub use tolerance::Tolerances;
