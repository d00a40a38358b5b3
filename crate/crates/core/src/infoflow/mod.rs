//! Information-based filtration: X-factors with priors, Brownian-bridge
//! noise, information processes and the Bayesian filter.

mod bridge;
mod checks;
mod ensemble;
mod filter;
mod prior;
pub mod quadrature;

pub use bridge::{sample_bridge, sample_information, BridgePath, InformationPath};
pub use checks::{
    bridge_covariance_check, filter_martingale_check, filter_tower_check, markov_reduction_check, terminal_gap, CovarianceCheck,
    MarkovBin, MarkovReport, MeanCheck, StepDrift, TerminalGap,
};
pub use ensemble::{simulate_ensemble, Ensemble};
pub use filter::{filter_expect, posterior_weights};
pub use prior::{DensityFn, Prior, XFactor};
