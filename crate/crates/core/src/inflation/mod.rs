//! Monetary economy with a representative agent: utility, the fundamental
//! relation for the price level, nominal and real kernels, the budget
//! multiplier, velocity and claim valuation, on lattices and on simulated
//! information paths.

mod claims;
mod economy;
mod information;
mod utility;

pub use claims::{cpi_indexed_payoff, price_claim, price_claim_via_kernel};
pub use economy::{
    budget_residual, budget_value, foc_residuals, fundamental_relation_solve, nominal_kernel, real_kernel, solve_mu, velocity, AgentProblem,
    EconomyPath, FocReport,
};
pub use information::{economy_from_information, ClaimEstimate, FactorMap, InformationEconomy, MapForm, SimulatedEconomy};
pub use utility::{Bivariate, GenericUtility, UtilityConfig, UtilitySpec};
