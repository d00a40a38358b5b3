//! Scenario files: lattice, model, instruments and run controls.

use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use rand::Rng;
use sdfkit::bonds::Sequence;
use sdfkit::infoflow::Prior;
use sdfkit::inflation::{FactorMap, UtilityConfig};
use sdfkit::{AdaptedProcess, LatticeSpace, TimeGrid, Tolerances};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_paths")]
    pub paths: usize,
    pub grid: GridSpec,
    #[serde(default)]
    pub lattice: Option<LatticeSpec>,
    pub model: ModelSpec,
    #[serde(default)]
    pub instruments: Instruments,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_paths() -> usize {
    10_000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Uniform { periods: usize, dt: f64 },
    Times { times: Vec<f64> },
}

impl GridSpec {
    pub fn build(&self) -> Result<TimeGrid> {
        Ok(match self {
            GridSpec::Uniform { periods, dt } => TimeGrid::uniform(*periods, *dt)?,
            GridSpec::Times { times } => TimeGrid::new(times.clone())?,
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LatticeSpec {
    Binomial { up_prob: f64 },
    /// `parents[i]` and `probs[i]` describe the nodes at level `i + 1`.
    Explicit { parents: Vec<Vec<usize>>, probs: Vec<Vec<f64>> },
}

impl LatticeSpec {
    pub fn build(&self, grid: TimeGrid) -> Result<Arc<LatticeSpace>> {
        Ok(Arc::new(match self {
            LatticeSpec::Binomial { up_prob } => LatticeSpace::binomial(grid, *up_prob)?,
            LatticeSpec::Explicit { parents, probs } => LatticeSpace::from_parents(grid, parents.clone(), probs.clone())?,
        }))
    }
}

/// Node values of a process on the lattice.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessSpec {
    Constant { value: f64 },
    /// One value per level.
    Deterministic { values: Vec<f64> },
    /// `initial * up^u * down^d` with `u` up-moves and `d` down-moves so far.
    Multiplicative { initial: f64, up: f64, down: f64 },
    /// Independent uniform draws per node from the scenario seed.
    Uniform { lo: f64, hi: f64, stream: u64 },
    /// `levels[k]` holds the values at level `start + k`.
    Explicit { levels: Vec<Vec<f64>> },
}

impl ProcessSpec {
    pub fn build(&self, space: &Arc<LatticeSpace>, start: usize, end: usize, seed: u64) -> Result<AdaptedProcess> {
        let p = match self {
            ProcessSpec::Constant { value } => AdaptedProcess::constant(space.clone(), start, end, *value)?,
            ProcessSpec::Deterministic { values } => {
                if values.len() <= end {
                    bail!("deterministic process needs {} values, got {}", end + 1, values.len());
                }
                AdaptedProcess::deterministic(space.clone(), start, end, |i| values[i])?
            }
            ProcessSpec::Multiplicative { initial, up, down } => AdaptedProcess::from_fn(space.clone(), start, end, |i, n| {
                let u = space.label(i, n) as i32;
                initial * up.powi(u) * down.powi(i as i32 - u)
            })?,
            ProcessSpec::Uniform { lo, hi, stream } => {
                if lo.partial_cmp(hi) != Some(std::cmp::Ordering::Less) {
                    bail!("uniform process needs lo < hi");
                }
                let mut rng = sdfkit::rng::stream_rng(seed, *stream, 0);
                AdaptedProcess::from_fn(space.clone(), start, end, |_, _| rng.random_range(*lo..*hi))?
            }
            ProcessSpec::Explicit { levels } => {
                if levels.len() != end - start + 1 {
                    bail!("explicit process needs {} levels, got {}", end - start + 1, levels.len());
                }
                AdaptedProcess::new(space.clone(), start, levels.clone())?
            }
        };
        Ok(p)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSpec {
    pub label: String,
    pub reveal_index: usize,
    pub prior: Prior,
    pub sigma: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Kernel from a strictly increasing driver given by its increments.
    /// Without `tail` the driver's last level only closes the horizon.
    DriverKernel {
        increments: ProcessSpec,
        #[serde(default)]
        tail: Option<ProcessSpec>,
        /// Largest admissible unconditional kernel mass at the horizon.
        #[serde(default)]
        tail_bound: Option<f64>,
    },
    /// `pi = alpha + beta N` with a positive martingale `N`.
    Rational { alpha: Sequence, beta: Sequence, n: ProcessSpec },
    /// Money-in-utility economy on the lattice.
    Inflation {
        utility: UtilityConfig,
        #[serde(default)]
        numeric: bool,
        gamma: f64,
        #[serde(default)]
        wealth: Option<f64>,
        k: ProcessSpec,
        m: ProcessSpec,
        lambda: ProcessSpec,
    },
    /// Economy driven by information processes, valued by Monte Carlo.
    InformationEconomy {
        utility: UtilityConfig,
        #[serde(default)]
        numeric: bool,
        gamma: f64,
        factors: Vec<FactorSpec>,
        k: FactorMap,
        m: FactorMap,
        lambda: FactorMap,
        #[serde(default)]
        markov_index: Option<usize>,
    },
}

impl ModelSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelSpec::DriverKernel { .. } => "driver_kernel",
            ModelSpec::Rational { .. } => "rational",
            ModelSpec::Inflation { .. } => "inflation",
            ModelSpec::InformationEconomy { .. } => "information_economy",
        }
    }

    pub fn needs_lattice(&self) -> bool {
        !matches!(self, ModelSpec::InformationEconomy { .. })
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instruments {
    #[serde(default)]
    pub income_assets: Vec<IncomeAssetSpec>,
    #[serde(default)]
    pub claims: Vec<ClaimSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub index: usize,
    pub node: usize,
    pub delta: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncomeAssetSpec {
    pub name: String,
    pub dividend: ProcessSpec,
    /// Nominal value at the horizon, paid on top of the last dividend.
    #[serde(default)]
    pub terminal: Option<ProcessSpec>,
    /// Price change applied after valuation, to exercise the checks.
    #[serde(default)]
    pub perturb: Option<Perturbation>,
    /// Largest admissible `E[pi_N S_N]`.
    #[serde(default)]
    pub tail_bound: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Payoff {
    Nominal { amount: f64 },
    CpiIndexed { units: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClaimSpec {
    pub name: String,
    pub maturity: usize,
    pub payoff: Payoff,
}

pub fn load(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading scenario {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing scenario {}", path.display()))
}
