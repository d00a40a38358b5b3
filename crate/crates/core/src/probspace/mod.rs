//! Finite filtered probability spaces with exact conditional expectation.

mod checks;
mod grid;
mod lattice;
mod process;

pub use checks::{
    is_martingale, is_potential, is_strict_supermartingale, martingale_defect, supermartingale_excess, Deviation,
};
pub use grid::TimeGrid;
pub use lattice::LatticeSpace;
pub use process::AdaptedProcess;
