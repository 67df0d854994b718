//! Constructive side of the frequent hypercyclicity criterion for the
//! translation semigroup: separated families of return times, tail
//! thresholds, the frequently hypercyclic vector, return-bound and
//! orbit-density verification, periodic points and the discrete series.

use thiserror::Error;

use crate::density::DensityError;
use crate::gridfn::GridError;
use crate::weights::WeightError;

mod family;
mod orbit;
mod periodic;
mod series;
mod tail;
mod vector;

pub use family::{build_family, FamilyCheck, SeparatedFamily};
pub use orbit::{density_transfer, orbit_hit_density, scan_orbit, OrbitReport, OrbitScan, TransferCheck};
pub use periodic::{build_periodic_point, periodic_defect_profile, PeriodicPoint};
pub use series::{discrete_series_check, DiscreteSeriesReport};
pub use tail::{orbit_norm, pettis_tail_profile, tail_integral, tail_threshold, Direction, TailThreshold};
pub use vector::{
    build_vector, level_budget, level_tolerance, orbit_decomposition, verify_returns, Decomposition,
    FhcVector, LevelReturn, ReturnReport, DISCRETIZATION_CONSTANT,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FhcError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Density(#[from] DensityError),
    /// A hypothesis of the criterion fails for the given inputs.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("horizon {horizon} is below the first element {first} of level {level}")]
    HorizonTooSmall { horizon: u64, level: usize, first: u64 },
}

pub type Result<T> = std::result::Result<T, FhcError>;
