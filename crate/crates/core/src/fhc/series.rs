use crate::gridfn::{backshift, smoothing, GridFunction, SpaceSpec};

use super::tail::{backward_remainder, orbit_norm, Direction};
use super::{FhcError, Result};

/// Partial sums of `Σ ‖T_n u‖` and `Σ ‖S_n u‖` for `u = R y`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSeriesReport {
    pub forward_partial: Vec<f64>,
    /// First `n` with `T_n u = 0`.
    pub forward_terminates_at: u64,
    pub backward_partial: Vec<f64>,
    /// Bound on `Σ_{n > horizon} ‖S_n u‖`.
    pub backward_tail_bound: f64,
    pub identity_checked: u64,
    /// `S_n u = (S_1)^n u` bit for bit for every checked `n`.
    pub identity_holds: bool,
}

pub fn discrete_series_check(y: &GridFunction, space: &SpaceSpec, horizon: u64) -> Result<DiscreteSeriesReport> {
    if horizon == 0 {
        return Err(FhcError::Invalid("horizon must be positive".into()));
    }
    let u = smoothing(y);
    let (coef, env, tail_from) = backward_remainder(&u, space)?;
    let mut forward_partial = Vec::with_capacity(horizon as usize);
    let mut backward_partial = Vec::with_capacity(horizon as usize);
    let (mut fwd, mut bwd) = (0.0, 0.0);
    for n in 1..=horizon {
        fwd += orbit_norm(&u, n as f64, Direction::Forward, space)?;
        bwd += orbit_norm(&u, n as f64, Direction::Backward, space)?;
        forward_partial.push(fwd);
        backward_partial.push(bwd);
    }
    let first = ((horizon + 1) as f64).max(tail_from.ceil());
    let mut backward_tail_bound = if coef == 0.0 { 0.0 } else { coef * env.lattice_sum_bounds(first, 1.0).1 };
    // terms between the horizon and the start of the analytic tail
    for n in horizon + 1..first as u64 {
        backward_tail_bound += orbit_norm(&u, n as f64, Direction::Backward, space)?;
    }

    let identity_checked = horizon.min(50);
    let mut iterated = u.clone();
    let mut identity_holds = true;
    for n in 1..=identity_checked {
        iterated = backshift(&iterated, 1.0, space)?;
        identity_holds &= iterated == backshift(&u, n as f64, space)?;
    }
    Ok(DiscreteSeriesReport {
        forward_partial,
        forward_terminates_at: u.support_end().ceil() as u64,
        backward_partial,
        backward_tail_bound,
        identity_checked,
        identity_holds,
    })
}
