use crate::density::{lower_density_continuous, lower_density_discrete, DensityEstimate};
use crate::gridfn::{cells_per_unit, grid_cells, CellWeights, GridError, GridFunction, SpaceSpec};
use crate::weights::{estimate_certificate, Certificate};

use super::{FhcError, Result};

/// Hits of `‖T_t x − u‖ < ε` on the time grid `{0, step, …, N}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitReport {
    pub eps: f64,
    pub step: f64,
    pub horizon: f64,
    /// `‖T_t x − u‖` at every scanned time.
    pub distances: Vec<f64>,
    /// Merged `[t, t + step)` intervals around the hit times.
    pub intervals: Vec<(f64, f64)>,
    /// Integer hit times `n ≥ 1`.
    pub discrete_hits: Vec<u64>,
    pub continuous: DensityEstimate,
    pub discrete: DensityEstimate,
}

/// `‖T_t x − u‖` on the time grid `{0, step, …, N}`, reusable across radii.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitScan {
    pub step: f64,
    pub horizon: f64,
    per_unit: usize,
    pub distances: Vec<f64>,
}

pub fn scan_orbit(x: &GridFunction, u: &GridFunction, space: &SpaceSpec, horizon: f64, step: f64) -> Result<OrbitScan> {
    let cpu = x.cells_per_unit();
    if u.cells_per_unit() != cpu {
        return Err(GridError::StepMismatch(cpu, u.cells_per_unit()).into());
    }
    let per_unit = cells_per_unit(step)? as usize;
    let step_cells = grid_cells(step, cpu)?;
    if !(horizon >= 1.0) {
        return Err(FhcError::Invalid(format!("scan horizon must be >= 1, got {horizon}")));
    }
    let steps = (horizon * per_unit as f64 + 1e-9).floor() as usize;
    let table = CellWeights::new(space, cpu, x.support_cells().max(u.support_cells()))?;
    let distances = (0..=steps)
        .map(|i| {
            let start = (i * step_cells).min(x.support_cells());
            table.norm_diff(&x.values()[start..], u.values())
        })
        .collect();
    Ok(OrbitScan { step, horizon, per_unit, distances })
}

impl OrbitScan {
    /// Hit sets and densities at radius `eps`, over the tail window `[N/2, N]`.
    pub fn report(&self, eps: f64) -> Result<OrbitReport> {
        let mut intervals: Vec<(f64, f64)> = Vec::new();
        let mut discrete_hits = Vec::new();
        for (i, &d) in self.distances.iter().enumerate() {
            if d >= eps {
                continue;
            }
            let t = i as f64 * self.step;
            match intervals.last_mut() {
                Some(last) if last.1 == t => last.1 = t + self.step,
                _ => intervals.push((t, t + self.step)),
            }
            if i > 0 && i % self.per_unit == 0 {
                discrete_hits.push((i / self.per_unit) as u64);
            }
        }
        let n_int = ((self.distances.len() - 1) / self.per_unit) as u64;
        let continuous = lower_density_continuous(&intervals, self.horizon, 0.5 * self.horizon)?;
        let discrete = lower_density_discrete(&discrete_hits, n_int, n_int / 2)?;
        Ok(OrbitReport {
            eps,
            step: self.step,
            horizon: self.horizon,
            distances: self.distances.clone(),
            intervals,
            discrete_hits,
            continuous,
            discrete,
        })
    }

    /// Transfer check at radius `eps` (continuous) against `eps/2` (integer
    /// times), with the continuity radius `δ̂` of `u` measured through the
    /// weight's certificate (estimated on `[0, N] × [0, 1]` when none is declared).
    pub fn transfer(&self, u: &GridFunction, eps: f64, space: &SpaceSpec, tolerance: f64) -> Result<TransferCheck> {
        let w = space.weight();
        let certificate = match w.certificate() {
            Some(c) => c,
            None => estimate_certificate(w, self.horizon, 1.0, self.step)?,
        };
        let cpu = u.cells_per_unit();
        let step_cells = grid_cells(self.step, cpu)?;
        let table = CellWeights::new(space, cpu, u.support_cells())?;
        let p = space.exponent();
        let mut delta_hat = 0.0;
        for i in 0..self.per_unit {
            let s = i as f64 * self.step;
            let start = (i * step_cells).min(u.support_cells());
            let drift = table.norm_diff(&u.values()[start..], u.values());
            let growth = (certificate.m * (certificate.omega * s).exp()).powf(1.0 / p);
            if growth * 0.5 * eps + drift >= eps {
                break;
            }
            delta_hat = s;
        }
        let continuous = self.report(eps)?.continuous.estimate;
        let discrete_half = self.report(0.5 * eps)?.discrete.estimate;
        Ok(TransferCheck {
            eps,
            certificate,
            delta_hat,
            continuous,
            discrete_half,
            tolerance,
            holds: continuous >= delta_hat * discrete_half - tolerance,
        })
    }
}

/// Scans `t ∈ {0, step, 2·step, …, N}` and estimates the continuous and
/// integer-time lower densities of `{t : ‖T_t x − u‖ < ε}`.
pub fn orbit_hit_density(
    x: &GridFunction,
    u: &GridFunction,
    eps: f64,
    space: &SpaceSpec,
    horizon: f64,
    step: f64,
) -> Result<OrbitReport> {
    scan_orbit(x, u, space, horizon, step)?.report(eps)
}

/// Check of `dens(‖T_t x − u‖ < ε) ≥ δ̂ · dens(‖T_n x − u‖ < ε/2) − tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferCheck {
    pub eps: f64,
    pub certificate: Certificate,
    /// Largest grid `δ ≤ 1 − step` with `‖T_s‖·ε/2 + ‖T_s u − u‖ < ε` for all grid `s ≤ δ`.
    pub delta_hat: f64,
    pub continuous: f64,
    pub discrete_half: f64,
    pub tolerance: f64,
    pub holds: bool,
}

pub fn density_transfer(
    x: &GridFunction,
    u: &GridFunction,
    eps: f64,
    space: &SpaceSpec,
    horizon: f64,
    step: f64,
    tolerance: f64,
) -> Result<TransferCheck> {
    scan_orbit(x, u, space, horizon, step)?.transfer(u, eps, space, tolerance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fhc::{build_vector, level_budget};
    use crate::gridfn::smoothing;
    use crate::weights::Weight;

    fn l1e() -> SpaceSpec {
        SpaceSpec::lp(1.0, Weight::exponential(1.0).unwrap()).unwrap()
    }

    #[test]
    fn build_hits_have_family_density() {
        let y = GridFunction::indicator(16, 0.0, 1.0).unwrap();
        let v = build_vector(&[y.clone()], &l1e(), 400).unwrap();
        let u = smoothing(&y);
        let r = orbit_hit_density(&v.x, &u, level_budget(1) + 0.05, &l1e(), 380.0, 0.25).unwrap();
        let p = v.family.period() as f64;
        assert!(r.discrete.estimate >= 1.0 / p - 2.0 / 380.0);
        assert!(r.continuous.estimate > 0.0);
    }

    #[test]
    fn far_target_and_huge_radius() {
        let y = GridFunction::indicator(16, 0.0, 1.0).unwrap();
        let v = build_vector(&[y.clone()], &l1e(), 100).unwrap();
        let far = y.scale(10.0);
        let r = orbit_hit_density(&v.x, &far, 0.1, &l1e(), 90.0, 0.5).unwrap();
        assert_eq!((r.continuous.estimate, r.discrete.estimate), (0.0, 0.0));
        let r = orbit_hit_density(&v.x, &y, 1e6, &l1e(), 90.0, 0.5).unwrap();
        assert_eq!((r.continuous.estimate, r.discrete.estimate), (1.0, 1.0));
        assert_eq!(r.intervals, vec![(0.0, 90.5)]);
    }

    #[test]
    fn transfer_inequality() {
        let y = GridFunction::indicator(16, 0.0, 1.0).unwrap();
        let v = build_vector(&[y.clone()], &l1e(), 400).unwrap();
        let u = smoothing(&y);
        let c = density_transfer(&v.x, &u, 2.0 * (level_budget(1) + 0.05), &l1e(), 380.0, 0.0625, 0.01).unwrap();
        assert!(c.delta_hat > 0.0);
        assert!(c.discrete_half > 0.0);
        assert!(c.holds, "{c:?}");
    }

    #[test]
    fn scan_rejects_bad_steps() {
        let y = GridFunction::indicator(16, 0.0, 1.0).unwrap();
        assert!(orbit_hit_density(&y, &y, 1.0, &l1e(), 10.0, 0.3).is_err());
        assert!(orbit_hit_density(&y, &y, 1.0, &l1e(), 10.0, 1.0 / 32.0).is_err());
        assert!(orbit_hit_density(&y, &GridFunction::zero(8), 1.0, &l1e(), 10.0, 0.5).is_err());
    }
}
