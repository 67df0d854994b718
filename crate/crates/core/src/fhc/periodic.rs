use crate::gridfn::{
    grid_cells, integral_backward_cells, integral_forward_cells, translate, CellWeights, GridFunction, SpaceSpec,
};

use super::tail::backward_remainder;
use super::{FhcError, Result};

/// Truncated periodic point
/// `z = δ⁻¹[Σ_{k≤K} ∫_{kt−δ}^{kt} S_r y dr + ∫_0^δ T_s y ds + Σ_{k≤K} ∫_{kt}^{kt+δ} T_s y ds]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicPoint {
    pub z: GridFunction,
    pub period: u64,
    pub delta: f64,
    pub truncation: u64,
    /// `c = δ⁻¹ ∫_0^δ T_s y ds`.
    pub center: GridFunction,
    /// `‖T_t z − z‖`.
    pub periodic_defect: f64,
    /// `‖z − c‖`.
    pub center_defect: f64,
    /// `‖c − y‖`.
    pub center_to_target: f64,
}

pub fn build_periodic_point(
    y: &GridFunction,
    period: u64,
    delta: f64,
    truncation: u64,
    space: &SpaceSpec,
) -> Result<PeriodicPoint> {
    if period == 0 || truncation == 0 {
        return Err(FhcError::Invalid("period and truncation must be positive".into()));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(FhcError::Invalid(format!("delta must lie in (0, 1], got {delta}")));
    }
    backward_remainder(y, space)?;
    let cpu = y.cells_per_unit();
    let d = grid_cells(delta, cpu)?;
    let t = period as usize * cpu as usize;
    let scale = 1.0 / delta;

    let center = integral_forward_cells(y, 0, d).scale(scale);
    let mut z = center.clone();
    for k in 1..=truncation as usize {
        z.add_shifted(&integral_backward_cells(y, k * t - d, k * t, space).scale(scale), 0)?;
        let forward = integral_forward_cells(y, k * t, k * t + d);
        if !forward.is_zero() {
            z.add_shifted(&forward.scale(scale), 0)?;
        }
    }

    let shifted = translate(&z, period as f64)?;
    let table = CellWeights::new(space, cpu, z.support_cells().max(y.support_cells()))?;
    let periodic_defect = table.norm_diff(shifted.values(), z.values());
    let center_defect = table.norm_diff(z.values(), center.values());
    let center_to_target = table.norm_diff(center.values(), y.values());
    Ok(PeriodicPoint { z, period, delta, truncation, center, periodic_defect, center_defect, center_to_target })
}

/// `‖T_t z_K − z_K‖` for `K = 1, …, max_truncation`.
pub fn periodic_defect_profile(
    y: &GridFunction,
    period: u64,
    delta: f64,
    max_truncation: u64,
    space: &SpaceSpec,
) -> Result<Vec<f64>> {
    (1..=max_truncation)
        .map(|k| build_periodic_point(y, period, delta, k, space).map(|p| p.periodic_defect))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::Weight;

    fn l1e() -> SpaceSpec {
        SpaceSpec::lp(1.0, Weight::exponential(1.0).unwrap()).unwrap()
    }

    #[test]
    fn defect_decays_with_truncation() {
        let y = GridFunction::indicator(32, 0.0, 1.0).unwrap();
        let prof = periodic_defect_profile(&y, 5, 0.25, 10, &l1e()).unwrap();
        assert!(prof.windows(2).all(|w| w[1] < w[0]), "{prof:?}");
        assert!(prof[9] < 1e-6);
        // only the last backward block survives: δ⁻¹ ∫_{5K−δ}^{5K} ‖S_r y‖ dr
        let c = 1.0 - (-1f64).exp();
        let exact = 4.0 * c * ((-49.75f64).exp() - (-50f64).exp());
        assert!((prof[9] - exact).abs() < 1e-3 * exact);
    }

    #[test]
    fn zero_function() {
        let p = build_periodic_point(&GridFunction::zero(32), 5, 0.25, 10, &l1e()).unwrap();
        assert!(p.z.is_zero());
        assert_eq!((p.periodic_defect, p.center_defect), (0.0, 0.0));
    }

    #[test]
    fn smaller_delta_tracks_target() {
        let y = GridFunction::indicator(32, 0.0, 1.0).unwrap();
        let wide = build_periodic_point(&y, 5, 0.5, 10, &l1e()).unwrap();
        let narrow = build_periodic_point(&y, 5, 1.0 / 16.0, 10, &l1e()).unwrap();
        assert!(narrow.center_to_target < wide.center_to_target);
        assert!(narrow.center_defect < 0.01);
    }

    #[test]
    fn hypotheses() {
        let y = GridFunction::indicator(32, 0.0, 1.0).unwrap();
        let rational = SpaceSpec::lp(1.0, Weight::rational()).unwrap();
        assert!(matches!(build_periodic_point(&y, 5, 0.25, 10, &rational), Err(FhcError::Hypothesis(_))));
        assert!(build_periodic_point(&y, 5, 0.3, 10, &l1e()).is_err());
        assert!(build_periodic_point(&y, 5, 1.5, 10, &l1e()).is_err());
    }
}
