use crate::gridfn::{block_integral_s, block_integral_t, smoothing, CellWeights, GridFunction, SpaceSpec};

use super::family::{build_family, SeparatedFamily};
use super::tail::{tail_integral, tail_threshold, Direction};
use super::{FhcError, Result};

/// Constant `C` of the discretization slack `C·h·max TV(y_l)` added to the
/// return budgets.
pub const DISCRETIZATION_CONSTANT: f64 = 32.0;

/// Tail tolerance `1/(l·2^l)` of level `l`.
pub fn level_tolerance(l: usize) -> f64 {
    1.0 / (l as f64 * 2f64.powi(l as i32))
}

/// Return budget `4/2^l` of level `l`.
pub fn level_budget(l: usize) -> f64 {
    4.0 / 2f64.powi(l as i32)
}

/// Truncation of `x = Σ_{n≥1} ∫_n^{n+1} S_t z_n dt` at `n ≤ horizon`, with
/// `z_n = y_l` for `n ∈ A(l)` and `z_n = 0` otherwise.
#[derive(Debug, Clone)]
pub struct FhcVector {
    pub x: GridFunction,
    pub family: SeparatedFamily,
    pub targets: Vec<GridFunction>,
    /// `u_l = R y_l`.
    pub smoothed: Vec<GridFunction>,
    /// Largest real tail threshold over `λ ≤ l` and both orbit directions.
    pub raw_thresholds: Vec<f64>,
    /// Integer thresholds `N_l` (the separation parameters of the family).
    pub thresholds: Vec<u64>,
    pub horizon: u64,
    pub space: SpaceSpec,
    /// `Σ_{n ≤ H} ‖∫_n^{n+1} S_t z_n dt‖`.
    pub block_norm_sum: f64,
    /// Bound on the norm of the omitted part `n > H`.
    pub truncation_bound: f64,
}

impl FhcVector {
    /// `z_n`, if `n` belongs to some level.
    pub fn z(&self, n: u64) -> Option<&GridFunction> {
        if n == 0 || n > self.horizon {
            return None;
        }
        self.family.level_of(n).map(|l| &self.targets[l - 1])
    }

    pub fn cells_per_unit(&self) -> u32 {
        self.targets[0].cells_per_unit()
    }

    pub fn max_support(&self) -> f64 {
        self.targets.iter().map(GridFunction::support_end).fold(0.0, f64::max)
    }

    pub fn max_total_variation(&self) -> f64 {
        self.targets.iter().map(GridFunction::total_variation).fold(0.0, f64::max)
    }

    /// `C·h·max TV(y_l)`.
    pub fn discretization_slack(&self) -> f64 {
        DISCRETIZATION_CONSTANT * self.targets[0].step() * self.max_total_variation()
    }
}

pub fn build_vector(targets: &[GridFunction], space: &SpaceSpec, horizon: u64) -> Result<FhcVector> {
    let first = targets.first().ok_or_else(|| FhcError::Invalid("at least one target is required".into()))?;
    let cpu = first.cells_per_unit();
    if let Some(t) = targets.iter().find(|t| t.cells_per_unit() != cpu) {
        return Err(crate::gridfn::GridError::StepMismatch(cpu, t.cells_per_unit()).into());
    }

    let mut raw_thresholds = Vec::with_capacity(targets.len());
    let mut thresholds = Vec::with_capacity(targets.len());
    let mut running = 1u64;
    let mut running_raw = 0.0f64;
    for l in 1..=targets.len() {
        let tol = level_tolerance(l);
        for y in &targets[..l] {
            for dir in [Direction::Backward, Direction::Forward] {
                let th = tail_threshold(y, space, tol, dir)?;
                running = running.max(th.integer);
                running_raw = running_raw.max(th.real);
            }
        }
        raw_thresholds.push(running_raw);
        thresholds.push(running);
    }
    let family = build_family(&thresholds, horizon)?;

    let mut x = GridFunction::zero(cpu);
    let len = (horizon as usize + 1) * cpu as usize + targets.iter().map(|t| t.support_cells()).max().unwrap_or(0);
    let table = CellWeights::new(space, cpu, len)?;
    let mut block_norm_sum = 0.0;
    for n in 1..=horizon {
        if let Some(l) = family.level_of(n) {
            let block = block_integral_s(&targets[l - 1], n, space);
            block_norm_sum += table.norm(&block);
            x.add_shifted(&block, 0)?;
        }
    }
    let mut truncation_bound = 0.0;
    for y in targets {
        truncation_bound += tail_integral(y, space, Direction::Backward, (horizon + 1) as f64)?;
    }
    Ok(FhcVector {
        x,
        family,
        targets: targets.to_vec(),
        smoothed: targets.iter().map(smoothing).collect(),
        raw_thresholds,
        thresholds,
        horizon,
        space: space.clone(),
        block_norm_sum,
        truncation_bound,
    })
}

/// Split of `T_{n+1} x` into the blocks with `m < n`, the block `m = n`
/// (which is `u_l` when `n ∈ A(l)`) and the blocks with `m > n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    /// `Σ_{m<n} ∫_{n−m}^{n−m+1} T_s z_m ds`.
    pub past: GridFunction,
    pub present: GridFunction,
    /// `Σ_{m>n} ∫_{m−n−1}^{m−n} S_r z_m dr`.
    pub future: GridFunction,
}

impl Decomposition {
    pub fn total(&self) -> Result<GridFunction> {
        Ok(self.past.add(&self.present)?.add(&self.future)?)
    }
}

pub fn orbit_decomposition(v: &FhcVector, n: u64) -> Result<Decomposition> {
    let cpu = v.cells_per_unit();
    let mut past = GridFunction::zero(cpu);
    let mut future = GridFunction::zero(cpu);
    for m in 1..n.min(v.horizon + 1) {
        if let Some(z) = v.z(m) {
            past.add_shifted(&block_integral_t(z, n - m), 0)?;
        }
    }
    let present = v.z(n).map_or_else(|| GridFunction::zero(cpu), |z| block_integral_t(z, 0));
    for m in n + 1..=v.horizon {
        if let Some(z) = v.z(m) {
            future.add_shifted(&block_integral_s(z, m - n - 1, &v.space), 0)?;
        }
    }
    Ok(Decomposition { past, present, future })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelReturn {
    pub level: usize,
    pub threshold: u64,
    pub period: u64,
    pub offset: u64,
    pub checked: usize,
    pub max_error: f64,
    pub argmax: u64,
    pub budget: f64,
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnReport {
    pub check_horizon: u64,
    pub levels: Vec<LevelReturn>,
    pub all_pass: bool,
}

/// Checks `‖T_{n+1} x − u_l‖ < 4/2^l + slack` for every `n ∈ A(l)` up to
/// `check_horizon`.
pub fn verify_returns(v: &FhcVector, check_horizon: u64) -> Result<ReturnReport> {
    let reach = v.max_support().ceil() as u64 + 1;
    if check_horizon + reach > v.horizon {
        return Err(FhcError::Invalid(format!(
            "check horizon {check_horizon} exceeds construction horizon {} minus support reach {reach}",
            v.horizon
        )));
    }
    let cpu = v.cells_per_unit() as usize;
    let len = v.x.support_cells().max(v.smoothed.iter().map(|u| u.support_cells()).max().unwrap_or(0));
    let table = CellWeights::new(&v.space, cpu as u32, len)?;
    let slack = v.discretization_slack();
    let mut levels = Vec::with_capacity(v.family.levels());
    for l in 1..=v.family.levels() {
        let u = v.smoothed[l - 1].values();
        let mut max_error = 0.0f64;
        let mut argmax = 0;
        let members = v.family.members(l, check_horizon);
        for &n in &members {
            let start = ((n + 1) as usize * cpu).min(v.x.support_cells());
            let e = table.norm_diff(&v.x.values()[start..], u);
            if e > max_error {
                max_error = e;
                argmax = n;
            }
        }
        let budget = level_budget(l);
        levels.push(LevelReturn {
            level: l,
            threshold: v.family.nu(l),
            period: v.family.period(),
            offset: v.family.offset(l),
            checked: members.len(),
            max_error,
            argmax,
            budget,
            slack,
            pass: max_error < budget + slack,
        });
    }
    let all_pass = levels.iter().all(|r| r.pass);
    Ok(ReturnReport { check_horizon, levels, all_pass })
}
