//! Piecewise-constant functions on a uniform grid over `[0, ∞)` and the
//! translation semigroup acting on them.
//!
//! Cell `k` covers `[k h, (k+1) h)` with `h = 1 / cells_per_unit`, so every
//! integer time is an exact cell shift. Integrals of orbits over
//! grid-aligned time intervals are piecewise linear; they are stored as
//! exact cell averages, computed from the running integral
//! `F(x) = ∫_0^x f` whose cell averages are available in closed form.

use std::fmt;

use thiserror::Error;

use crate::weights::{Weight, WeightError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("time {t} is not a nonnegative multiple of the grid step {step}")]
    NotAligned { t: f64, step: f64 },
    #[error("grid step must be 1/n for a positive integer n, got {0}")]
    BadStep(f64),
    #[error("grid functions have different steps ({0} vs {1} cells per unit)")]
    StepMismatch(u32, u32),
    #[error("exponent p must be >= 1, got {0}")]
    BadExponent(f64),
    #[error("invalid grid function: {0}")]
    Invalid(String),
    #[error(transparent)]
    Weight(#[from] WeightError),
}

pub type Result<T> = std::result::Result<T, GridError>;

/// Compactly supported step function; `values.len()` is the support in
/// cells and the last stored value is nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    cells_per_unit: u32,
    values: Vec<f64>,
}

/// Ambient space: weighted `L^p` or weighted `C_0`.
#[derive(Debug, Clone, PartialEq)]
pub enum SpaceSpec {
    Lp { p: f64, weight: Weight },
    C0 { weight: Weight },
}

impl SpaceSpec {
    pub fn lp(p: f64, weight: Weight) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(GridError::BadExponent(p));
        }
        Ok(SpaceSpec::Lp { p, weight })
    }

    pub fn c0(weight: Weight) -> Self {
        SpaceSpec::C0 { weight }
    }

    pub fn weight(&self) -> &Weight {
        match self {
            SpaceSpec::Lp { weight, .. } | SpaceSpec::C0 { weight } => weight,
        }
    }

    /// Exponent used in the growth bound `‖T_t‖ ≤ (M e^{ωt})^{1/p}`; 1 for `C_0`.
    pub fn exponent(&self) -> f64 {
        match self {
            SpaceSpec::Lp { p, .. } => *p,
            SpaceSpec::C0 { .. } => 1.0,
        }
    }

    pub fn is_c0(&self) -> bool {
        matches!(self, SpaceSpec::C0 { .. })
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceSpec::Lp { p, weight } => write!(f, "L^{p}[{weight}]"),
            SpaceSpec::C0 { weight } => write!(f, "C0[{weight}]"),
        }
    }
}

/// Converts a grid step `h = 1/n` to `n`.
pub fn cells_per_unit(step: f64) -> Result<u32> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(GridError::BadStep(step));
    }
    let n = (1.0 / step).round();
    if (n * step - 1.0).abs() > 1e-9 || n > u32::MAX as f64 {
        return Err(GridError::BadStep(step));
    }
    Ok(n as u32)
}

impl GridFunction {
    pub fn new(cells_per_unit: u32, values: Vec<f64>) -> Result<Self> {
        if cells_per_unit == 0 {
            return Err(GridError::Invalid("cells_per_unit must be positive".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(GridError::Invalid("values must be finite".into()));
        }
        Ok(Self::from_raw(cells_per_unit, values))
    }

    fn from_raw(cells_per_unit: u32, mut values: Vec<f64>) -> Self {
        while values.last() == Some(&0.0) {
            values.pop();
        }
        GridFunction { cells_per_unit, values }
    }

    pub fn zero(cells_per_unit: u32) -> Self {
        GridFunction { cells_per_unit, values: Vec::new() }
    }

    /// Indicator of `[a, b)`; both ends must lie on the grid.
    pub fn indicator(cells_per_unit: u32, a: f64, b: f64) -> Result<Self> {
        let step = 1.0 / cells_per_unit as f64;
        let lo = grid_cells(a, cells_per_unit)?;
        let hi = grid_cells(b, cells_per_unit)?;
        if hi < lo {
            return Err(GridError::Invalid(format!("empty interval [{a}, {b}] (step {step})")));
        }
        let mut values = vec![0.0; hi];
        values[lo..hi].iter_mut().for_each(|v| *v = 1.0);
        Ok(Self::from_raw(cells_per_unit, values))
    }

    /// Parses `chi(a,b)`.
    pub fn parse_indicator(spec: &str, cells_per_unit: u32) -> Result<Self> {
        let s = spec.trim();
        let inner = s
            .strip_prefix("chi(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| GridError::Invalid(format!("expected chi(a,b), got '{s}'")))?;
        let mut parts = inner.split(',').map(str::trim);
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(GridError::Invalid(format!("expected two endpoints in '{s}'")));
        };
        let parse = |x: &str| {
            x.parse::<f64>().map_err(|_| GridError::Invalid(format!("bad endpoint '{x}' in '{s}'")))
        };
        Self::indicator(cells_per_unit, parse(a)?, parse(b)?)
    }

    pub fn cells_per_unit(&self) -> u32 {
        self.cells_per_unit
    }

    pub fn step(&self) -> f64 {
        1.0 / self.cells_per_unit as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn support_cells(&self) -> usize {
        self.values.len()
    }

    /// Right end of the support.
    pub fn support_end(&self) -> f64 {
        self.values.len() as f64 * self.step()
    }

    pub fn value(&self, cell: usize) -> f64 {
        self.values.get(cell).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Total variation on `[0, ∞)`, including the final drop to zero.
    pub fn total_variation(&self) -> f64 {
        let inner: f64 = self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
        inner + self.values.last().map_or(0.0, |v| v.abs())
    }

    fn check_step(&self, other: &Self) -> Result<()> {
        if self.cells_per_unit != other.cells_per_unit {
            return Err(GridError::StepMismatch(self.cells_per_unit, other.cells_per_unit));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_step(other)?;
        let n = self.values.len().max(other.values.len());
        let values = (0..n).map(|k| self.value(k) + other.value(k)).collect();
        Ok(Self::from_raw(self.cells_per_unit, values))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_step(other)?;
        let n = self.values.len().max(other.values.len());
        let values = (0..n).map(|k| self.value(k) - other.value(k)).collect();
        Ok(Self::from_raw(self.cells_per_unit, values))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_raw(self.cells_per_unit, self.values.iter().map(|v| c * v).collect())
    }

    /// Adds `other`, shifted right by `offset` cells, in place.
    pub fn add_shifted(&mut self, other: &Self, offset: usize) -> Result<()> {
        self.check_step(other)?;
        if other.values.is_empty() {
            return Ok(());
        }
        let need = offset + other.values.len();
        if self.values.len() < need {
            self.values.resize(need, 0.0);
        }
        for (k, v) in other.values.iter().enumerate() {
            self.values[offset + k] += v;
        }
        while self.values.last() == Some(&0.0) {
            self.values.pop();
        }
        Ok(())
    }

    /// Resamples onto a grid `factor` times finer (exact for step functions).
    pub fn refine(&self, factor: u32) -> Self {
        let values = self
            .values
            .iter()
            .flat_map(|&v| std::iter::repeat(v).take(factor as usize))
            .collect();
        Self::from_raw(self.cells_per_unit * factor, values)
    }

    /// Cell averages on a grid `factor` times coarser.
    pub fn coarsen(&self, factor: u32) -> Result<Self> {
        if factor == 0 || self.cells_per_unit % factor != 0 {
            return Err(GridError::Invalid(format!(
                "cannot coarsen {} cells per unit by {factor}",
                self.cells_per_unit
            )));
        }
        let f = factor as usize;
        let values = self
            .values
            .chunks(f)
            .map(|c| c.iter().sum::<f64>() / f as f64)
            .collect();
        Ok(Self::from_raw(self.cells_per_unit / factor, values))
    }

    /// Left shift by whole cells.
    pub fn translate_cells(&self, cells: usize) -> Self {
        let values = self.values.get(cells..).map(<[f64]>::to_vec).unwrap_or_default();
        GridFunction { cells_per_unit: self.cells_per_unit, values }
    }

    /// Right shift by whole cells with the section fill of `space`.
    pub fn backshift_cells(&self, cells: usize, space: &SpaceSpec) -> Self {
        if self.values.is_empty() {
            return self.clone();
        }
        let fill = if space.is_c0() { self.values[0] } else { 0.0 };
        let mut values = vec![fill; cells];
        values.extend_from_slice(&self.values);
        Self::from_raw(self.cells_per_unit, values)
    }

    /// Averages over cells `m` of the running integral `F(x) = ∫_0^x f`.
    fn running_integral(&self) -> RunningIntegral {
        let h = self.step();
        let mut nodes = Vec::with_capacity(self.values.len() + 1);
        let mut acc = 0.0;
        nodes.push(0.0);
        for v in &self.values {
            acc += h * v;
            nodes.push(acc);
        }
        RunningIntegral { nodes }
    }
}

/// Node values `F(m h)` of the running integral.
struct RunningIntegral {
    nodes: Vec<f64>,
}

impl RunningIntegral {
    /// Average of `F` over cell `m` (zero left of the origin, constant past the support).
    fn cell_average(&self, m: i64) -> f64 {
        if m < 0 {
            return 0.0;
        }
        let last = self.nodes.len() as i64 - 1;
        if m >= last {
            return self.nodes[last as usize];
        }
        0.5 * (self.nodes[m as usize] + self.nodes[m as usize + 1])
    }
}

/// Number of cells corresponding to a grid-aligned nonnegative time.
pub fn grid_cells(t: f64, cells_per_unit: u32) -> Result<usize> {
    let x = t * cells_per_unit as f64;
    let r = x.round();
    if !(t >= 0.0) || (x - r).abs() > 1e-9 * r.max(1.0) {
        return Err(GridError::NotAligned { t, step: 1.0 / cells_per_unit as f64 });
    }
    Ok(r as usize)
}

/// `T_t f (x) = f(x + t)`.
pub fn translate(f: &GridFunction, t: f64) -> Result<GridFunction> {
    Ok(f.translate_cells(grid_cells(t, f.cells_per_unit)?))
}

/// Section map `S_t`: right shift by `t`, filling `[0, t)` with 0 on `L^p`
/// and with `f(0)` on `C_0`.
pub fn backshift(f: &GridFunction, t: f64, space: &SpaceSpec) -> Result<GridFunction> {
    Ok(f.backshift_cells(grid_cells(t, f.cells_per_unit)?, space))
}

/// Per-cell weight data for a fixed space and grid: masses `∫_cell ρ` for
/// `L^p` and midpoint values `ρ((k + ½)h)` for `C_0`.
#[derive(Debug, Clone)]
pub struct CellWeights {
    cells_per_unit: u32,
    p: Option<f64>,
    cells: Vec<f64>,
    live: usize,
}

impl CellWeights {
    pub fn new(space: &SpaceSpec, cells_per_unit: u32, len: usize) -> Result<Self> {
        let h = 1.0 / cells_per_unit as f64;
        let w = space.weight();
        let (p, cells) = match space {
            SpaceSpec::Lp { p, .. } => (
                Some(*p),
                (0..len)
                    .map(|k| w.mass(k as f64 * h, (k + 1) as f64 * h))
                    .collect::<std::result::Result<Vec<_>, _>>()?,
            ),
            SpaceSpec::C0 { .. } => (
                None,
                (0..len)
                    .map(|k| w.eval((k as f64 + 0.5) * h))
                    .collect::<std::result::Result<Vec<_>, _>>()?,
            ),
        };
        let live = cells.iter().rposition(|&w| w != 0.0).map_or(0, |i| i + 1);
        Ok(CellWeights { cells_per_unit, p, cells, live })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Norm of a value slice starting at cell 0.
    pub fn norm_values(&self, values: &[f64]) -> f64 {
        self.norm_diff(values, &[])
    }

    /// `‖a − b‖` for value slices starting at cell 0; `b` may be shorter.
    pub fn norm_diff(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = a.len().max(b.len());
        assert!(n <= self.cells.len(), "cell weight table too short ({} < {n})", self.cells.len());
        // cells whose weight underflows to zero contribute nothing
        let a = &a[..a.len().min(self.live)];
        let b = &b[..b.len().min(self.live)];
        let n = n.min(self.live);
        let common = a.len().min(b.len());
        let rest = if a.len() > b.len() { &a[common..] } else { &b[common..] };
        let overlap = a[..common].iter().zip(&b[..common]).map(|(x, y)| x - y);
        let diffs = overlap.chain(rest.iter().copied()).zip(&self.cells[..n]);
        match self.p {
            Some(p) if p == 1.0 => diffs.map(|(d, w)| d.abs() * w).sum(),
            Some(p) => diffs.map(|(d, w)| d.abs().powf(p) * w).sum::<f64>().powf(1.0 / p),
            None => diffs.fold(0.0, |m, (d, w)| m.max(d.abs() * w)),
        }
    }

    pub fn norm(&self, f: &GridFunction) -> f64 {
        debug_assert_eq!(f.cells_per_unit, self.cells_per_unit);
        self.norm_values(&f.values)
    }
}

/// Weighted norm: `(Σ |v_k|^p ∫_{cell k} ρ)^{1/p}` on `L^p`,
/// `max |v_k| ρ(cell midpoint)` on `C_0`.
pub fn norm(f: &GridFunction, space: &SpaceSpec) -> Result<f64> {
    Ok(CellWeights::new(space, f.cells_per_unit, f.support_cells())?.norm(f))
}

pub fn distance(f: &GridFunction, g: &GridFunction, space: &SpaceSpec) -> Result<f64> {
    norm(&f.sub(g)?, space)
}

/// `∫_a^b T_t f dt` for grid-aligned `0 ≤ a ≤ b`, given in cells.
pub fn integral_forward_cells(f: &GridFunction, a: usize, b: usize) -> GridFunction {
    if f.is_zero() || b <= a || a >= f.support_cells() {
        return GridFunction::zero(f.cells_per_unit);
    }
    let run = f.running_integral();
    let len = f.support_cells() - a;
    let (a, b) = (a as i64, b as i64);
    let values = (0..len as i64)
        .map(|k| run.cell_average(k + b) - run.cell_average(k + a))
        .collect();
    GridFunction::from_raw(f.cells_per_unit, values)
}

/// `∫_a^b S_t f dt` for grid-aligned `0 ≤ a ≤ b`, given in cells.
pub fn integral_backward_cells(f: &GridFunction, a: usize, b: usize, space: &SpaceSpec) -> GridFunction {
    if f.is_zero() || b <= a {
        return GridFunction::zero(f.cells_per_unit);
    }
    let run = f.running_integral();
    let len = f.support_cells() + b;
    let (ai, bi) = (a as i64, b as i64);
    let mut values: Vec<f64> = (0..len as i64)
        .map(|k| run.cell_average(k - ai) - run.cell_average(k - bi))
        .collect();
    if space.is_c0() {
        // f(0) · |{t ∈ [a, b] : t > s}|, averaged over each cell
        let f0 = f.values[0];
        let h = f.step();
        let width = (b - a) as f64 * h;
        let end = b as f64 * h;
        for (k, v) in values.iter_mut().enumerate() {
            if k < a {
                *v += f0 * width;
            } else if k < b {
                *v += f0 * (end - (k as f64 + 0.5) * h);
            }
        }
    }
    GridFunction::from_raw(f.cells_per_unit, values)
}

/// `∫_a^b T_t f dt` for grid-aligned times.
pub fn integral_forward(f: &GridFunction, a: f64, b: f64) -> Result<GridFunction> {
    let n = f.cells_per_unit;
    Ok(integral_forward_cells(f, grid_cells(a, n)?, grid_cells(b, n)?))
}

/// `∫_a^b S_t f dt` for grid-aligned times.
pub fn integral_backward(f: &GridFunction, a: f64, b: f64, space: &SpaceSpec) -> Result<GridFunction> {
    let n = f.cells_per_unit;
    Ok(integral_backward_cells(f, grid_cells(a, n)?, grid_cells(b, n)?, space))
}

/// `∫_n^{n+1} S_t f dt`.
pub fn block_integral_s(f: &GridFunction, n: u64, space: &SpaceSpec) -> GridFunction {
    let c = f.cells_per_unit as usize;
    integral_backward_cells(f, n as usize * c, (n as usize + 1) * c, space)
}

/// `R y = ∫_0^1 T_t y dt`, i.e. `(R y)(s) = ∫_s^{s+1} y`.
pub fn smoothing(y: &GridFunction) -> GridFunction {
    integral_forward_cells(y, 0, y.cells_per_unit as usize)
}

/// `∫_n^{n+1} T_t f dt`.
pub fn block_integral_t(f: &GridFunction, n: u64) -> GridFunction {
    let c = f.cells_per_unit as usize;
    integral_forward_cells(f, n as usize * c, (n as usize + 1) * c)
}
