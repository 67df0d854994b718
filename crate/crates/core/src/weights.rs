//! Weight functions on `[0, ∞)`: evaluation, admissibility certificates,
//! local comparison constants and the summability / integrability tests
//! that decide chaos for translation semigroups.

use std::f64::consts::SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature;

/// Partial integrals above this value count as evidence of divergence.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("t = {t} lies beyond the sampled range [0, {horizon}] and no tail descriptor is available")]
    OutOfRange { t: f64, horizon: f64 },
    #[error("weight evaluated at negative argument {0}")]
    Negative(f64),
    #[error("non-positive weight value {value} at t = {t}")]
    NonPositive { t: f64, value: f64 },
    #[error("invalid weight parameter: {0}")]
    InvalidParameter(String),
    #[error("weight is not admissible: {0}")]
    NotAdmissible(String),
    #[error("invalid scan parameters: {0}")]
    InvalidScan(String),
    #[error("set has a gap of {gap} exceeding the declared bound {bound}")]
    GapTooLarge { gap: u64, bound: u64 },
}

pub type Result<T> = std::result::Result<T, WeightError>;

/// Closed-form comparison function used to describe the behaviour of a
/// weight beyond a horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Envelope {
    /// `c · e^{-rate·s}`
    Exp { c: f64, rate: f64 },
    /// `c · (1 + s)^{-q}`
    Power { c: f64, q: f64 },
}

impl Envelope {
    pub fn eval(&self, s: f64) -> f64 {
        self.ln_eval(s).exp()
    }

    pub fn ln_eval(&self, s: f64) -> f64 {
        match *self {
            Envelope::Exp { c, rate } => c.ln() - rate * s,
            Envelope::Power { c, q } => c.ln() - q * s.ln_1p(),
        }
    }

    fn decay(&self) -> f64 {
        match *self {
            Envelope::Exp { rate, .. } => rate,
            Envelope::Power { q, .. } => q,
        }
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.decay() >= 0.0
    }

    pub fn vanishes_at_infinity(&self) -> bool {
        self.decay() > 0.0
    }

    pub fn is_unbounded(&self) -> bool {
        self.decay() < 0.0
    }

    /// `env^{1/p}`, again an envelope of the same family.
    pub fn root(&self, p: f64) -> Envelope {
        match *self {
            Envelope::Exp { c, rate } => Envelope::Exp { c: c.powf(1.0 / p), rate: rate / p },
            Envelope::Power { c, q } => Envelope::Power { c: c.powf(1.0 / p), q: q / p },
        }
    }

    /// Exact `∫_a^b env`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        match *self {
            Envelope::Exp { c, rate } if rate == 0.0 => c * (b - a),
            Envelope::Exp { c, rate } => c * (-rate * a).exp() * -(-rate * (b - a)).exp_m1() / rate,
            Envelope::Power { c, q } if q == 1.0 => c * ((b - a) / (1.0 + a)).ln_1p(),
            Envelope::Power { c, q } => {
                c * ((1.0 + b).powf(1.0 - q) - (1.0 + a).powf(1.0 - q)) / (1.0 - q)
            }
        }
    }

    /// `∫_from^∞ env`, `+∞` when not integrable.
    pub fn tail_integral(&self, from: f64) -> f64 {
        match *self {
            Envelope::Exp { c, rate } if rate > 0.0 => c * (-rate * from).exp() / rate,
            Envelope::Power { c, q } if q > 1.0 => c * (1.0 + from).powf(1.0 - q) / (q - 1.0),
            _ => f64::INFINITY,
        }
    }

    /// Bracket for `Σ_{k≥0} env(first + k·stride)`. Exact for exponentials;
    /// integral comparison for nonincreasing power laws.
    pub fn lattice_sum_bounds(&self, first: f64, stride: f64) -> (f64, f64) {
        match *self {
            Envelope::Exp { c, rate } if rate > 0.0 => {
                let v = c * (-rate * first).exp() / -(-rate * stride).exp_m1();
                (v, v)
            }
            Envelope::Power { q, .. } if q > 1.0 => {
                let integral = self.tail_integral(first) / stride;
                (integral, self.eval(first) + integral)
            }
            _ => (f64::INFINITY, f64::INFINITY),
        }
    }
}

/// Analytic information about `ρ` beyond `horizon`: `lower ≤ ρ ≤ upper`
/// everywhere past the horizon, `ρ ≥ peaks` along some sequence tending to
/// infinity and `ρ ≤ troughs` along some sequence tending to infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailDescriptor {
    pub horizon: f64,
    pub upper: Envelope,
    pub lower: Envelope,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peaks: Option<Envelope>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub troughs: Option<Envelope>,
}

impl TailDescriptor {
    pub fn exact(horizon: f64, env: Envelope) -> Self {
        TailDescriptor { horizon, upper: env, lower: env, peaks: None, troughs: None }
    }

    pub fn peaks(&self) -> Envelope {
        self.peaks.unwrap_or(self.lower)
    }

    pub fn troughs(&self) -> Envelope {
        self.troughs.unwrap_or(self.upper)
    }
}

/// Admissibility certificate `ρ(τ) ≤ M e^{ωt} ρ(τ + t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub m: f64,
    pub omega: f64,
}

/// Weight tabulated at `i·step`, linearly interpolated in between.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWeight {
    pub step: f64,
    pub values: Vec<f64>,
    pub tail: Option<TailDescriptor>,
}

impl SampledWeight {
    pub fn horizon(&self) -> f64 {
        self.step * (self.values.len() - 1) as f64
    }

    fn interpolate(&self, t: f64) -> f64 {
        let last = self.values.len() - 1;
        let pos = t / self.step;
        let i = (pos.floor() as usize).min(last - 1);
        let frac = (pos - i as f64).clamp(0.0, 1.0);
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }

    fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    /// `e^{-rate·s}`
    Exponential { rate: f64 },
    /// `1 / (1 + s)`
    Rational,
    Constant { value: f64 },
    /// `e^{-φ(s)}` with `φ(s) = s sin(log s)` for `s ≥ 1` and `φ(s) = s - 1` below.
    SinLog,
    Sampled(SampledWeight),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    kind: WeightKind,
    certificate: Option<Certificate>,
}

fn sinlog_phi(s: f64) -> f64 {
    if s < 1.0 {
        s - 1.0
    } else {
        s * s.ln().sin()
    }
}

impl Weight {
    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(WeightError::InvalidParameter(format!("exponential rate must be > 0, got {rate}")));
        }
        Ok(Weight {
            kind: WeightKind::Exponential { rate },
            certificate: Some(Certificate { m: 1.0, omega: rate }),
        })
    }

    pub fn rational() -> Self {
        Weight { kind: WeightKind::Rational, certificate: Some(Certificate { m: 1.0, omega: 1.0 }) }
    }

    pub fn constant(value: f64) -> Result<Self> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(WeightError::InvalidParameter(format!("constant weight must be > 0, got {value}")));
        }
        Ok(Weight {
            kind: WeightKind::Constant { value },
            certificate: Some(Certificate { m: 1.0, omega: 0.0 }),
        })
    }

    /// `|φ'| ≤ √2` gives the certificate `(1, √2)`.
    pub fn sinlog() -> Self {
        Weight { kind: WeightKind::SinLog, certificate: Some(Certificate { m: 1.0, omega: SQRT_2 }) }
    }

    pub fn sampled(step: f64, values: Vec<f64>, tail: Option<TailDescriptor>) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(WeightError::InvalidParameter(format!("sample step must be > 0, got {step}")));
        }
        if values.len() < 2 {
            return Err(WeightError::InvalidParameter("a sampled weight needs at least two values".into()));
        }
        if let Some((i, &v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(WeightError::NonPositive { t: step * i as f64, value: v });
        }
        Ok(Weight { kind: WeightKind::Sampled(SampledWeight { step, values, tail }), certificate: None })
    }

    pub fn with_certificate(mut self, certificate: Option<Certificate>) -> Self {
        self.certificate = certificate;
        self
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn certificate(&self) -> Option<Certificate> {
        self.certificate
    }

    pub fn name(&self) -> String {
        self.to_string()
    }

    /// Largest argument the weight can be evaluated at, if any.
    pub fn range_limit(&self) -> Option<f64> {
        match &self.kind {
            WeightKind::Sampled(s) if s.tail.is_none() => Some(s.horizon()),
            _ => None,
        }
    }

    pub fn ln_eval(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(WeightError::Negative(t));
        }
        Ok(match &self.kind {
            WeightKind::Exponential { rate } => -rate * t,
            WeightKind::Rational => -t.ln_1p(),
            WeightKind::Constant { value } => value.ln(),
            WeightKind::SinLog => -sinlog_phi(t),
            WeightKind::Sampled(s) => {
                if t <= s.horizon() {
                    s.interpolate(t).ln()
                } else if let Some(tail) = &s.tail {
                    tail.upper.ln_eval(t)
                } else {
                    return Err(WeightError::OutOfRange { t, horizon: s.horizon() });
                }
            }
        })
    }

    /// `ρ(t)`. Overflows to `+∞` for unbounded weights far out; use
    /// [`Weight::ln_eval`] there.
    pub fn eval(&self, t: f64) -> Result<f64> {
        match &self.kind {
            WeightKind::Sampled(s) if t >= 0.0 && t <= s.horizon() => Ok(s.interpolate(t)),
            _ => Ok(self.ln_eval(t)?.exp()),
        }
    }

    /// `∫_a^b ρ`, exact for closed forms and for the piecewise-linear
    /// sampled table (midpoint rule per sample interval).
    pub fn mass(&self, a: f64, b: f64) -> Result<f64> {
        if a < 0.0 {
            return Err(WeightError::Negative(a));
        }
        if b <= a {
            return Ok(0.0);
        }
        Ok(match &self.kind {
            WeightKind::Exponential { rate } => Envelope::Exp { c: 1.0, rate: *rate }.integral(a, b),
            WeightKind::Rational => ((b - a) / (1.0 + a)).ln_1p(),
            WeightKind::Constant { value } => value * (b - a),
            WeightKind::SinLog => {
                let f = |s: f64| (-sinlog_phi(s)).exp();
                let piece = |lo: f64, hi: f64| {
                    let n = ((hi - lo) / 0.125).ceil().max(1.0) as usize;
                    quadrature::composite(f, lo, hi, n)
                };
                if a < 1.0 && b > 1.0 {
                    piece(a, 1.0) + piece(1.0, b)
                } else {
                    piece(a, b)
                }
            }
            WeightKind::Sampled(s) => {
                let horizon = s.horizon();
                let mut acc = 0.0;
                let mut lo = a;
                while lo < b.min(horizon) {
                    let node = ((lo / s.step).floor() + 1.0) * s.step;
                    let hi = node.min(b).min(horizon);
                    acc += (hi - lo) * s.interpolate(0.5 * (lo + hi));
                    lo = hi;
                }
                if b > horizon {
                    match &s.tail {
                        Some(tail) => acc += tail.upper.integral(a.max(horizon), b),
                        None => return Err(WeightError::OutOfRange { t: b, horizon }),
                    }
                }
                acc
            }
        })
    }

    pub fn tail(&self) -> Option<TailDescriptor> {
        match &self.kind {
            WeightKind::Exponential { rate } => {
                Some(TailDescriptor::exact(0.0, Envelope::Exp { c: 1.0, rate: *rate }))
            }
            WeightKind::Rational => Some(TailDescriptor::exact(0.0, Envelope::Power { c: 1.0, q: 1.0 })),
            WeightKind::Constant { value } => {
                Some(TailDescriptor::exact(0.0, Envelope::Exp { c: *value, rate: 0.0 }))
            }
            // -s ≤ φ(s) ≤ s on [1, ∞) with equality along e^{π/2 + 2πk}
            // (upper) and e^{3π/2 + 2πk} (lower).
            WeightKind::SinLog => Some(TailDescriptor {
                horizon: 1.0,
                upper: Envelope::Exp { c: 1.0, rate: -1.0 },
                lower: Envelope::Exp { c: 1.0, rate: 1.0 },
                peaks: Some(Envelope::Exp { c: 1.0, rate: -1.0 }),
                troughs: Some(Envelope::Exp { c: 1.0, rate: 1.0 }),
            }),
            WeightKind::Sampled(s) => s.tail.clone(),
        }
    }

    /// Global Lipschitz constant of `ln ρ`.
    pub fn log_lipschitz(&self) -> f64 {
        match &self.kind {
            WeightKind::Exponential { rate } => *rate,
            WeightKind::Rational => 1.0,
            WeightKind::Constant { .. } => 0.0,
            WeightKind::SinLog => SQRT_2,
            WeightKind::Sampled(s) => {
                let table = s
                    .values
                    .windows(2)
                    .map(|w| (w[1] - w[0]).abs() / (s.step * w[0].min(w[1])))
                    .fold(0.0, f64::max);
                let tail = s.tail.as_ref().map_or(0.0, |t| match t.upper {
                    Envelope::Exp { rate, .. } => rate.abs(),
                    Envelope::Power { q, .. } => q.abs(),
                });
                table.max(tail)
            }
        }
    }

    /// Log-convex and nonincreasing: comparison ratios over a window are
    /// extremal at the window endpoints and at `σ = 0`.
    pub(crate) fn is_log_convex_nonincreasing(&self) -> bool {
        matches!(
            self.kind,
            WeightKind::Exponential { .. } | WeightKind::Rational | WeightKind::Constant { .. }
        )
    }

    pub(crate) fn is_nonincreasing(&self) -> bool {
        match &self.kind {
            WeightKind::SinLog => false,
            WeightKind::Sampled(s) => {
                s.is_nonincreasing() && s.tail.as_ref().map_or(true, |t| t.upper.is_nonincreasing())
            }
            _ => true,
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            WeightKind::Exponential { rate } => write!(f, "exponential({rate})"),
            WeightKind::Rational => write!(f, "rational"),
            WeightKind::Constant { value } => write!(f, "constant({value})"),
            WeightKind::SinLog => write!(f, "sinlog"),
            WeightKind::Sampled(s) => write!(f, "sampled(step={}, n={})", s.step, s.values.len()),
        }
    }
}

/// Evaluates `ρ(t)`.
pub fn eval_weight(w: &Weight, t: f64) -> Result<f64> {
    w.eval(t)
}

/// Outcome of an admissibility check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Admissibility {
    Certified(Certificate),
    /// Witness pair where the declared certificate fails.
    Violated { tau: f64, t: f64 },
}

struct ScanGrid {
    step: f64,
    n_tau: usize,
    n_t: usize,
    ln: Vec<f64>,
}

fn scan_grid(w: &Weight, tau_max: f64, t_max: f64, grid_step: f64) -> Result<ScanGrid> {
    if !(tau_max > 0.0 && t_max > 0.0 && grid_step > 0.0) {
        return Err(WeightError::InvalidScan(format!(
            "tau_max, t_max and grid_step must be positive (got {tau_max}, {t_max}, {grid_step})"
        )));
    }
    let n_tau = (tau_max / grid_step + 1e-9).floor() as usize;
    let n_t = ((t_max / grid_step + 1e-9).floor() as usize).max(1);
    let ln = (0..=n_tau + n_t)
        .map(|i| {
            let t = i as f64 * grid_step;
            let v = w.ln_eval(t)?;
            if v.is_nan() || v == f64::NEG_INFINITY {
                return Err(WeightError::NonPositive { t, value: v.exp() });
            }
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanGrid { step: grid_step, n_tau, n_t, ln })
}

/// Grid estimate of an admissibility certificate: `M = 1`,
/// `ω = max(0, sup (ln ρ(τ) − ln ρ(τ+t)) / t)`, then `M` raised to absorb
/// any residual violation.
pub fn estimate_certificate(w: &Weight, tau_max: f64, t_max: f64, grid_step: f64) -> Result<Certificate> {
    let g = scan_grid(w, tau_max, t_max, grid_step)?;
    let mut omega: f64 = 0.0;
    for i in 0..=g.n_tau {
        for j in 1..=g.n_t {
            omega = omega.max((g.ln[i] - g.ln[i + j]) / (j as f64 * g.step));
        }
    }
    let mut ln_m: f64 = 0.0;
    for i in 0..=g.n_tau {
        for j in 1..=g.n_t {
            ln_m = ln_m.max(g.ln[i] - g.ln[i + j] - omega * j as f64 * g.step);
        }
    }
    if !omega.is_finite() || !ln_m.is_finite() {
        return Err(WeightError::NotAdmissible("growth quotient is not finite on the scan grid".into()));
    }
    Ok(Certificate { m: ln_m.exp(), omega })
}

/// Verifies the weight's declared certificate on the grid, or estimates one
/// when none is declared.
pub fn check_admissible(w: &Weight, tau_max: f64, t_max: f64, grid_step: f64) -> Result<Admissibility> {
    let Some(cert) = w.certificate() else {
        return estimate_certificate(w, tau_max, t_max, grid_step).map(Admissibility::Certified);
    };
    if cert.m < 1.0 {
        return Err(WeightError::InvalidParameter(format!("certificate M must be >= 1, got {}", cert.m)));
    }
    let g = scan_grid(w, tau_max, t_max, grid_step)?;
    let ln_m = cert.m.ln();
    for i in 0..=g.n_tau {
        for j in 1..=g.n_t {
            let t = j as f64 * g.step;
            let lhs = g.ln[i] - g.ln[i + j];
            let rhs = ln_m + cert.omega * t;
            if lhs > rhs + 1e-12 * (1.0 + g.ln[i].abs()) {
                return Ok(Admissibility::Violated { tau: i as f64 * g.step, t });
            }
        }
    }
    Ok(Admissibility::Certified(cert))
}

/// Constants with `A ρ(σ) ≤ ρ(t) ≤ B ρ(σ + l)` for `t ∈ [σ, σ + l]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalBounds {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

/// Certificate-derived bounds, tightened by a grid scan over
/// `σ ∈ [0, σ_max]`. The scan is widened by the log-Lipschitz modulus
/// unless the weight is log-convex and nonincreasing.
pub fn local_bounds(w: &Weight, l: f64, sigma_max: f64, grid_step: f64) -> Result<LocalBounds> {
    if !(l > 0.0 && sigma_max >= 0.0 && grid_step > 0.0) {
        return Err(WeightError::InvalidScan(format!(
            "need l > 0, sigma_max >= 0, grid_step > 0 (got {l}, {sigma_max}, {grid_step})"
        )));
    }
    let cert = match check_admissible(w, sigma_max.max(grid_step) + l, l, grid_step)? {
        Admissibility::Certified(c) => c,
        Admissibility::Violated { tau, t } => {
            return Err(WeightError::NotAdmissible(format!(
                "declared certificate fails at tau = {tau}, t = {t}"
            )))
        }
    };
    let growth = cert.m * (cert.omega.max(0.0) * l).exp();
    let (a_cert, b_cert) = (1.0 / growth, growth);

    let sub = (l / grid_step).ceil().max(1.0) as usize;
    let dt = l / sub as f64;
    let n_sigma = (sigma_max / grid_step + 1e-9).floor() as usize;
    let mut ln_a = f64::INFINITY;
    let mut ln_b = f64::NEG_INFINITY;
    for i in 0..=n_sigma {
        let sigma = i as f64 * grid_step;
        let ln_start = w.ln_eval(sigma)?;
        let ln_end = w.ln_eval(sigma + l)?;
        for j in 0..=sub {
            let t = if j == sub { sigma + l } else { sigma + j as f64 * dt };
            let ln_t = w.ln_eval(t)?;
            ln_a = ln_a.min(ln_t - ln_start);
            ln_b = ln_b.max(ln_t - ln_end);
        }
    }
    if !w.is_log_convex_nonincreasing() {
        let widen = w.log_lipschitz() * (grid_step + dt);
        ln_a -= widen;
        ln_b += widen;
    }
    Ok(LocalBounds { l, a: a_cert.max(ln_a.exp()), b: b_cert.min(ln_b.exp()) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convergence {
    Converges,
    Diverges,
    Inconclusive,
}

impl fmt::Display for Convergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convergence::Converges => "converges",
            Convergence::Diverges => "diverges",
            Convergence::Inconclusive => "inconclusive",
        })
    }
}

/// Verdict on `∫_0^∞ ρ` or on a lattice series of `ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestVerdict {
    pub verdict: Convergence,
    /// Finite part computed directly.
    pub partial: f64,
    /// Where the directly computed part stops.
    pub cutoff: f64,
    /// Bracket for the remainder (`+∞` when unbounded or unknown).
    pub tail_lower: f64,
    pub tail_upper: f64,
    pub reason: String,
}

impl TestVerdict {
    /// Point estimate of the full value when convergent.
    pub fn value(&self) -> Option<f64> {
        (self.verdict == Convergence::Converges)
            .then(|| self.partial + 0.5 * (self.tail_lower + self.tail_upper))
    }

    pub fn bracket_width(&self) -> f64 {
        self.tail_upper - self.tail_lower
    }
}

/// Decides whether `∫_0^∞ ρ < ∞`. `tol` is the largest acceptable width of
/// the value bracket for a `Converges` verdict to count as sharp; a wider
/// bracket is still reported as convergent but noted in `reason`.
pub fn integral_test(w: &Weight, horizon: f64, tol: f64) -> Result<TestVerdict> {
    if !(horizon > 0.0) {
        return Err(WeightError::InvalidScan(format!("horizon must be > 0, got {horizon}")));
    }
    let tail = w.tail();
    let cutoff = match (&tail, w.range_limit()) {
        (Some(t), _) => horizon.max(t.horizon),
        (None, Some(limit)) => horizon.min(limit),
        (None, None) => horizon,
    };
    let partial = w.mass(0.0, cutoff)?;
    let mut out = TestVerdict {
        verdict: Convergence::Inconclusive,
        partial,
        cutoff,
        tail_lower: 0.0,
        tail_upper: f64::INFINITY,
        reason: String::new(),
    };
    if let Some(t) = tail {
        out.tail_lower = t.lower.tail_integral(cutoff);
        out.tail_upper = t.upper.tail_integral(cutoff);
        if out.tail_lower.is_infinite() {
            out.verdict = Convergence::Diverges;
            out.reason = "lower tail envelope is not integrable".into();
            return Ok(out);
        }
        if t.peaks().is_unbounded() {
            out.verdict = Convergence::Diverges;
            out.tail_upper = f64::INFINITY;
            out.reason = "weight is unbounded; an admissible weight then has infinite tail mass".into();
            return Ok(out);
        }
        if out.tail_upper.is_finite() {
            out.verdict = Convergence::Converges;
            out.reason = if out.bracket_width() <= tol {
                "upper tail envelope is integrable".into()
            } else {
                format!("upper tail envelope is integrable; value bracket {} exceeds tol", out.bracket_width())
            };
            return Ok(out);
        }
    }
    if !partial.is_finite() || partial > DIVERGENCE_THRESHOLD {
        out.verdict = Convergence::Diverges;
        out.reason = format!("partial integral exceeds divergence threshold {DIVERGENCE_THRESHOLD:e}");
    } else {
        out.reason = "no analytic tail information".into();
    }
    Ok(out)
}

/// Verdict on `Σ_{k≥1} ρ(b + kP)`, summing directly while `b + kP ≤ horizon`.
pub fn series_test(w: &Weight, offset: f64, stride: f64, horizon: u64) -> Result<TestVerdict> {
    if !(stride > 0.0) || offset < 0.0 {
        return Err(WeightError::InvalidScan(format!("need stride > 0 and offset >= 0 (got {stride}, {offset})")));
    }
    let tail = w.tail();
    let mut end = horizon as f64;
    if let Some(t) = &tail {
        end = end.max(t.horizon);
    } else if let Some(limit) = w.range_limit() {
        end = end.min(limit);
    }
    let mut partial = 0.0;
    let mut k: u64 = 1;
    while offset + k as f64 * stride <= end {
        partial += w.eval(offset + k as f64 * stride)?;
        k += 1;
    }
    let first = offset + k as f64 * stride;
    let mut out = TestVerdict {
        verdict: Convergence::Inconclusive,
        partial,
        cutoff: first - stride,
        tail_lower: 0.0,
        tail_upper: f64::INFINITY,
        reason: String::new(),
    };
    if let Some(t) = tail {
        if t.lower.tail_integral(first).is_infinite() {
            out.verdict = Convergence::Diverges;
            out.tail_lower = f64::INFINITY;
            out.reason = "lower tail envelope is not summable along the lattice".into();
            return Ok(out);
        }
        if t.peaks().is_unbounded() {
            out.verdict = Convergence::Diverges;
            out.tail_lower = f64::INFINITY;
            out.reason = "weight is unbounded; local comparison makes lattice terms unbounded".into();
            return Ok(out);
        }
        let (lo, _) = t.lower.lattice_sum_bounds(first, stride);
        let (_, hi) = if t.upper.is_nonincreasing() {
            t.upper.lattice_sum_bounds(first, stride)
        } else {
            (f64::INFINITY, f64::INFINITY)
        };
        out.tail_lower = lo;
        out.tail_upper = hi;
        if hi.is_finite() {
            out.verdict = Convergence::Converges;
            out.reason = "upper tail envelope is summable along the lattice".into();
            return Ok(out);
        }
    }
    if !partial.is_finite() || partial > DIVERGENCE_THRESHOLD {
        out.verdict = Convergence::Diverges;
        out.reason = format!("partial sum exceeds divergence threshold {DIVERGENCE_THRESHOLD:e}");
    } else {
        out.reason = "no analytic tail information".into();
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyndeticReport {
    /// Gap bound used (declared or measured).
    pub gap_bound: u64,
    /// `Σ_{k∈D, k≤horizon} ρ(k)` and the verdict for the full series.
    pub series: TestVerdict,
    /// `sup_{k∈D, k≤horizon} ln ρ(k)`, with the maximiser.
    pub sup_ln: f64,
    pub argsup: u64,
    /// Same supremum over the first half of the scanned elements.
    pub sup_ln_first_half: f64,
    pub local: LocalBounds,
    /// `K · B / A`: global bound implied by boundedness on `D`.
    pub inferred_bound: f64,
}

impl SyndeticReport {
    /// The supremum keeps growing as more of `D` is scanned.
    pub fn unbounded_evidence(&self) -> bool {
        self.sup_ln > self.sup_ln_first_half + 1.0
    }
}

/// Series and boundedness tests over a set `D ⊂ ℕ` with bounded gaps.
pub fn syndetic_tests(w: &Weight, set: &[u64], declared_bound: Option<u64>, horizon: u64) -> Result<SyndeticReport> {
    let scanned: Vec<u64> = set.iter().copied().filter(|&k| k <= horizon).collect();
    if scanned.is_empty() {
        return Err(WeightError::InvalidScan("set has no element within the horizon".into()));
    }
    if scanned.windows(2).any(|p| p[1] <= p[0]) {
        return Err(WeightError::InvalidScan("set must be strictly increasing".into()));
    }
    let measured = scanned
        .windows(2)
        .map(|p| p[1] - p[0])
        .fold(scanned[0], u64::max);
    let gap_bound = match declared_bound {
        Some(bound) if measured > bound => return Err(WeightError::GapTooLarge { gap: measured, bound }),
        Some(bound) => bound,
        None => measured,
    }
    .max(1);

    let mut partial = 0.0;
    let mut sup_ln = f64::NEG_INFINITY;
    let mut argsup = scanned[0];
    let mut sup_ln_first_half = f64::NEG_INFINITY;
    let half = scanned.len().div_ceil(2);
    for (i, &k) in scanned.iter().enumerate() {
        let ln = w.ln_eval(k as f64)?;
        partial += ln.exp();
        if ln > sup_ln {
            sup_ln = ln;
            argsup = k;
        }
        if i < half {
            sup_ln_first_half = sup_ln_first_half.max(ln);
        }
    }

    // Bounded gaps make Σ_D ρ equivalent to ∫ρ.
    let integral = integral_test(w, horizon as f64, f64::INFINITY)?;
    let mut series = TestVerdict {
        verdict: integral.verdict,
        partial,
        cutoff: horizon as f64,
        tail_lower: 0.0,
        tail_upper: f64::INFINITY,
        reason: format!("bounded gaps: equivalent to the integral test ({})", integral.reason),
    };
    if let Some(t) = w.tail() {
        if t.upper.is_nonincreasing() && horizon as f64 + 1.0 >= t.horizon {
            series.tail_upper = t.upper.lattice_sum_bounds(horizon as f64 + 1.0, 1.0).1;
        }
    }

    let local = local_bounds(w, gap_bound as f64, horizon as f64, 0.25)?;
    let inferred_bound = sup_ln.exp() * local.b / local.a;
    Ok(SyndeticReport { gap_bound, series, sup_ln, argsup, sup_ln_first_half, local, inferred_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn evaluation_examples() {
        let e1 = Weight::exponential(1.0).unwrap();
        assert_eq!(eval_weight(&e1, 0.0).unwrap(), 1.0);
        assert_eq!(eval_weight(&Weight::constant(1.0).unwrap(), 17.5).unwrap(), 1.0);
        // e^{-1} by its alternating series to 30 terms
        let mut series = 0.0;
        let mut term = 1.0;
        for k in 0..30 {
            series += term;
            term *= -1.0 / (k as f64 + 1.0);
        }
        assert!(close(eval_weight(&e1, 1.0).unwrap(), series, 1e-15));
    }

    #[test]
    fn sampled_out_of_range() {
        let w = Weight::sampled(0.5, vec![1.0, 0.8, 0.5], None).unwrap();
        assert!(close(w.eval(0.75).unwrap(), 0.65, 1e-15));
        assert!(matches!(w.eval(1.5), Err(WeightError::OutOfRange { .. })));
        let tail = TailDescriptor::exact(1.0, Envelope::Exp { c: 1.0, rate: 1.0 });
        let w = Weight::sampled(0.5, vec![1.0, 0.8, 0.5], Some(tail)).unwrap();
        assert!(close(w.eval(3.0).unwrap(), (-3f64).exp(), 1e-15));
    }

    #[test]
    fn sampled_rejects_nonpositive() {
        assert!(matches!(
            Weight::sampled(1.0, vec![1.0, 0.0], None),
            Err(WeightError::NonPositive { .. })
        ));
        assert!(Weight::exponential(0.0).is_err());
        assert!(Weight::constant(-1.0).is_err());
    }

    #[test]
    fn sinlog_is_c1_at_one() {
        let w = Weight::sinlog();
        let h = 1e-6;
        let left = (w.ln_eval(1.0).unwrap() - w.ln_eval(1.0 - h).unwrap()) / h;
        let right = (w.ln_eval(1.0 + h).unwrap() - w.ln_eval(1.0).unwrap()) / h;
        assert!(close(left, -1.0, 1e-5) && close(right, -1.0, 1e-5));
        assert_eq!(w.ln_eval(1.0).unwrap(), 0.0);
    }

    #[test]
    fn masses_match_closed_forms() {
        let e1 = Weight::exponential(1.0).unwrap();
        assert!(close(e1.mass(0.0, 1.0).unwrap(), 1.0 - (-1f64).exp(), 1e-16));
        let r = Weight::rational();
        assert!(close(r.mass(0.0, 3.0).unwrap(), 4f64.ln(), 1e-15));
        // sinlog on [0, 1]: ∫ e^{1-s} = e - 1
        let s = Weight::sinlog();
        assert!(close(s.mass(0.0, 1.0).unwrap(), E - 1.0, 1e-13));
        // piecewise-linear table integrates exactly
        let w = Weight::sampled(1.0, vec![2.0, 1.0, 1.0], None).unwrap();
        assert!(close(w.mass(0.25, 2.0).unwrap(), 0.75 * 1.375 + 1.0, 1e-15));
    }

    #[test]
    fn certificates_for_closed_forms() {
        let e1 = Weight::exponential(1.0).unwrap();
        let c = estimate_certificate(&e1, 10.0, 5.0, 0.1).unwrap();
        assert!(close(c.m, 1.0, 1e-12) && close(c.omega, 1.0, 1e-12), "{c:?}");
        assert_eq!(check_admissible(&e1, 10.0, 5.0, 0.1).unwrap(), Admissibility::Certified(Certificate { m: 1.0, omega: 1.0 }));

        let c = estimate_certificate(&Weight::constant(1.0).unwrap(), 10.0, 5.0, 0.1).unwrap();
        assert_eq!((c.m, c.omega), (1.0, 0.0));

        // grid oracle: (1+τ+t)/(1+τ) ≤ e^t over [0,100]²
        let r = Weight::rational();
        let c = estimate_certificate(&r, 100.0, 100.0, 0.5).unwrap();
        assert!(c.omega <= 1.0 && c.m >= 1.0);
        for i in 0..=200 {
            for j in 1..=200 {
                let (tau, t) = (i as f64 * 0.5, j as f64 * 0.5);
                assert!((1.0 + tau + t) / (1.0 + tau) <= c.m * (c.omega * t).exp() * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn declared_certificate_violation_has_witness() {
        let w = Weight::exponential(2.0).unwrap().with_certificate(Some(Certificate { m: 1.0, omega: 1.0 }));
        match check_admissible(&w, 5.0, 5.0, 0.5).unwrap() {
            Admissibility::Violated { tau, t } => assert!(tau >= 0.0 && t > 0.0),
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn sinlog_certificate_holds() {
        assert!(matches!(
            check_admissible(&Weight::sinlog(), 200.0, 20.0, 0.05).unwrap(),
            Admissibility::Certified(_)
        ));
    }

    #[test]
    fn local_bounds_examples() {
        let e1 = Weight::exponential(1.0).unwrap();
        let lb = local_bounds(&e1, 1.0, 20.0, 0.1).unwrap();
        assert!(close(lb.a, (-1f64).exp(), 1e-12) && close(lb.b, E, 1e-12), "{lb:?}");

        let lb = local_bounds(&Weight::constant(1.0).unwrap(), 5.0, 20.0, 0.1).unwrap();
        assert_eq!((lb.a, lb.b), (1.0, 1.0));

        let lb = local_bounds(&Weight::rational(), 1.0, 100.0, 0.1).unwrap();
        assert!(lb.a >= 0.5 - 1e-15 && lb.b <= 2.0 + 1e-15, "{lb:?}");
    }

    #[test]
    fn local_bounds_sound_on_finer_grid() {
        for w in [Weight::sinlog(), Weight::rational(), Weight::exponential(0.7).unwrap()] {
            let lb = local_bounds(&w, 1.0, 30.0, 0.1).unwrap();
            for i in 0..=3000 {
                let sigma = i as f64 * 0.01;
                for j in 0..=100 {
                    let t = sigma + j as f64 * 0.01;
                    let r = w.eval(t).unwrap();
                    assert!(lb.a * w.eval(sigma).unwrap() <= r * (1.0 + 1e-12), "{w} A at {sigma},{t}");
                    assert!(r <= lb.b * w.eval(sigma + 1.0).unwrap() * (1.0 + 1e-12), "{w} B at {sigma},{t}");
                }
            }
        }
    }

    #[test]
    fn integral_examples() {
        let v = integral_test(&Weight::exponential(1.0).unwrap(), 50.0, 1e-9).unwrap();
        assert_eq!(v.verdict, Convergence::Converges);
        assert!(close(v.value().unwrap(), 1.0, 1e-12));

        let v = integral_test(&Weight::rational(), 50.0, 1e-9).unwrap();
        assert_eq!(v.verdict, Convergence::Diverges);
        assert!(close(v.partial, 51f64.ln(), 1e-12));

        let v = integral_test(&Weight::constant(1.0).unwrap(), 50.0, 1e-9).unwrap();
        assert_eq!(v.verdict, Convergence::Diverges);

        assert_eq!(integral_test(&Weight::sinlog(), 50.0, 1e-9).unwrap().verdict, Convergence::Diverges);
    }

    #[test]
    fn sampled_without_tail_is_inconclusive() {
        let w = Weight::sampled(1.0, vec![1.0, 0.5, 0.25, 0.125], None).unwrap();
        let v = integral_test(&w, 10.0, 1e-9).unwrap();
        assert_eq!(v.verdict, Convergence::Inconclusive);
        assert_eq!(series_test(&w, 0.0, 1.0, 10).unwrap().verdict, Convergence::Inconclusive);
        let big = Weight::sampled(1.0, vec![1e13, 1e13], None).unwrap();
        assert_eq!(integral_test(&big, 1.0, 1e-9).unwrap().verdict, Convergence::Diverges);
    }

    #[test]
    fn series_examples() {
        let e1 = Weight::exponential(1.0).unwrap();
        let v = series_test(&e1, 0.0, 1.0, 40).unwrap();
        assert_eq!(v.verdict, Convergence::Converges);
        let direct: f64 = (1..=100).map(|k| (-(k as f64)).exp()).sum();
        assert!(close(v.value().unwrap(), 1.0 / (E - 1.0), 1e-12));
        assert!(close(direct, 1.0 / (E - 1.0), 1e-15));

        assert_eq!(series_test(&Weight::constant(1.0).unwrap(), 0.0, 1.0, 40).unwrap().verdict, Convergence::Diverges);

        let v = series_test(&Weight::rational(), 0.0, 1.0, 10_000).unwrap();
        assert_eq!(v.verdict, Convergence::Diverges);
        // harmonic partial sums track ln K
        assert!((v.partial - (10_001f64).ln()).abs() < 1.0);
    }

    #[test]
    fn syndetic_examples() {
        let e1 = Weight::exponential(1.0).unwrap();
        let evens: Vec<u64> = (1..=100).map(|k| 2 * k).collect();
        let r = syndetic_tests(&e1, &evens, Some(2), 200).unwrap();
        assert_eq!(r.series.verdict, Convergence::Converges);
        let direct: f64 = evens.iter().map(|&k| (-(k as f64)).exp()).sum();
        assert!(close(r.series.partial, direct, 1e-15));
        assert!(close(r.sup_ln.exp(), (-2f64).exp(), 1e-15));
        assert!(r.inferred_bound >= 1.0);

        let threes: Vec<u64> = (1..=100).map(|k| 3 * k).collect();
        let r = syndetic_tests(&Weight::constant(1.0).unwrap(), &threes, None, 300).unwrap();
        assert_eq!(r.series.verdict, Convergence::Diverges);
        assert_eq!(r.sup_ln.exp(), 1.0);
        assert!(!r.unbounded_evidence());

        assert!(matches!(
            syndetic_tests(&e1, &threes, Some(2), 300),
            Err(WeightError::GapTooLarge { gap: 3, bound: 2 })
        ));
    }

    #[test]
    fn sinlog_is_unbounded_along_its_peaks() {
        let w = Weight::sinlog();
        // sin(log s) = -1 at s = e^{3π/2 + 2πk}: ρ(s) = e^{s}
        for k in 0..3 {
            let s = (1.5 * PI + 2.0 * PI * k as f64).exp();
            assert!(close(w.ln_eval(s).unwrap(), s, 1e-9 * s));
        }
        let all: Vec<u64> = (1..=200).collect();
        let r = syndetic_tests(&w, &all, Some(1), 200).unwrap();
        assert!(r.unbounded_evidence(), "sup {} vs first half {}", r.sup_ln, r.sup_ln_first_half);
        assert_eq!(r.series.verdict, Convergence::Diverges);
    }
}
