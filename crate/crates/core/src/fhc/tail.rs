use crate::gridfn::{GridFunction, SpaceSpec};
use crate::quadrature::gauss_legendre;
use crate::weights::{integral_test, Convergence, Envelope};

use super::{FhcError, Result};

/// Orbit direction: `T_t` (left translation) or `S_t` (section map).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// `‖T_t y‖` or `‖S_t y‖` for real `t ≥ 0`. Cells move continuously with
/// `t`; on `C_0` the weight is read at the midpoint of the visible part of
/// each cell and the section fill is read at the fill-cell midpoints.
pub fn orbit_norm(y: &GridFunction, t: f64, dir: Direction, space: &SpaceSpec) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(FhcError::Invalid(format!("orbit time must be >= 0, got {t}")));
    }
    let w = space.weight();
    let h = y.step();
    let mut acc = 0.0f64;
    for (j, &v) in y.values().iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let (lo, hi) = match dir {
            Direction::Forward => ((j as f64 * h - t).max(0.0), ((j + 1) as f64 * h - t).max(0.0)),
            Direction::Backward => (j as f64 * h + t, (j + 1) as f64 * h + t),
        };
        if hi <= lo {
            continue;
        }
        match space {
            SpaceSpec::Lp { p, .. } => acc += v.abs().powf(*p) * w.mass(lo, hi)?,
            SpaceSpec::C0 { .. } => acc = acc.max(v.abs() * w.eval(0.5 * (lo + hi))?),
        }
    }
    if let (SpaceSpec::C0 { .. }, Direction::Backward) = (space, dir) {
        let v0 = y.value(0).abs();
        if v0 != 0.0 && t > 0.0 {
            let cells = (t / h).ceil() as usize;
            for k in 0..cells {
                let mid = ((k as f64 + 0.5) * h).min(0.5 * (k as f64 * h + t));
                acc = acc.max(v0 * w.eval(mid)?);
            }
        }
    }
    Ok(match space {
        SpaceSpec::Lp { p, .. } if *p != 1.0 => acc.powf(1.0 / p),
        _ => acc,
    })
}

/// Piecewise quadrature of `t ↦ ‖V_t y‖` with suffix sums and, for the
/// backward orbit, an analytic bound on the part beyond the last piece.
struct NormProfile<'a> {
    y: &'a GridFunction,
    space: &'a SpaceSpec,
    dir: Direction,
    piece: f64,
    suffix: Vec<f64>,
    end: f64,
    /// `R(s) = coef · ∫_s^∞ env` dominates `∫_s^∞ ‖S_t y‖ dt` for `s ≥ end`.
    remainder: Option<(f64, Envelope)>,
}

const REMAINDER_REL_TOL: f64 = 1e-16;
const MIN_BACKWARD_SPAN: f64 = 256.0;

impl<'a> NormProfile<'a> {
    fn new(y: &'a GridFunction, space: &'a SpaceSpec, dir: Direction) -> Result<Self> {
        let h = y.step();
        let mut profile = NormProfile { y, space, dir, piece: h, suffix: Vec::new(), end: 0.0, remainder: None };
        let mut pieces = Vec::new();
        match dir {
            Direction::Forward => {
                // the visible part of every cell moves linearly between grid times
                for k in 0..y.support_cells() {
                    pieces.push(profile.quad(k as f64 * h, (k + 1) as f64 * h)?);
                }
                profile.end = y.support_end();
            }
            Direction::Backward => {
                let (coef, env, from) = backward_remainder(y, space)?;
                profile.piece = h.max(0.125);
                profile.remainder = Some((coef, env));
                let limit = from.max(2.0 * y.support_end()).max(MIN_BACKWARD_SPAN);
                let mut total = 0.0;
                loop {
                    let lo = pieces.len() as f64 * profile.piece;
                    if lo >= from && coef * env.tail_integral(lo) <= REMAINDER_REL_TOL * total {
                        break;
                    }
                    if lo >= limit {
                        break;
                    }
                    let v = profile.quad(lo, lo + profile.piece)?;
                    total += v;
                    pieces.push(v);
                }
                profile.end = pieces.len() as f64 * profile.piece;
            }
        }
        let mut suffix = vec![0.0; pieces.len() + 1];
        for k in (0..pieces.len()).rev() {
            suffix[k] = suffix[k + 1] + pieces[k];
        }
        profile.suffix = suffix;
        Ok(profile)
    }

    fn quad(&self, a: f64, b: f64) -> Result<f64> {
        let mut err = None;
        let v = gauss_legendre(
            |t| match orbit_norm(self.y, t, self.dir, self.space) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            a,
            b,
        );
        err.map_or(Ok(v), Err)
    }

    fn remainder_from(&self, s: f64) -> f64 {
        self.remainder.map_or(0.0, |(coef, env)| if coef == 0.0 { 0.0 } else { coef * env.tail_integral(s) })
    }

    /// `∫_from^∞ ‖V_t y‖ dt` (an upper bound beyond the tabulated range).
    fn tail(&self, from: f64) -> Result<f64> {
        let from = from.max(0.0);
        if from >= self.end {
            return Ok(self.remainder_from(from));
        }
        let k = (from / self.piece).floor() as usize;
        let hi = (k + 1) as f64 * self.piece;
        Ok(self.quad(from, hi)? + self.suffix[k + 1] + self.remainder_from(self.end))
    }
}

/// Coefficient, envelope and start point of the analytic backward bound
/// `∫_s^∞ ‖S_t y‖ dt ≤ ‖y‖_∞ b^{1/p} ∫_s^∞ ρ_up^{1/p}` (`b` the support length).
pub(super) fn backward_remainder(y: &GridFunction, space: &SpaceSpec) -> Result<(f64, Envelope, f64)> {
    let w = space.weight();
    if space.is_c0() && y.value(0) != 0.0 {
        return Err(FhcError::Hypothesis(
            "on C_0 the backward orbit of a function with y(0) != 0 is not integrable".into(),
        ));
    }
    let verdict = integral_test(w, 1.0, f64::INFINITY)?;
    if verdict.verdict != Convergence::Converges {
        return Err(FhcError::Hypothesis(format!("weight integral does not converge ({})", verdict.reason)));
    }
    let tail = w
        .tail()
        .ok_or_else(|| FhcError::Hypothesis("weight has no analytic tail descriptor".into()))?;
    let env = if space.is_c0() { tail.upper } else { tail.upper.root(space.exponent()) };
    if !env.is_nonincreasing() || env.tail_integral(tail.horizon).is_infinite() {
        return Err(FhcError::Hypothesis("upper tail envelope does not dominate an integrable orbit".into()));
    }
    let coef = match space {
        SpaceSpec::Lp { p, .. } => y.sup_abs() * y.support_end().powf(1.0 / p),
        SpaceSpec::C0 { .. } => y.sup_abs(),
    };
    Ok((coef, env, tail.horizon))
}

/// `∫_from^∞ ‖V_t y‖ dt`.
pub fn tail_integral(y: &GridFunction, space: &SpaceSpec, dir: Direction, from: f64) -> Result<f64> {
    NormProfile::new(y, space, dir)?.tail(from)
}

/// Where the orbit tail drops below a threshold: `real` solves
/// `∫_N^∞ ‖V_t y‖ dt = threshold` (0 when already below at 0) and `integer` is the
/// smallest integer `N` with a tail strictly below the threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailThreshold {
    pub real: f64,
    pub integer: u64,
    pub tail_at_integer: f64,
}

pub fn tail_threshold(y: &GridFunction, space: &SpaceSpec, threshold: f64, dir: Direction) -> Result<TailThreshold> {
    if !(threshold > 0.0) {
        return Err(FhcError::Invalid(format!("threshold must be > 0, got {threshold}")));
    }
    let profile = NormProfile::new(y, space, dir)?;
    let below = |n: f64| profile.tail(n).map(|v| v < threshold);
    if below(0.0)? {
        return Ok(TailThreshold { real: 0.0, integer: 0, tail_at_integer: profile.tail(0.0)? });
    }
    let mut hi = 1u64;
    while !below(hi as f64)? {
        if hi > 1 << 40 {
            return Err(FhcError::Hypothesis(format!("orbit tail never drops below {threshold}")));
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if below(mid as f64)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (mut a, mut b) = (lo as f64, hi as f64);
    for _ in 0..64 {
        let mid = 0.5 * (a + b);
        if profile.tail(mid)? < threshold {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(TailThreshold { real: 0.5 * (a + b), integer: hi, tail_at_integer: profile.tail(hi as f64)? })
}

/// Bounds on `‖∫_K V_t y dt‖` over compact `K ⊂ [N, ∞)` for each `N`: every
/// such norm is at most `∫_N^∞ ‖V_t y‖ dt`, which is the value reported.
pub fn pettis_tail_profile(y: &GridFunction, space: &SpaceSpec, dir: Direction, ns: &[f64]) -> Result<Vec<f64>> {
    if let Some(i) = ns.windows(2).position(|w| !(w[1] >= w[0])) {
        return Err(FhcError::Invalid(format!("N list must be ascending (position {})", i + 1)));
    }
    let profile = NormProfile::new(y, space, dir)?;
    let mut out: Vec<f64> = ns.iter().map(|&n| profile.tail(n)).collect::<Result<_>>()?;
    // guard against quadrature rounding between neighbouring entries
    for i in 1..out.len() {
        out[i] = out[i].min(out[i - 1]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::composite;
    use crate::weights::Weight;

    fn l1e() -> SpaceSpec {
        SpaceSpec::lp(1.0, Weight::exponential(1.0).unwrap()).unwrap()
    }

    fn chi(a: f64, b: f64) -> GridFunction {
        GridFunction::indicator(32, a, b).unwrap()
    }

    #[test]
    fn backward_norm_closed_form() {
        let y = chi(0.0, 1.0);
        for t in [0.0, 0.3, 1.7, 5.0] {
            let v = orbit_norm(&y, t, Direction::Backward, &l1e()).unwrap();
            assert!((v - (-t as f64).exp() * (1.0 - (-1f64).exp())).abs() < 1e-15);
        }
    }

    #[test]
    fn forward_norm_matches_quadrature() {
        let y = chi(0.5, 2.0);
        let t = 0.8;
        let v = orbit_norm(&y, t, Direction::Forward, &l1e()).unwrap();
        let exact = composite(|s| (-s).exp(), 0.0, 1.2, 10);
        assert!((v - exact).abs() < 1e-14);
    }

    #[test]
    fn l2_and_c0_norms() {
        let y = chi(0.0, 1.0);
        let l2 = SpaceSpec::lp(2.0, Weight::exponential(1.0).unwrap()).unwrap();
        let v = orbit_norm(&y, 1.0, Direction::Backward, &l2).unwrap();
        assert!((v - ((-1f64).exp() * (1.0 - (-1f64).exp())).sqrt()).abs() < 1e-15);
        let c0 = SpaceSpec::c0(Weight::exponential(1.0).unwrap());
        let v = orbit_norm(&y, 1.0, Direction::Backward, &c0).unwrap();
        // fill with y(0) = 1 reads ρ at the first fill midpoint
        assert!((v - (-1.0f64 / 64.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn backward_threshold_half() {
        let th = tail_threshold(&chi(0.0, 1.0), &l1e(), 0.5, Direction::Backward).unwrap();
        let exact = (2.0 * (1.0 - (-1f64).exp())).ln();
        assert!((th.real - exact).abs() < 1e-12);
        assert!((th.real - 0.2344).abs() < 1e-4);
        assert_eq!(th.integer, 1);
    }

    #[test]
    fn backward_threshold_level_three() {
        let th = tail_threshold(&chi(0.0, 1.0), &l1e(), 1.0 / 24.0, Direction::Backward).unwrap();
        let exact = (24.0 * (1.0 - (-1f64).exp())).ln();
        assert!((th.real - exact).abs() < 1e-12);
        assert!((th.real - 2.718).abs() < 2e-3);
        assert_eq!(th.integer, 3);
    }

    #[test]
    fn forward_threshold_bounded_by_support() {
        for thr in [1e-9, 0.01, 0.5, 2.0] {
            let th = tail_threshold(&chi(0.0, 1.0), &l1e(), thr, Direction::Forward).unwrap();
            assert!(th.integer <= 1);
        }
        let zero = tail_integral(&chi(0.0, 1.0), &l1e(), Direction::Forward, 1.0).unwrap();
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn pettis_profile_closed_form() {
        let prof = pettis_tail_profile(&chi(0.0, 1.0), &l1e(), Direction::Backward, &[0.0, 1.0, 2.0, 3.0]).unwrap();
        for (n, v) in prof.iter().enumerate() {
            let exact = (1.0 - (-1f64).exp()) * (-(n as f64)).exp();
            assert!((v - exact).abs() < 1e-14, "{n}: {v} vs {exact}");
        }
        assert!(prof.windows(2).all(|w| w[1] < w[0]));
        let fwd = pettis_tail_profile(&chi(0.0, 2.0), &l1e(), Direction::Forward, &[2.0, 3.0]).unwrap();
        assert_eq!(fwd, vec![0.0, 0.0]);
        assert!(pettis_tail_profile(&chi(0.0, 1.0), &l1e(), Direction::Backward, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn backward_requires_integrable_weight() {
        let rational = SpaceSpec::lp(1.0, Weight::rational()).unwrap();
        let err = tail_threshold(&chi(0.0, 1.0), &rational, 0.5, Direction::Backward).unwrap_err();
        assert!(matches!(err, FhcError::Hypothesis(_)));
        let c0 = SpaceSpec::c0(Weight::exponential(1.0).unwrap());
        assert!(matches!(tail_integral(&chi(0.0, 1.0), &c0, Direction::Backward, 0.0), Err(FhcError::Hypothesis(_))));
        assert!(tail_integral(&chi(0.5, 1.0), &c0, Direction::Backward, 0.0).is_ok());
    }
}
