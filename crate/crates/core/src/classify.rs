//! Dynamical verdicts for the translation semigroup on a weighted space,
//! each carrying the evidence it rests on.

use std::fmt;

use thiserror::Error;

use crate::gridfn::SpaceSpec;
use crate::weights::{
    check_admissible, integral_test, series_test, syndetic_tests, Admissibility, Certificate, Convergence,
    TestVerdict, Weight, WeightError,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error("weight is not admissible: growth bound fails at tau = {tau}, t = {t}")]
    NotAdmissible { tau: f64, t: f64 },
    #[error("inconsistent verdicts: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, ClassifyError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Yes,
    No,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

impl From<Convergence> for Verdict {
    fn from(c: Convergence) -> Self {
        match c {
            Convergence::Converges => Verdict::Yes,
            Convergence::Diverges => Verdict::No,
            Convergence::Inconclusive => Verdict::Inconclusive,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub verdict: Verdict,
    pub evidence: String,
}

impl Decision {
    fn new(verdict: Verdict, evidence: impl Into<String>) -> Self {
        Decision { verdict, evidence: evidence.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub certificate: Certificate,
    pub horizon: f64,
    /// `min ρ` over `[H/2, H]` and where it is attained.
    pub liminf_estimate: f64,
    pub liminf_at: f64,
    pub hypercyclic: Decision,
    pub chaotic: Decision,
    /// The semigroup satisfies the frequent hypercyclicity criterion.
    pub fhc_criterion: Decision,
    /// The operator `T_1` satisfies the operator-level criterion. Kept
    /// separate from `fhc_criterion`.
    pub operator_criterion: Decision,
    pub bounded: Decision,
    /// Boundedness, necessary for frequent hypercyclicity.
    pub fhc_necessary: Decision,
    pub integral: TestVerdict,
    pub series: TestVerdict,
}

const LIMINF_GRID: f64 = 1.0 / 16.0;
const ADMISSIBILITY_GRID: f64 = 1.0 / 16.0;
const ADMISSIBILITY_SPAN: f64 = 4.0;

pub fn classify(space: &SpaceSpec, horizon: f64) -> Result<Classification> {
    let w = space.weight();
    let horizon = w.range_limit().map_or(horizon, |r| horizon.min(r - ADMISSIBILITY_SPAN));
    if !(horizon > 0.0) {
        return Err(WeightError::InvalidScan(format!("horizon must be > 0, got {horizon}")).into());
    }
    let certificate = match check_admissible(w, horizon, ADMISSIBILITY_SPAN, ADMISSIBILITY_GRID)? {
        Admissibility::Certified(c) => c,
        Admissibility::Violated { tau, t } => return Err(ClassifyError::NotAdmissible { tau, t }),
    };
    let (liminf_estimate, liminf_at) = window_minimum(w, horizon)?;
    let tail = w.tail();
    let integral = integral_test(w, horizon, f64::INFINITY)?;
    let series = series_test(w, 0.0, 1.0, horizon.floor().max(1.0) as u64)?;

    let hypercyclic = match &tail {
        Some(t) if t.troughs().vanishes_at_infinity() => {
            Decision::new(Verdict::Yes, "liminf = 0: weight falls below a vanishing envelope along a sequence")
        }
        Some(t) if !t.lower.vanishes_at_infinity() => Decision::new(
            Verdict::No,
            format!("liminf > 0: lower tail envelope does not vanish; window minimum {liminf_estimate:.6e}"),
        ),
        _ => Decision::new(
            Verdict::Inconclusive,
            format!("no tail information; min over window is {liminf_estimate:.6e} at {liminf_at}"),
        ),
    };

    let chaotic = match space {
        SpaceSpec::Lp { .. } => Decision::new(integral.verdict.into(), format!("integral test: {}", integral.reason)),
        SpaceSpec::C0 { .. } => match &tail {
            Some(t) if t.upper.vanishes_at_infinity() => Decision::new(Verdict::Yes, "weight tends to 0"),
            Some(t) if !t.peaks().vanishes_at_infinity() => {
                Decision::new(Verdict::No, "weight stays above a non-vanishing envelope along a sequence")
            }
            _ => Decision::new(Verdict::Inconclusive, "no tail information on the limit of the weight"),
        },
    };

    let fhc_criterion = match space {
        SpaceSpec::Lp { .. } => chaotic.clone(),
        SpaceSpec::C0 { .. } => match integral.verdict {
            Convergence::Converges => Decision::new(Verdict::Yes, "weight is integrable"),
            _ => Decision::new(Verdict::Inconclusive, "weight integral is not known to converge"),
        },
    };

    let operator_criterion = Decision::new(series.verdict.into(), format!("series test: {}", series.reason));

    let bounded = match &tail {
        Some(t) if t.peaks().is_unbounded() => {
            Decision::new(Verdict::No, "weight exceeds an unbounded envelope along a sequence")
        }
        Some(t) if !t.upper.is_unbounded() => {
            Decision::new(Verdict::Yes, format!("upper tail envelope is bounded past {}", t.horizon))
        }
        _ => {
            let set: Vec<u64> = (1..=horizon.floor().max(1.0) as u64).collect();
            let report = syndetic_tests(w, &set, Some(1), horizon.floor().max(1.0) as u64)?;
            let monotone = if w.is_nonincreasing() { "; nonincreasing on its range" } else { "" };
            let verdict = if report.unbounded_evidence() { "growing" } else { "stable" };
            Decision::new(
                Verdict::Inconclusive,
                format!(
                    "no tail information; sup over integers is {:.6e} ({verdict}), implied global bound {:.6e}{monotone}",
                    report.sup_ln.exp(),
                    report.inferred_bound
                ),
            )
        }
    };

    let fhc_necessary = match bounded.verdict {
        Verdict::No => Decision::new(Verdict::No, "unbounded weight: no frequently hypercyclic vector"),
        v => Decision::new(v, format!("boundedness: {}", bounded.evidence)),
    };

    if chaotic.verdict == Verdict::Yes && hypercyclic.verdict == Verdict::No {
        return Err(ClassifyError::Inconsistent("chaotic but not hypercyclic".into()));
    }
    Ok(Classification {
        certificate,
        horizon,
        liminf_estimate,
        liminf_at,
        hypercyclic,
        chaotic,
        fhc_criterion,
        operator_criterion,
        bounded,
        fhc_necessary,
        integral,
        series,
    })
}

fn window_minimum(w: &Weight, horizon: f64) -> Result<(f64, f64)> {
    let start = (0.5 * horizon / LIMINF_GRID).floor() as u64;
    let end = (horizon / LIMINF_GRID).floor() as u64;
    let mut best = (f64::INFINITY, 0.0);
    for i in start..=end {
        let s = i as f64 * LIMINF_GRID;
        let v = w.eval(s)?;
        if v < best.0 {
            best = (v, s);
        }
    }
    Ok(best)
}

/// `Σ_{k>i} ρ(n_k − n_i)` for every `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct NecessaryScan {
    pub sums: Vec<f64>,
    pub sup: f64,
    pub argsup: usize,
    /// Same supremum using only the first half of the sequence.
    pub sup_half: f64,
    /// `sup / sup_half`.
    pub growth: f64,
    pub below_eps: bool,
}

impl NecessaryScan {
    /// The supremum keeps growing with the length of the sequence.
    pub fn unbounded_growth(&self) -> bool {
        self.growth > 1.5
    }
}

fn check_increasing(seq: &[u64]) -> Result<()> {
    if let Some(i) = seq.windows(2).position(|p| p[1] <= p[0]) {
        return Err(WeightError::InvalidScan(format!("sequence must be strictly increasing (position {})", i + 1)).into());
    }
    Ok(())
}

fn pair_sums(w: &Weight, seq: &[u64]) -> Result<Vec<f64>> {
    let mut sums = Vec::with_capacity(seq.len());
    for i in 0..seq.len() {
        let mut acc = 0.0;
        // smallest terms first
        for k in (i + 1..seq.len()).rev() {
            acc += w.eval((seq[k] - seq[i]) as f64)?;
        }
        sums.push(acc);
    }
    Ok(sums)
}

fn sup_of(sums: &[f64]) -> (f64, usize) {
    sums.iter().enumerate().fold((0.0, 0), |best, (i, &v)| if v > best.0 { (v, i) } else { best })
}

pub fn necessary_condition_scan(w: &Weight, seq: &[u64], eps: f64) -> Result<NecessaryScan> {
    check_increasing(seq)?;
    let sums = pair_sums(w, seq)?;
    let (sup, argsup) = sup_of(&sums);
    let (sup_half, _) = sup_of(&pair_sums(w, &seq[..seq.len() / 2])?);
    let growth = if sup_half > 0.0 { sup / sup_half } else if sup > 0.0 { f64::INFINITY } else { 1.0 };
    Ok(NecessaryScan { sums, sup, argsup, sup_half, growth, below_eps: sup < eps })
}

/// Pointwise test `ρ(n_k − n_i) < ε` over all pairs `k > i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairScan {
    pub pairs: usize,
    /// `(i, k)` index pairs that fail.
    pub violations: Vec<(usize, usize)>,
    pub max_value: f64,
}

impl PairScan {
    pub fn all_pass(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn c0_necessary_scan(w: &Weight, seq: &[u64], eps: f64) -> Result<PairScan> {
    check_increasing(seq)?;
    let ln_eps = eps.ln();
    let mut violations = Vec::new();
    let mut max_ln = f64::NEG_INFINITY;
    let mut pairs = 0;
    for i in 0..seq.len() {
        for k in i + 1..seq.len() {
            let ln = w.ln_eval((seq[k] - seq[i]) as f64)?;
            pairs += 1;
            max_ln = max_ln.max(ln);
            if !(ln < ln_eps) {
                violations.push((i, k));
            }
        }
    }
    Ok(PairScan { pairs, violations, max_value: max_ln.exp() })
}
