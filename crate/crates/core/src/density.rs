//! Lower densities of hit sets in `ℕ` and `ℝ₊`, and bounded-gap utilities.
//!
//! A liminf cannot be observed at a finite horizon; the estimate reported
//! here is the minimum of the density profile over a tail window
//! `[N − w, N]`, returned together with the profile itself.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("horizon must be positive")]
    EmptyHorizon,
    #[error("tail window {window} exceeds the horizon {horizon}")]
    WindowTooLarge { window: f64, horizon: f64 },
    #[error("hit set is not sorted at position {0}")]
    Unsorted(usize),
    #[error("intervals overlap at position {0}")]
    Overlap(usize),
    #[error("set is empty")]
    EmptySet,
}

pub type Result<T> = std::result::Result<T, DensityError>;

/// Return-time set of an orbit up to a horizon.
#[derive(Debug, Clone, PartialEq)]
pub enum HitSet {
    Discrete(Vec<u64>),
    /// Sorted, pairwise disjoint `[start, end)` intervals.
    Continuous(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    pub horizon: f64,
    pub window: f64,
    /// Minimum of the profile over the tail window.
    pub estimate: f64,
    /// Profile value at the horizon itself.
    pub at_horizon: f64,
    /// `(n, #(A ∩ [1, n]) / n)` for integer `n`, or `(n, μ(M ∩ [0, n]) / n)`.
    pub profile: Vec<(f64, f64)>,
}

/// Discrete lower-density surrogate of `A ⊂ ℕ` (elements `≥ 1` are counted).
pub fn lower_density_discrete(set: &[u64], horizon: u64, tail_window: u64) -> Result<DensityEstimate> {
    if horizon == 0 {
        return Err(DensityError::EmptyHorizon);
    }
    if tail_window > horizon {
        return Err(DensityError::WindowTooLarge { window: tail_window as f64, horizon: horizon as f64 });
    }
    if let Some(i) = set.windows(2).position(|w| w[1] <= w[0]) {
        return Err(DensityError::Unsorted(i + 1));
    }
    let mut profile = Vec::with_capacity(horizon as usize);
    let mut it = set.iter().copied().filter(|&a| a >= 1).peekable();
    let mut count = 0u64;
    let start = (horizon - tail_window).max(1);
    let mut estimate = f64::INFINITY;
    for n in 1..=horizon {
        while it.peek().is_some_and(|&a| a <= n) {
            it.next();
            count += 1;
        }
        let ratio = count as f64 / n as f64;
        profile.push((n as f64, ratio));
        if n >= start {
            estimate = estimate.min(ratio);
        }
    }
    Ok(DensityEstimate {
        horizon: horizon as f64,
        window: tail_window as f64,
        estimate,
        at_horizon: profile.last().map_or(0.0, |p| p.1),
        profile,
    })
}

fn check_intervals(intervals: &[(f64, f64)]) -> Result<()> {
    for (i, &(a, b)) in intervals.iter().enumerate() {
        if !(b >= a) || a < 0.0 {
            return Err(DensityError::Unsorted(i));
        }
        if i > 0 {
            let prev = intervals[i - 1];
            if a < prev.0 {
                return Err(DensityError::Unsorted(i));
            }
            if a < prev.1 {
                return Err(DensityError::Overlap(i));
            }
        }
    }
    Ok(())
}

/// `μ(M ∩ [0, n])` for sorted disjoint intervals; `prefix` holds the
/// cumulative lengths.
fn measure_up_to(intervals: &[(f64, f64)], prefix: &[f64], n: f64) -> f64 {
    let k = intervals.partition_point(|&(a, _)| a < n);
    if k == 0 {
        return 0.0;
    }
    let (a, b) = intervals[k - 1];
    prefix[k - 1] + (b.min(n) - a).max(0.0)
}

/// Continuous lower-density surrogate of `M ⊂ ℝ₊`.
pub fn lower_density_continuous(intervals: &[(f64, f64)], horizon: f64, tail_window: f64) -> Result<DensityEstimate> {
    if !(horizon > 0.0) {
        return Err(DensityError::EmptyHorizon);
    }
    if tail_window > horizon || tail_window < 0.0 {
        return Err(DensityError::WindowTooLarge { window: tail_window, horizon });
    }
    check_intervals(intervals)?;
    let mut prefix = Vec::with_capacity(intervals.len());
    let mut acc = 0.0;
    for &(a, b) in intervals {
        prefix.push(acc);
        acc += b - a;
    }
    let ratio = |n: f64| measure_up_to(intervals, &prefix, n) / n;

    let profile: Vec<(f64, f64)> = (1..=horizon.floor() as u64).map(|n| (n as f64, ratio(n as f64))).collect();

    // μ(n)/n decreases across gaps and increases inside intervals, so the
    // window minimum sits at an interval start or at a window end.
    let lo = (horizon - tail_window).max(f64::MIN_POSITIVE);
    let mut estimate = ratio(lo).min(ratio(horizon));
    for &(a, _) in intervals {
        if a > lo && a < horizon {
            estimate = estimate.min(ratio(a));
        }
    }
    Ok(DensityEstimate { horizon, window: tail_window, estimate, at_horizon: ratio(horizon), profile })
}

/// Dispatches on the hit-set variant.
pub fn lower_density(set: &HitSet, horizon: f64, tail_window: f64) -> Result<DensityEstimate> {
    match set {
        HitSet::Discrete(a) => lower_density_discrete(a, horizon.floor() as u64, tail_window.floor() as u64),
        HitSet::Continuous(m) => lower_density_continuous(m, horizon, tail_window),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    /// Largest of the first element and the consecutive differences.
    pub max_gap: u64,
    pub syndetic: bool,
    /// Largest gap of `{a − a' > 0}`, truncated at half the span of the set.
    pub difference_set_max_gap: u64,
}

fn max_gap_of(sorted: &[u64]) -> u64 {
    sorted.windows(2).map(|w| w[1] - w[0]).fold(sorted.first().copied().unwrap_or(0), u64::max)
}

/// Bounded-gaps analysis. Without a declared bound, the set counts as
/// syndetic when the gaps in its second half do not exceed those in the first.
pub fn gap_analysis(set: &[u64], declared_bound: Option<u64>) -> Result<GapReport> {
    if set.is_empty() {
        return Err(DensityError::EmptySet);
    }
    if let Some(i) = set.windows(2).position(|w| w[1] <= w[0]) {
        return Err(DensityError::Unsorted(i + 1));
    }
    let max_gap = max_gap_of(set);
    let syndetic = match declared_bound {
        Some(bound) => max_gap <= bound,
        None => {
            let mid = set.len() / 2;
            let first = max_gap_of(&set[..mid.max(1)]);
            let second = set[mid.max(1) - 1..].windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0);
            set.len() >= 4 && second <= first
        }
    };

    let span = set[set.len() - 1] - set[0];
    let limit = span / 2;
    let mut diffs: Vec<u64> = Vec::new();
    for (i, &a) in set.iter().enumerate() {
        for &b in &set[i + 1..] {
            let d = b - a;
            if d > limit {
                break;
            }
            diffs.push(d);
        }
    }
    diffs.sort_unstable();
    diffs.dedup();
    let difference_set_max_gap = if diffs.is_empty() { span } else { max_gap_of(&diffs) };
    Ok(GapReport { max_gap, syndetic, difference_set_max_gap })
}
