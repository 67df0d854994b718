use super::{FhcError, Result};

/// Arithmetic-progression realisation of pairwise disjoint, separated
/// return-time sets: level `l` (1-based) is `{kP + o_l : k ≥ k₀(l)}` with
/// gap `g = 2·max ν`, period `P = L·g` and offset `o_l = (l−1)·g`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparatedFamily {
    nus: Vec<u64>,
    gap: u64,
    period: u64,
}

/// Result of the exhaustive invariant scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyCheck {
    pub horizon: u64,
    pub disjoint: bool,
    pub membership: bool,
    pub separation: bool,
    /// Smallest observed `|n − m| − (ν_l + ν_k)` over distinct members.
    pub min_separation_slack: i64,
    pub density: bool,
}

impl FamilyCheck {
    pub fn all(&self) -> bool {
        self.disjoint && self.membership && self.separation && self.density
    }
}

impl SeparatedFamily {
    pub fn levels(&self) -> usize {
        self.nus.len()
    }

    pub fn nus(&self) -> &[u64] {
        &self.nus
    }

    /// Separation parameter of level `l` (1-based).
    pub fn nu(&self, l: usize) -> u64 {
        self.nus[l - 1]
    }

    pub fn gap(&self) -> u64 {
        self.gap
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn offset(&self, l: usize) -> u64 {
        (l as u64 - 1) * self.gap
    }

    /// Smallest `k` with `kP + o_l ≥ max(ν_l, 1)`.
    pub fn start_index(&self, l: usize) -> u64 {
        let need = self.nu(l).max(1);
        let o = self.offset(l);
        if o >= need {
            0
        } else {
            (need - o).div_ceil(self.period)
        }
    }

    pub fn first(&self, l: usize) -> u64 {
        self.start_index(l) * self.period + self.offset(l)
    }

    /// Members of level `l` up to `up_to`.
    pub fn members(&self, l: usize, up_to: u64) -> Vec<u64> {
        let mut out = Vec::new();
        let mut n = self.first(l);
        while n <= up_to {
            out.push(n);
            n += self.period;
        }
        out
    }

    /// Level containing `n`, if any.
    pub fn level_of(&self, n: u64) -> Option<usize> {
        let r = n % self.period;
        if r % self.gap != 0 {
            return None;
        }
        let l = (r / self.gap) as usize + 1;
        (n >= self.first(l)).then_some(l)
    }

    /// `#(A(l) ∩ [1, n])`.
    pub fn count(&self, l: usize, n: u64) -> u64 {
        let first = self.first(l);
        if n < first {
            0
        } else {
            (n - first) / self.period + 1
        }
    }

    /// Exhaustive scan of the four invariants up to `horizon`.
    pub fn check(&self, horizon: u64) -> FamilyCheck {
        let mut all: Vec<(u64, usize)> = (1..=self.levels())
            .flat_map(|l| self.members(l, horizon).into_iter().map(move |n| (n, l)))
            .collect();
        all.sort_unstable();
        let disjoint = all.windows(2).all(|w| w[0].0 != w[1].0);
        let membership = all.iter().all(|&(n, l)| n >= self.nu(l) && n >= 1);
        let reach = 2 * self.nus.iter().copied().max().unwrap_or(0);
        let mut separation = true;
        let mut slack = i64::MAX;
        for (i, &(n, l)) in all.iter().enumerate() {
            // pairs further apart than 2·max ν satisfy the bound automatically
            for &(m, k) in all[i + 1..].iter().take_while(|&&(m, _)| m - n <= reach) {
                let s = (m - n) as i64 - (self.nu(l) + self.nu(k)) as i64;
                slack = slack.min(s);
                if s < 0 {
                    separation = false;
                }
            }
        }
        let density = (1..=self.levels()).all(|l| {
            let err = (self.count(l, horizon) as f64 / horizon as f64 - 1.0 / self.period as f64).abs();
            err <= (self.first(l) + self.period) as f64 / horizon as f64
        });
        FamilyCheck { horizon, disjoint, membership, separation, min_separation_slack: slack, density }
    }
}

/// Builds the family for nondecreasing positive `ν` and verifies all
/// invariants up to `horizon`.
pub fn build_family(nus: &[u64], horizon: u64) -> Result<SeparatedFamily> {
    if nus.is_empty() {
        return Err(FhcError::Invalid("at least one level is required".into()));
    }
    if nus.iter().any(|&v| v == 0) {
        return Err(FhcError::Invalid("separation parameters must be positive".into()));
    }
    if nus.windows(2).any(|w| w[1] < w[0]) {
        return Err(FhcError::Invalid("separation parameters must be nondecreasing".into()));
    }
    let gap = 2 * nus.iter().copied().max().unwrap_or(1);
    let family = SeparatedFamily { nus: nus.to_vec(), gap, period: nus.len() as u64 * gap };
    for l in 1..=family.levels() {
        let first = family.first(l);
        if horizon < first {
            return Err(FhcError::HorizonTooSmall { horizon, level: l, first });
        }
    }
    let check = family.check(horizon);
    if !check.all() {
        return Err(FhcError::Invalid(format!("family invariants fail: {check:?}")));
    }
    Ok(family)
}
