use std::fs;

use serde::Serialize;

use crate::classify::{classify as classify_space, necessary_condition_scan, Decision};
use crate::fhc::{
    build_periodic_point, build_vector, level_budget, level_tolerance, periodic_defect_profile, scan_orbit,
    verify_returns, FhcVector, DISCRETIZATION_CONSTANT,
};

use super::config::{Defaults, RunConfig};
use super::report::{num, Report};
use super::{CliError, Outcome};

pub const CLASSIFY_DEFAULTS: Defaults = Defaults { horizon: 1000, eps: 1e-10 };
pub const CONSTRUCT_DEFAULTS: Defaults = Defaults { horizon: 2000, eps: 0.05 };
pub const ORBIT_DEFAULTS: Defaults = Defaults { horizon: 2000, eps: 0.05 };
pub const PERIODIC_DEFAULTS: Defaults = Defaults { horizon: 100, eps: 1e-6 };

/// Fraction of the family density `1/P` the orbit scan must reach.
const DENSITY_FLOOR: f64 = 0.8;
const TRANSFER_TOLERANCE: f64 = 0.01;
const NECESSARY_STRIDE: u64 = 24;
const NECESSARY_TERMS: u64 = 200;

fn quoted(s: &str) -> String {
    format!("{s:?}")
}

fn verdict_record(r: &mut Report, name: &str, d: &Decision) {
    r.record("verdict", &[("name", name.into()), ("value", d.verdict.to_string()), ("evidence", quoted(&d.evidence))]);
}

pub fn classify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let c = classify_space(&cfg.space, cfg.horizon as f64)?;
    let w = cfg.space.weight();
    let seq: Vec<u64> = (1..=NECESSARY_TERMS).map(|k| NECESSARY_STRIDE * k).collect();
    let scan = necessary_condition_scan(w, &seq, cfg.eps)?;

    let mut r = Report::new(cfg);
    r.tolerance("necessary_eps", cfg.eps);
    r.field("certificate.m", num(c.certificate.m));
    r.field("certificate.omega", num(c.certificate.omega));
    r.field("liminf_estimate", num(c.liminf_estimate));
    r.field("liminf_at", num(c.liminf_at));
    for (name, d) in [
        ("hypercyclic", &c.hypercyclic),
        ("chaotic", &c.chaotic),
        ("fhc_criterion", &c.fhc_criterion),
        ("operator_criterion", &c.operator_criterion),
        ("bounded", &c.bounded),
        ("fhc_necessary", &c.fhc_necessary),
    ] {
        verdict_record(&mut r, name, d);
    }
    for (name, t) in [("integral", &c.integral), ("series", &c.series)] {
        r.record(
            "test",
            &[
                ("name", name.into()),
                ("verdict", t.verdict.to_string()),
                ("partial", num(t.partial)),
                ("cutoff", num(t.cutoff)),
                ("tail_lower", num(t.tail_lower)),
                ("tail_upper", num(t.tail_upper)),
            ],
        );
    }
    r.record(
        "necessary_scan",
        &[
            ("stride", NECESSARY_STRIDE.to_string()),
            ("terms", NECESSARY_TERMS.to_string()),
            ("sup", num(scan.sup)),
            ("growth", num(scan.growth)),
            ("below_eps", scan.below_eps.to_string()),
            ("unbounded_growth", scan.unbounded_growth().to_string()),
        ],
    );
    r.field("status", "ok");
    Ok(Outcome { report: r.finish(), budgets_met: true })
}

#[derive(Serialize)]
struct VectorFile<'a> {
    config_hash: String,
    cells_per_unit: u32,
    horizon: u64,
    targets: &'a [String],
    thresholds: &'a [u64],
    gap: u64,
    period: u64,
    values: &'a [f64],
}

fn family_records(r: &mut Report, v: &FhcVector) {
    r.field("family.gap", v.family.gap());
    r.field("family.period", v.family.period());
    r.field("block_norm_sum", num(v.block_norm_sum));
    r.field("truncation_bound", num(v.truncation_bound));
    r.field("support_cells", v.x.support_cells());
}

fn checked_horizon(v: &FhcVector) -> Result<u64, CliError> {
    let reach = v.max_support().ceil() as u64 + 1;
    v.horizon
        .checked_sub(reach)
        .filter(|&h| h > 0)
        .ok_or_else(|| CliError::Config(format!("horizon {} leaves no room for verification", v.horizon)))
}

pub fn construct(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let v = build_vector(&cfg.targets, &cfg.space, cfg.horizon)?;
    let check_horizon = checked_horizon(&v)?;
    let returns = verify_returns(&v, check_horizon)?;

    let mut r = Report::new(cfg);
    r.tolerance("discretization_constant", DISCRETIZATION_CONSTANT);
    r.tolerance("discretization_slack", v.discretization_slack());
    r.field("check_horizon", check_horizon);
    family_records(&mut r, &v);
    for lr in &returns.levels {
        let l = lr.level;
        r.record(
            "level",
            &[
                ("l", l.to_string()),
                ("target", cfg.target_texts[l - 1].clone()),
                ("tail_tolerance", num(level_tolerance(l))),
                ("threshold_real", num(v.raw_thresholds[l - 1])),
                ("threshold", lr.threshold.to_string()),
                ("period", lr.period.to_string()),
                ("offset", lr.offset.to_string()),
                ("checked", lr.checked.to_string()),
                ("max_error", num(lr.max_error)),
                ("argmax", lr.argmax.to_string()),
                ("budget", num(lr.budget)),
                ("slack", num(lr.slack)),
                ("density", num(v.family.count(l, check_horizon) as f64 / check_horizon as f64)),
                ("pass", lr.pass.to_string()),
            ],
        );
    }
    if let Some(path) = &cfg.vector_out {
        let file = VectorFile {
            config_hash: cfg.hash(),
            cells_per_unit: cfg.cells_per_unit,
            horizon: cfg.horizon,
            targets: &cfg.target_texts,
            thresholds: &v.thresholds,
            gap: v.family.gap(),
            period: v.family.period(),
            values: v.x.values(),
        };
        let text = toml::to_string(&file).map_err(|e| CliError::Internal(e.to_string()))?;
        fs::write(path, text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        r.field("vector_file", path.display());
    }
    r.field("status", if returns.all_pass { "ok" } else { "budget_violation" });
    Ok(Outcome { report: r.finish(), budgets_met: returns.all_pass })
}

pub fn orbit(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let v = build_vector(&cfg.targets, &cfg.space, cfg.horizon)?;
    let horizon = cfg.horizon as f64;
    let period = v.family.period() as f64;

    let mut r = Report::new(cfg);
    r.tolerance("eps_margin", cfg.eps);
    r.tolerance("density_floor", DENSITY_FLOOR);
    r.tolerance("transfer", TRANSFER_TOLERANCE);
    r.field("scan_step", num(cfg.step));
    family_records(&mut r, &v);
    let mut all = true;
    for l in 1..=v.family.levels() {
        let u = &v.smoothed[l - 1];
        let eps = level_budget(l) + cfg.eps;
        let scan = scan_orbit(&v.x, u, &cfg.space, horizon, cfg.step)?;
        let hits = scan.report(eps)?;
        let transfer = scan.transfer(u, 2.0 * eps, &cfg.space, TRANSFER_TOLERANCE)?;
        let floor = DENSITY_FLOOR / period;
        let pass = hits.discrete.estimate >= floor && transfer.holds;
        all &= pass;
        r.record(
            "level",
            &[
                ("l", l.to_string()),
                ("threshold", v.family.nu(l).to_string()),
                ("period", v.family.period().to_string()),
                ("eps", num(eps)),
                ("discrete_density", num(hits.discrete.estimate)),
                ("continuous_density", num(hits.continuous.estimate)),
                ("density_floor", num(floor)),
                ("family_density", num(v.family.count(l, cfg.horizon) as f64 / horizon)),
                ("delta_hat", num(transfer.delta_hat)),
                ("transfer_continuous", num(transfer.continuous)),
                ("transfer_discrete_half", num(transfer.discrete_half)),
                ("transfer_holds", transfer.holds.to_string()),
                ("pass", pass.to_string()),
            ],
        );
        for w in hits.discrete.profile.chunks((cfg.horizon as usize / 10).max(1)) {
            if let Some(&(n, d)) = w.last() {
                r.record("window", &[("l", l.to_string()), ("n", num(n)), ("discrete_ratio", num(d))]);
            }
        }
    }
    r.field("status", if all { "ok" } else { "budget_violation" });
    Ok(Outcome { report: r.finish(), budgets_met: all })
}

pub fn periodic(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let y = &cfg.targets[0];
    let p = build_periodic_point(y, cfg.period, cfg.delta, cfg.truncation, &cfg.space)?;
    let profile = periodic_defect_profile(y, cfg.period, cfg.delta, cfg.truncation, &cfg.space)?;
    let monotone = profile.windows(2).all(|w| w[1] <= w[0]);
    let pass = p.periodic_defect < cfg.eps && monotone;

    let mut r = Report::new(cfg);
    r.tolerance("defect_budget", cfg.eps);
    r.field("target", &cfg.target_texts[0]);
    r.field("period", cfg.period);
    r.field("delta", num(cfg.delta));
    r.field("truncation", cfg.truncation);
    for (k, d) in profile.iter().enumerate() {
        r.record("truncation", &[("k", (k + 1).to_string()), ("periodic_defect", num(*d))]);
    }
    r.field("periodic_defect", num(p.periodic_defect));
    r.field("center_defect", num(p.center_defect));
    r.field("center_to_target", num(p.center_to_target));
    r.field("monotone", monotone);
    r.field("status", if pass { "ok" } else { "budget_violation" });
    Ok(Outcome { report: r.finish(), budgets_met: pass })
}

