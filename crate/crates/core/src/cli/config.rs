use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::gridfn::{cells_per_unit, GridFunction, SpaceSpec};
use crate::weights::{Certificate, TailDescriptor, Weight};

use super::CliError;

/// Flags shared by every subcommand; each one can also be set in the
/// config file under the same name.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// exponential(a), rational, constant(c), sinlog or file:<path.toml>.
    #[arg(long)]
    pub weight: Option<String>,
    /// lp or c0.
    #[arg(long)]
    pub space: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Grid step 1/n, written as "1/n" or as a decimal.
    #[arg(long)]
    pub grid_step: Option<String>,
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Number of targets (levels) to use.
    #[arg(long)]
    pub levels: Option<usize>,
    /// Semicolon-separated indicators, e.g. "chi(0,1);chi(0,2)".
    #[arg(long)]
    pub targets: Option<String>,
    /// Orbit: margin over the return budget. Periodic: defect budget.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Orbit scan step, dividing 1.
    #[arg(long)]
    pub step: Option<String>,
    #[arg(long)]
    pub period: Option<u64>,
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long)]
    pub truncation: Option<u64>,
    /// Report file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Construct: file receiving the vector.
    #[arg(long)]
    pub vector_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Number {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Number {
    fn text(&self) -> String {
        match self {
            Number::Float(v) => v.to_string(),
            Number::Int(v) => v.to_string(),
            Number::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum TargetList {
    Joined(String),
    List(Vec<String>),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    weight: Option<String>,
    space: Option<String>,
    p: Option<f64>,
    grid_step: Option<Number>,
    horizon: Option<u64>,
    levels: Option<usize>,
    targets: Option<TargetList>,
    eps: Option<f64>,
    step: Option<Number>,
    period: Option<u64>,
    delta: Option<Number>,
    truncation: Option<u64>,
    out: Option<PathBuf>,
    vector_out: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampledFile {
    step: f64,
    values: Vec<f64>,
    tail: Option<TailDescriptor>,
    certificate: Option<Certificate>,
}

/// Per-command defaults.
#[derive(Debug, Clone, Copy)]
pub struct Defaults {
    pub horizon: u64,
    pub eps: f64,
}

/// Fully resolved configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: String,
    pub weight_text: String,
    pub weight_digest: Option<String>,
    pub space: SpaceSpec,
    pub grid_step_text: String,
    pub cells_per_unit: u32,
    pub horizon: u64,
    pub target_texts: Vec<String>,
    pub targets: Vec<GridFunction>,
    pub eps: f64,
    pub step: f64,
    pub period: u64,
    pub delta: f64,
    pub truncation: u64,
    pub out: Option<PathBuf>,
    pub vector_out: Option<PathBuf>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Parses "1/n" or a decimal.
pub fn parse_fraction(text: &str) -> Result<f64, CliError> {
    let t = text.trim();
    let value = match t.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| config_err(format!("bad numerator in {t:?}")))?;
            let b: f64 = b.trim().parse().map_err(|_| config_err(format!("bad denominator in {t:?}")))?;
            a / b
        }
        None => t.parse().map_err(|_| config_err(format!("not a number: {t:?}")))?,
    };
    if !value.is_finite() {
        return Err(config_err(format!("not a finite number: {t:?}")));
    }
    Ok(value)
}

fn call_argument(text: &str, name: &str) -> Option<Result<f64, CliError>> {
    let inner = text.strip_prefix(name)?.trim().strip_prefix('(')?.strip_suffix(')')?;
    Some(parse_fraction(inner))
}

/// Parses a weight; file weights also return the digest of the file contents.
pub fn parse_weight(text: &str, base: &Path) -> Result<(Weight, Option<String>), CliError> {
    let t = text.trim();
    if let Some(path) = t.strip_prefix("file:") {
        let path = base.join(path.trim());
        let raw = fs::read_to_string(&path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let file: SampledFile = toml::from_str(&raw).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let w = Weight::sampled(file.step, file.values, file.tail).map_err(|e| config_err(e.to_string()))?;
        let digest = hex::encode(Sha256::digest(raw.as_bytes()));
        return Ok((w.with_certificate(file.certificate), Some(digest)));
    }
    let weight = match t {
        "rational" => Ok(Weight::rational()),
        "sinlog" => Ok(Weight::sinlog()),
        _ => {
            if let Some(rate) = call_argument(t, "exponential") {
                Weight::exponential(rate?)
            } else if let Some(value) = call_argument(t, "constant") {
                Weight::constant(value?)
            } else {
                return Err(config_err(format!(
                    "unknown weight {t:?}; expected exponential(a), rational, constant(c), sinlog or file:<path>"
                )));
            }
        }
    };
    weight.map(|w| (w, None)).map_err(|e| config_err(e.to_string()))
}

pub fn split_targets(text: &str) -> Vec<String> {
    text.split(';').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

impl RunConfig {
    pub fn resolve(command: &str, flags: &Flags, defaults: Defaults) -> Result<Self, CliError> {
        let (file, base) = match &flags.config {
            Some(path) => {
                let raw = fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
                let file: FileConfig =
                    toml::from_str(&raw).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
                (file, path.parent().map(Path::to_path_buf).unwrap_or_default())
            }
            None => (FileConfig::default(), PathBuf::new()),
        };

        let weight_text = flags
            .weight
            .clone()
            .or(file.weight)
            .ok_or_else(|| config_err("missing weight (--weight or `weight` in the config file)"))?;
        let (weight, weight_digest) = parse_weight(&weight_text, &base)?;
        let p = flags.p.or(file.p).unwrap_or(1.0);
        let space_text = flags.space.clone().or(file.space).unwrap_or_else(|| "lp".into());
        let space = match space_text.trim().to_ascii_lowercase().as_str() {
            "lp" => SpaceSpec::lp(p, weight).map_err(|e| config_err(e.to_string()))?,
            "c0" => SpaceSpec::c0(weight),
            other => return Err(config_err(format!("unknown space {other:?}; expected lp or c0"))),
        };

        let grid_step_text = flags
            .grid_step
            .clone()
            .or(file.grid_step.map(|n| n.text()))
            .unwrap_or_else(|| "1/32".into());
        let cells_per_unit =
            cells_per_unit(parse_fraction(&grid_step_text)?).map_err(|e| config_err(e.to_string()))?;

        let horizon = flags.horizon.or(file.horizon).unwrap_or(defaults.horizon);
        if horizon == 0 {
            return Err(config_err("horizon must be positive"));
        }

        let mut target_texts = match (&flags.targets, file.targets) {
            (Some(t), _) => split_targets(t),
            (None, Some(TargetList::Joined(t))) => split_targets(&t),
            (None, Some(TargetList::List(v))) => v,
            (None, None) => vec!["chi(0,1)".into()],
        };
        if let Some(levels) = flags.levels.or(file.levels) {
            if levels == 0 || levels > target_texts.len() {
                return Err(config_err(format!("levels must lie in 1..={}, got {levels}", target_texts.len())));
            }
            target_texts.truncate(levels);
        }
        if target_texts.is_empty() {
            return Err(config_err("at least one target is required"));
        }
        let targets = target_texts
            .iter()
            .map(|t| GridFunction::parse_indicator(t, cells_per_unit))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| config_err(e.to_string()))?;

        let eps = flags.eps.or(file.eps).unwrap_or(defaults.eps);
        if !(eps > 0.0) {
            return Err(config_err(format!("eps must be positive, got {eps}")));
        }
        let step_text = flags.step.clone().or(file.step.map(|n| n.text())).unwrap_or_else(|| "1/8".into());
        let step = parse_fraction(&step_text)?;
        let delta_text = flags.delta.clone().or(file.delta.map(|n| n.text())).unwrap_or_else(|| "1/4".into());
        let delta = parse_fraction(&delta_text)?;

        Ok(RunConfig {
            command: command.into(),
            weight_text,
            weight_digest,
            space,
            grid_step_text,
            cells_per_unit,
            horizon,
            target_texts,
            targets,
            eps,
            step,
            period: flags.period.or(file.period).unwrap_or(5),
            delta,
            truncation: flags.truncation.or(file.truncation).unwrap_or(10),
            out: flags.out.clone().or(file.out),
            vector_out: flags.vector_out.clone().or(file.vector_out),
        })
    }

    pub fn grid_step(&self) -> f64 {
        1.0 / self.cells_per_unit as f64
    }

    /// Canonical text of every setting that affects the numbers.
    pub fn canonical(&self) -> String {
        let (space, p) = match &self.space {
            SpaceSpec::Lp { p, .. } => ("lp", *p),
            SpaceSpec::C0 { .. } => ("c0", 1.0),
        };
        format!(
            "command={}\nweight={}\nweight_digest={}\nspace={space}\np={p:?}\ncells_per_unit={}\nhorizon={}\ntargets={}\neps={:?}\nstep={:?}\nperiod={}\ndelta={:?}\ntruncation={}\n",
            self.command,
            self.weight_text.trim(),
            self.weight_digest.as_deref().unwrap_or("-"),
            self.cells_per_unit,
            self.horizon,
            self.target_texts.join(";"),
            self.eps,
            self.step,
            self.period,
            self.delta,
            self.truncation,
        )
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}
