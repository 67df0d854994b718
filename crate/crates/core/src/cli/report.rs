use std::fmt::Write;

use super::config::RunConfig;

/// Decimal rendering at 12 significant digits.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.11e}")
    }
}

/// Line-oriented report: a header, `key=value` lines and records of the
/// form `kind key=value key=value …`.
#[derive(Debug, Clone, Default)]
pub struct Report {
    text: String,
}

impl Report {
    pub fn new(cfg: &RunConfig) -> Self {
        let mut r = Report::default();
        r.line("# fhc-lab report");
        r.field("command", &cfg.command);
        r.field("config_hash", cfg.hash());
        r.field("weight", cfg.weight_text.trim());
        r.field("space", &cfg.space);
        r.field("grid_step", num(cfg.grid_step()));
        r.field("cells_per_unit", cfg.cells_per_unit);
        r.field("horizon", cfg.horizon);
        r
    }

    pub fn line(&mut self, s: &str) {
        self.text.push_str(s);
        self.text.push('\n');
    }

    pub fn field(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.text, "{key}={value}");
    }

    pub fn tolerance(&mut self, key: &str, value: f64) {
        self.field(&format!("tolerance.{key}"), num(value));
    }

    pub fn record(&mut self, kind: &str, fields: &[(&str, String)]) {
        self.text.push_str(kind);
        for (k, v) in fields {
            let _ = write!(self.text, " {k}={v}");
        }
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}
