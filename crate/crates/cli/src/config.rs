//! Run configuration: JSON file plus command-line overrides.
//!
//! Every key is optional; a key set both in the file and on the command line
//! takes the command-line value and logs a warning. Unknown keys are errors.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Deserializer, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exponent,
    Classify,
    Simulate,
    Sweep,
    Kernel,
    Eigen,
    Certify,
    Duhamel,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_owned));
        f.write_str(s.as_deref().unwrap_or("?"))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// One or more values: a number, a list, `"a,b,c"` or the inclusive range
/// `"start:end:step"`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ValueList(pub Vec<f64>);

impl ValueList {
    pub fn single(&self) -> Option<f64> {
        match self.0.as_slice() {
            [v] => Some(*v),
            _ => None,
        }
    }
}

/// Decimal places written in a numeric literal.
fn decimals(s: &str) -> i32 {
    let mantissa = s.split(['e', 'E']).next().unwrap_or("");
    mantissa.split('.').nth(1).map_or(0, |f| f.len() as i32)
}

impl FromStr for ValueList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let num = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{x}` is not a number"))
                .and_then(|v| if v.is_finite() { Ok(v) } else { Err(format!("`{x}` is not finite")) })
        };
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            let [a, b, h] = parts.as_slice() else {
                return Err(format!("range `{s}` must be start:end:step"));
            };
            let (start, end, step) = (num(a)?, num(b)?, num(h)?);
            if !(step > 0.0) || end < start {
                return Err(format!("range `{s}` needs step > 0 and end >= start"));
            }
            let count = ((end - start) / step + 1e-9).floor() as usize + 1;
            if count > 1_000_000 {
                return Err(format!("range `{s}` has too many points"));
            }
            // snap to the written precision so 1.2 + 2·0.2 prints as 1.6
            let scale = 10f64.powi(decimals(a).max(decimals(h)).min(15));
            let values = (0..count)
                .map(|i| ((start + i as f64 * step) * scale).round() / scale)
                .collect();
            return Ok(Self(values));
        }
        let values = s.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
        if values.is_empty() {
            return Err("empty value list".into());
        }
        Ok(Self(values))
    }
}

impl<'de> Deserialize<'de> for ValueList {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            One(f64),
            Many(Vec<f64>),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::One(v) => Ok(Self(vec![v])),
            Raw::Many(v) if !v.is_empty() => Ok(Self(v)),
            Raw::Many(_) => Err(serde::de::Error::custom("empty value list")),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl fmt::Display for ValueList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

fn shown<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).unwrap_or_else(|_| "?".into())
}

macro_rules! run_config {
    ($( $(#[$doc:meta])* $field:ident : $ty:ty ),* $(,)?) => {
        /// Settings for one invocation. All keys are optional in the file.
        #[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, clap::Args)]
        #[serde(deny_unknown_fields, default)]
        pub struct RunConfig {
            /// Subcommand to run.
            #[arg(skip)]
            pub mode: Option<Mode>,
            $( $(#[$doc])* #[arg(long)] pub $field: Option<$ty>, )*
        }

        impl RunConfig {
            /// Overlay `flags` on `self`; returns one warning per overridden key.
            pub fn merge(mut self, flags: RunConfig) -> (RunConfig, Vec<String>) {
                let mut warnings = Vec::new();
                if let Some(mode) = flags.mode {
                    if let Some(old) = self.mode.filter(|m| *m != mode) {
                        warnings.push(format!("mode `{mode}` on the command line overrides `{old}` from the config file"));
                    }
                    self.mode = Some(mode);
                }
                $(
                    if let Some(v) = flags.$field {
                        if let Some(old) = self.$field.as_ref().filter(|o| **o != v) {
                            warnings.push(format!(
                                "--{} = {} overrides config value {}",
                                stringify!($field).replace('_', "-"), shown(&v), shown(old)
                            ));
                        }
                        self.$field = Some(v);
                    }
                )*
                (self, warnings)
            }
        }
    };
}

run_config! {
    /// Space dimension n (list or range allowed in sweeps).
    #[arg(allow_hyphen_values = true)]
    n: ValueList,
    /// Inverse-square potential coefficient ω.
    #[arg(allow_hyphen_values = true)]
    omega: ValueList,
    /// Reaction growth exponent m.
    #[arg(allow_hyphen_values = true)]
    m: ValueList,
    /// Nonlinearity exponent p.
    #[arg(allow_hyphen_values = true)]
    p: ValueList,
    /// Lower reaction constant c1 in a(r) = c1 (1 + r²)^{m/2}.
    c1: f64,
    /// Upper reaction constant c2 (certificates).
    c2: f64,
    /// Potential regularization ε in ω/(r² + ε²).
    eps: f64,
    /// Borderline margin |p - p*| below which no verdict is claimed.
    borderline_margin: f64,
    /// Initial bump amplitude.
    amplitude: f64,
    /// Initial bump center.
    center: f64,
    /// Initial bump width.
    width: f64,
    /// Exterior radius; omit for the whole space.
    r0: f64,
    /// Simulation horizon.
    t_max: f64,
    /// Radial grid spacing.
    spacing: f64,
    /// Outer truncation radius.
    r_max: f64,
    /// Skip simulations in sweeps.
    theory_only: bool,
    /// Kernel or drift dimension N.
    dimension: f64,
    /// Effective reaction exponent M (duhamel).
    big_m: f64,
    /// Times.
    #[arg(allow_hyphen_values = true)]
    t: ValueList,
    /// Radii.
    #[arg(allow_hyphen_values = true)]
    r: ValueList,
    /// Source radii (kernel).
    #[arg(allow_hyphen_values = true)]
    rho: ValueList,
    /// Inner radius of the eigenproblem shell.
    a: f64,
    /// Outer radius of the eigenproblem shell.
    b: f64,
    /// Inverse-square coefficient of the eigenproblem potential.
    coeff: f64,
    /// Grid points (eigen).
    grid_points: usize,
    /// Output file; stdout when absent.
    output: PathBuf,
    /// Output format.
    format: Format,
    /// Worker threads for sweeps and certificate batches.
    parallelism: usize,
    /// Seed recorded in reports.
    seed: u64,
}

/// Environment variable that overrides `parallelism`.
pub const THREADS_ENV: &str = "FUJITA_LAB_THREADS";

/// Read a JSON config; parse errors carry line and column.
pub fn parse_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_str(&text).map_err(|e| match e {
        CliError::Validation(msg) => CliError::Validation(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Validation(e.to_string()))
}

/// Merge file and flags, log the override warnings, and resolve parallelism.
pub fn resolve(file: Option<RunConfig>, flags: RunConfig) -> Result<RunConfig, CliError> {
    let (mut cfg, warnings) = file.unwrap_or_default().merge(flags);
    for w in &warnings {
        warn!("{w}");
    }
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let k: usize = v
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("{THREADS_ENV} = `{v}` is not a positive integer")))?;
        cfg.parallelism = Some(k);
    }
    if cfg.parallelism == Some(0) {
        return Err(CliError::Validation("parallelism must be at least 1".into()));
    }
    if cfg.mode.is_none() {
        return Err(CliError::Validation("no mode given (e.g. `fujita-lab exponent ...`)".into()));
    }
    Ok(cfg)
}

impl RunConfig {
    pub fn threads(&self) -> usize {
        self.parallelism
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}
