//! Parameter values from flags and config files.
//!
//! Numeric parameters take a single number or a grid: `a..b` (step 1),
//! `a..b:step`, or a comma list `x,y,z`. In config files a grid may also be
//! a TOML array.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Key {
    R,
    N,
    T,
    M,
    MirrorR,
    NBasis,
    Trials,
    Sectors,
    Covered,
}

impl Key {
    pub const ALL: [Key; 9] = [
        Key::R,
        Key::N,
        Key::T,
        Key::M,
        Key::MirrorR,
        Key::NBasis,
        Key::Trials,
        Key::Sectors,
        Key::Covered,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Key::R => "R",
            Key::N => "N",
            Key::T => "t",
            Key::M => "M",
            Key::MirrorR => "r",
            Key::NBasis => "n_basis",
            Key::Trials => "trials",
            Key::Sectors => "sectors",
            Key::Covered => "covered",
        }
    }

    pub fn is_integer(self) -> bool {
        matches!(
            self,
            Key::N | Key::M | Key::NBasis | Key::Trials | Key::Sectors | Key::Covered
        )
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Setting {
    Scalar(f64),
    Grid(Vec<f64>),
}

pub fn parse_setting(text: &str) -> Result<Setting, String> {
    let text = text.trim();
    if let Some((range, step)) = text.split_once("..").map(|(a, rest)| {
        let (b, step) = rest.split_once(':').unwrap_or((rest, "1"));
        ((a, b), step)
    }) {
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{s}` in `{text}` is not a number"))
        };
        let (start, end, step) = (num(range.0)?, num(range.1)?, num(step)?);
        if !(step > 0.0) || !step.is_finite() {
            return Err(format!("grid step in `{text}` must be positive"));
        }
        let count = ((end - start) / step + 1e-9).floor();
        if count > 1e6 {
            return Err(format!("grid `{text}` has too many points"));
        }
        let points = if count < 0.0 {
            Vec::new()
        } else {
            (0..=count as usize).map(|k| start + k as f64 * step).collect()
        };
        return Ok(Setting::Grid(points));
    }
    if text.contains(',') {
        let points = text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("`{s}` in `{text}` is not a number"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(Setting::Grid(points));
    }
    text.parse::<f64>()
        .map(Setting::Scalar)
        .map_err(|_| format!("`{text}` is neither a number nor a grid"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Svg,
    Text,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Svg => "svg",
            Format::Text => "txt",
        }
    }
}

/// Flags shared by `run`, `sweep` and `nested`; each mirrors a config key.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamFlags {
    /// Config file (TOML); flags override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Beam-splitter reflectivity.
    #[arg(long = "R", value_name = "VALUE|GRID")]
    pub big_r: Option<String>,
    /// Number of cycles.
    #[arg(long = "N", value_name = "VALUE|GRID")]
    pub n: Option<String>,
    /// Object transmission amplitude.
    #[arg(long = "t", value_name = "VALUE|GRID")]
    pub t: Option<String>,
    /// Pulse length in cavity round trips.
    #[arg(long = "M", value_name = "VALUE|GRID")]
    pub m: Option<String>,
    /// Cavity mirror amplitude reflectivity.
    #[arg(long = "r", value_name = "VALUE|GRID")]
    pub small_r: Option<String>,
    /// Basis size for the energy calculation.
    #[arg(long = "n_basis", value_name = "VALUE|GRID")]
    pub n_basis: Option<String>,
    /// Monte Carlo trials.
    #[arg(long, value_name = "VALUE|GRID")]
    pub trials: Option<String>,
    /// Angular sectors of the spherical wave.
    #[arg(long, value_name = "VALUE|GRID")]
    pub sectors: Option<String>,
    /// Sectors covered by the detector.
    #[arg(long, value_name = "VALUE|GRID")]
    pub covered: Option<String>,
    /// Place an opaque object (bare `--bomb` means true).
    #[arg(long, value_name = "BOOL", num_args = 0..=1, default_missing_value = "true")]
    pub bomb: Option<bool>,
    /// Let the two particles meet in the working area.
    #[arg(long, value_name = "BOOL", num_args = 0..=1, default_missing_value = "true")]
    pub coupled: Option<bool>,
    /// Random seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; defaults to $IFM_OUT_DIR/<name>.<ext> or stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

impl ParamFlags {
    fn value(&self, key: Key) -> Option<&String> {
        match key {
            Key::R => self.big_r.as_ref(),
            Key::N => self.n.as_ref(),
            Key::T => self.t.as_ref(),
            Key::M => self.m.as_ref(),
            Key::MirrorR => self.small_r.as_ref(),
            Key::NBasis => self.n_basis.as_ref(),
            Key::Trials => self.trials.as_ref(),
            Key::Sectors => self.sectors.as_ref(),
            Key::Covered => self.covered.as_ref(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum FileValue {
    Num(f64),
    List(Vec<f64>),
    Text(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    protocol: Option<String>,
    #[serde(rename = "R")]
    big_r: Option<FileValue>,
    #[serde(rename = "N")]
    n: Option<FileValue>,
    t: Option<FileValue>,
    #[serde(rename = "M")]
    m: Option<FileValue>,
    r: Option<FileValue>,
    n_basis: Option<FileValue>,
    trials: Option<FileValue>,
    sectors: Option<FileValue>,
    covered: Option<FileValue>,
    bomb: Option<bool>,
    coupled: Option<bool>,
    seed: Option<u64>,
    format: Option<Format>,
    out: Option<PathBuf>,
}

impl FileConfig {
    fn value(&self, key: Key) -> Option<&FileValue> {
        match key {
            Key::R => self.big_r.as_ref(),
            Key::N => self.n.as_ref(),
            Key::T => self.t.as_ref(),
            Key::M => self.m.as_ref(),
            Key::MirrorR => self.r.as_ref(),
            Key::NBasis => self.n_basis.as_ref(),
            Key::Trials => self.trials.as_ref(),
            Key::Sectors => self.sectors.as_ref(),
            Key::Covered => self.covered.as_ref(),
        }
    }
}

/// Merged configuration: file values overridden by flags.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    pub protocol: Option<String>,
    pub values: BTreeMap<Key, Setting>,
    pub bomb: Option<bool>,
    pub coupled: Option<bool>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

fn load_file(path: &Path) -> CliResult<FileConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn merge(flags: &ParamFlags) -> CliResult<Settings> {
    let file = match &flags.config {
        Some(path) => load_file(path)?,
        None => FileConfig::default(),
    };
    let mut values = BTreeMap::new();
    for key in Key::ALL {
        let setting = if let Some(text) = flags.value(key) {
            parse_setting(text).map_err(|e| CliError::Usage(format!("--{key}: {e}")))?
        } else {
            match file.value(key) {
                None => continue,
                Some(FileValue::Num(x)) => Setting::Scalar(*x),
                Some(FileValue::List(xs)) => Setting::Grid(xs.clone()),
                Some(FileValue::Text(s)) => {
                    parse_setting(s).map_err(|e| CliError::Config(format!("{key}: {e}")))?
                }
            }
        };
        values.insert(key, setting);
    }
    Ok(Settings {
        protocol: file.protocol,
        values,
        bomb: flags.bomb.or(file.bomb),
        coupled: flags.coupled.or(file.coupled),
        seed: flags.seed.or(file.seed),
        format: flags.format.or(file.format),
        out: flags.out.clone().or(file.out),
    })
}
