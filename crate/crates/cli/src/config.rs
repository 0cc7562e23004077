use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use wedgetrap::geometry::{MassSystem, SystemFile, SystemSpec};

/// Everything needed to reproduce a run. Serialized verbatim into the manifest.
#[derive(Debug, Clone, Parser, Serialize, Deserialize)]
#[command(name = "wedgetrap", version, about = "Hard-core few-body systems in a 1D harmonic trap")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Mass ratios: a value, a comma list, or a range `a..b` / `a..b:n`.
    #[arg(long, global = true, default_value = "1", allow_hyphen_values = true)]
    pub beta: String,
    /// System shorthand such as 2b2b, 2b2f, 2f2f, 3f1.
    #[arg(long, global = true, default_value = "2b2b")]
    pub system: String,
    /// TOML mass-system file; overrides --system where supported.
    #[arg(long, global = true)]
    pub system_file: Option<PathBuf>,
    /// Largest sine-basis size per axis.
    #[arg(long, global = true, default_value_t = 24)]
    pub nmax: usize,
    /// Grid-solver segments per fan edge on the coarsest mesh.
    #[arg(long, global = true, default_value_t = 16)]
    pub grid_n: usize,
    /// Monte Carlo samples (per sweep for volumes, per grid point for observables).
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Relative MC tolerance on the sum rule; exceeding it fails the run.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Command {
    /// Angular levels and relative energies per wedge and symmetry class.
    Spectrum {
        /// Restrict to one wedge word or label.
        #[arg(long)]
        wedge: Option<String>,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Monte Carlo solid-angle fraction of every ordering sector.
    Volumes,
    /// One-body density of a species.
    Density {
        #[arg(long, default_value_t = 'A')]
        species: char,
        #[arg(long, default_value_t = 61)]
        points: usize,
        #[arg(long, default_value_t = 6.0)]
        extent: f64,
        #[command(flatten)]
        #[serde(flatten)]
        state: StateArgs,
    },
    /// Pair correlation of two particles on a square grid.
    Paircorr {
        /// One-based particle indices, e.g. `1,3`.
        #[arg(long, default_value = "1,3")]
        pair: String,
        #[arg(long, default_value_t = 31)]
        points: usize,
        #[arg(long, default_value_t = 4.0)]
        extent: f64,
        #[command(flatten)]
        #[serde(flatten)]
        state: StateArgs,
    },
    /// One-body momentum distribution of a species.
    Momentum {
        #[arg(long, default_value_t = 'A')]
        species: char,
        #[arg(long, default_value_t = 7.0)]
        half_width: f64,
        #[arg(long, default_value_t = 64)]
        nx: usize,
        #[arg(long, default_value_t = 128)]
        np: usize,
        #[command(flatten)]
        #[serde(flatten)]
        state: StateArgs,
    },
    /// Two-body energies against the coupling; --beta is the mass ratio of the pair.
    Twobody {
        #[arg(long, default_value = "-10..10", allow_hyphen_values = true)]
        g: String,
        #[arg(long, default_value_t = 3)]
        branches: usize,
    },
    /// Scaling factor λ(t) after a change of trap frequency.
    Quench {
        #[arg(long, value_enum, default_value_t = ScheduleKind::Sudden)]
        schedule: ScheduleKind,
        #[arg(long, default_value_t = 1.0)]
        omega0: f64,
        #[arg(long, default_value_t = 2.0)]
        omega1: f64,
        /// Ramp duration for linear-ramp.
        #[arg(long, default_value_t = 1.0)]
        duration: f64,
        #[arg(long, default_value_t = 10.0)]
        t_end: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
    },
    /// Spectral against grid eigenvalues on every wedge.
    Oracle {
        #[arg(long)]
        wedge: Option<String>,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Mass ratio where the 2b+2f ground state changes ordering.
    Betac {
        #[arg(long, default_value_t = 1.0)]
        lo: f64,
        #[arg(long, default_value_t = 2.0)]
        hi: f64,
        #[arg(long, default_value_t = 0.01)]
        tol: f64,
    },
    /// Re-run a configuration from a JSON file or a previous manifest.
    Run { config: PathBuf },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum { .. } => "spectrum",
            Command::Volumes => "volumes",
            Command::Density { .. } => "density",
            Command::Paircorr { .. } => "paircorr",
            Command::Momentum { .. } => "momentum",
            Command::Twobody { .. } => "twobody",
            Command::Quench { .. } => "quench",
            Command::Oracle { .. } => "oracle",
            Command::Betac { .. } => "betac",
            Command::Run { .. } => "run",
        }
    }
}

/// Which four-body state to sample; the system ground state by default.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct StateArgs {
    #[arg(long)]
    pub wedge: Option<String>,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub parity: f64,
    #[arg(long, default_value_t = 0)]
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    Constant,
    Sudden,
    LinearRamp,
}

/// An invalid configuration, reported with exit status 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Usage(msg.into()))
}

/// Parses `1`, `1,2,5`, `1..10` or `1..10:19`; a bare range gets `default_n` points.
pub fn parse_values(text: &str, default_n: usize) -> anyhow::Result<Vec<f64>> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| usage(format!("not a number: '{s}' in '{text}'")));
    let mut out = Vec::new();
    for item in text.split(',').filter(|s| !s.trim().is_empty()) {
        match item.split_once("..") {
            Some((a, rest)) => {
                let (b, n) = match rest.split_once(':') {
                    Some((b, n)) => (b, n.trim().parse::<usize>().map_err(|_| usage(format!("bad point count in '{item}'")))?),
                    None => (rest, default_n),
                };
                let (a, b) = (num(a)?, num(b)?);
                if n < 2 || !(a.is_finite() && b.is_finite()) || a >= b {
                    return Err(usage(format!("range '{item}' needs finite a < b and at least 2 points")));
                }
                out.extend((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64));
            }
            None => out.push(num(item)?),
        }
    }
    if out.is_empty() {
        return Err(usage(format!("no values in '{text}'")));
    }
    Ok(out)
}

pub fn parse_pair(text: &str) -> anyhow::Result<(usize, usize)> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => {
            let (a, b) = (a.parse::<usize>(), b.parse::<usize>());
            match (a, b) {
                (Ok(a), Ok(b)) if a >= 1 && b >= 1 && a != b => Ok((a - 1, b - 1)),
                _ => Err(usage(format!("pair '{text}' needs two distinct one-based indices"))),
            }
        }
        _ => Err(usage(format!("pair '{text}' needs the form i,j"))),
    }
}

impl RunConfig {
    pub fn betas(&self) -> anyhow::Result<Vec<f64>> {
        let b = parse_values(&self.beta, 10)?;
        if b.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(usage("mass ratios must be positive and finite"));
        }
        Ok(b)
    }

    pub fn spec(&self) -> anyhow::Result<SystemSpec> {
        self.system.parse().map_err(|e: wedgetrap::Error| usage(e.to_string()))
    }

    /// The file system if given, otherwise the shorthand system at `beta`.
    pub fn system_at(&self, beta: f64) -> anyhow::Result<MassSystem> {
        if let Some(path) = &self.system_file {
            let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let file = SystemFile::parse(&text).map_err(|e| usage(e.to_string()))?;
            return file.build().map_err(|e| usage(e.to_string()));
        }
        self.spec()?.build(beta).map_err(|e| usage(e.to_string()))
    }

    pub fn samples_or(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }

    /// Sine-basis ladder ending at `nmax`.
    pub fn ladder(&self) -> anyhow::Result<[usize; 3]> {
        if self.nmax < 6 {
            return Err(usage("--nmax must be at least 6"));
        }
        Ok([self.nmax * 2 / 3, self.nmax * 5 / 6, self.nmax])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_lists_and_ranges() {
        assert_eq!(parse_values("1,2.5", 10).unwrap(), vec![1.0, 2.5]);
        assert_eq!(parse_values("0..1:3", 10).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_values("-1..1", 5).unwrap().len(), 5);
        assert!(parse_values("2..1", 5).is_err());
        assert!(parse_values("x", 5).is_err());
    }

    #[test]
    fn pairs_are_one_based() {
        assert_eq!(parse_pair("1,3").unwrap(), (0, 2));
        assert!(parse_pair("2,2").is_err());
        assert!(parse_pair("0,1").is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = RunConfig::try_parse_from(["wedgetrap", "density", "--beta", "2", "--species", "B"]).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }
}
