//! Command-line flags, the key-value config file, and their resolution into
//! a validated [`RunConfig`].

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use qlattice::p1::QuantizedGeometry;
use qlattice::quadrature::QuadratureSpec;
use qlattice::{GroupAction, Symbol};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::CliError;

pub const DEFAULT_SEED: u64 = 42;
/// Largest tensor power accepted anywhere.
pub const MAX_K: usize = 400;

#[derive(Parser, Debug)]
#[command(name = "qlattice", version, about = "Quantum-logic and Berezin-Toeplitz checks on P1")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Distributivity witness, orthomodular sweep and Gleason additivity in C^dim.
    LatticeCheck(Flags),
    /// Section spaces, Gram matrices and equivariant decompositions up to --max-k.
    Quantize(Flags),
    /// One Toeplitz operator T_k[f].
    Toeplitz(Flags),
    /// Latitude-band POVM and its Riemann-sum reconstruction.
    Povm(Flags),
    /// Dimension or trace sequences with power-law fits.
    Asymptotics(Flags),
    /// Every suite with default parameters.
    FullSuite(Flags),
    /// Read a key-value config file; flags given here override it.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Flags {
    /// Subcommand name; config files only.
    #[arg(skip)]
    #[serde(default)]
    pub command: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Random trials per dimension in lattice sweeps.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Truncation K of the Hardy space.
    #[arg(long)]
    pub max_k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub k: Option<usize>,
    /// height | one | raised-height | custom-harmonic L M
    #[arg(long, num_args = 1..=3, allow_negative_numbers = true)]
    #[serde(default, deserialize_with = "words")]
    pub symbol: Option<Vec<String>>,
    #[arg(long)]
    pub bands: Option<usize>,
    #[arg(long)]
    pub quadrature_degree: Option<usize>,
    /// circle | torus | su2
    #[arg(long)]
    pub action: Option<String>,
    /// Fixed weight nu_G for dimension sequences.
    #[arg(long, allow_negative_numbers = true)]
    pub nu: Option<i64>,
    #[arg(long)]
    pub k_min: Option<usize>,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub k_step: Option<usize>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub normalized: Option<bool>,
    #[arg(long)]
    pub volume: Option<f64>,
}

fn words<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<String>>, D::Error> {
    let s: Option<String> = Option::deserialize(d)?;
    Ok(s.map(|s| s.split_whitespace().map(str::to_owned).collect()))
}

impl Flags {
    /// Field-wise `self` over `base`.
    fn over(self, base: Flags) -> Flags {
        Flags {
            command: self.command.or(base.command),
            dim: self.dim.or(base.dim),
            trials: self.trials.or(base.trials),
            max_k: self.max_k.or(base.max_k),
            seed: self.seed.or(base.seed),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
            k: self.k.or(base.k),
            symbol: self.symbol.or(base.symbol),
            bands: self.bands.or(base.bands),
            quadrature_degree: self.quadrature_degree.or(base.quadrature_degree),
            action: self.action.or(base.action),
            nu: self.nu.or(base.nu),
            k_min: self.k_min.or(base.k_min),
            k_max: self.k_max.or(base.k_max),
            k_step: self.k_step.or(base.k_step),
            normalized: self.normalized.or(base.normalized),
            volume: self.volume.or(base.volume),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    LatticeCheck,
    Quantize,
    Toeplitz,
    Povm,
    Asymptotics,
    FullSuite,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::LatticeCheck => "lattice-check",
            CommandKind::Quantize => "quantize",
            CommandKind::Toeplitz => "toeplitz",
            CommandKind::Povm => "povm",
            CommandKind::Asymptotics => "asymptotics",
            CommandKind::FullSuite => "full-suite",
        }
    }

    fn parse(s: &str) -> Result<Self, CliError> {
        [
            CommandKind::LatticeCheck,
            CommandKind::Quantize,
            CommandKind::Toeplitz,
            CommandKind::Povm,
            CommandKind::Asymptotics,
            CommandKind::FullSuite,
        ]
        .into_iter()
        .find(|c| c.name() == s)
        .ok_or_else(|| CliError::Config(format!("command: unknown command `{s}`")))
    }
}

/// The symbols selectable from the command line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SymbolSpec {
    One,
    Height,
    /// `(1 + height)/2`
    RaisedHeight,
    Harmonic { l: usize, m: i64 },
}

impl SymbolSpec {
    pub fn parse(words: &[String]) -> Result<Self, CliError> {
        let bad = || CliError::Config(format!("symbol: cannot parse `{}`", words.join(" ")));
        match words.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
            ["one"] => Ok(SymbolSpec::One),
            ["height"] => Ok(SymbolSpec::Height),
            ["raised-height"] => Ok(SymbolSpec::RaisedHeight),
            ["custom-harmonic", l, m] => {
                let l: usize = l.parse().map_err(|_| bad())?;
                let m: i64 = m.parse().map_err(|_| bad())?;
                if m.unsigned_abs() as usize > l {
                    return Err(CliError::Config(format!("symbol: |m| = {} exceeds l = {l}", m.abs())));
                }
                Ok(SymbolSpec::Harmonic { l, m })
            }
            _ => Err(bad()),
        }
    }

    pub fn symbol(&self) -> Symbol {
        match *self {
            SymbolSpec::One => Symbol::one(),
            SymbolSpec::Height => Symbol::height(),
            SymbolSpec::RaisedHeight => Symbol::AffineHeight { offset: 0.5, slope: 0.5 },
            SymbolSpec::Harmonic { l, m } => Symbol::Harmonic { l, m, coeff: qlattice::C64::new(1.0, 0.0) },
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, SymbolSpec::One | SymbolSpec::Harmonic { l: 0, .. })
    }
}

impl fmt::Display for SymbolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolSpec::One => f.write_str("one"),
            SymbolSpec::Height => f.write_str("height"),
            SymbolSpec::RaisedHeight => f.write_str("raised-height"),
            SymbolSpec::Harmonic { l, m } => write!(f, "custom-harmonic {l} {m}"),
        }
    }
}

impl Serialize for SymbolSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A fully resolved and validated run. The output directory is not part of
/// the serialized form so reports do not depend on where they are written.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunConfig {
    pub command: CommandKind,
    pub seed: u64,
    pub format: Format,
    #[serde(skip)]
    pub out: PathBuf,
    pub dim: usize,
    pub trials: usize,
    pub max_k: usize,
    pub k: usize,
    pub symbol: SymbolSpec,
    /// `--symbol` was given; asymptotics then runs a trace sequence.
    pub symbol_explicit: bool,
    pub bands: usize,
    pub quadrature_degree: Option<usize>,
    pub action: String,
    pub nu: Option<i64>,
    pub k_min: usize,
    pub k_max: usize,
    pub k_step: usize,
    pub normalized: bool,
    pub volume: f64,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let (kind, flags) = match cli.command {
            Command::LatticeCheck(f) => (Some(CommandKind::LatticeCheck), f),
            Command::Quantize(f) => (Some(CommandKind::Quantize), f),
            Command::Toeplitz(f) => (Some(CommandKind::Toeplitz), f),
            Command::Povm(f) => (Some(CommandKind::Povm), f),
            Command::Asymptotics(f) => (Some(CommandKind::Asymptotics), f),
            Command::FullSuite(f) => (Some(CommandKind::FullSuite), f),
            Command::Run { config, flags } => (None, flags.over(read_config(&config)?)),
        };
        let kind = match (kind, &flags.command) {
            (Some(k), _) => k,
            (None, Some(name)) => CommandKind::parse(name)?,
            (None, None) => return Err(CliError::Config("command: missing from config file".into())),
        };
        Self::resolve(kind, flags)
    }

    pub fn resolve(command: CommandKind, f: Flags) -> Result<Self, CliError> {
        let cfg = RunConfig {
            command,
            seed: f.seed.unwrap_or(DEFAULT_SEED),
            format: f.format.unwrap_or(Format::Json),
            out: f.out.unwrap_or_else(|| PathBuf::from("reports")),
            dim: f.dim.unwrap_or(2),
            trials: f.trials.unwrap_or(1000),
            max_k: f.max_k.unwrap_or(12),
            k: f.k.unwrap_or(10),
            symbol_explicit: f.symbol.is_some(),
            symbol: SymbolSpec::parse(&f.symbol.unwrap_or_else(|| vec!["height".into()]))?,
            bands: f.bands.unwrap_or(10),
            quadrature_degree: f.quadrature_degree,
            action: f.action.unwrap_or_else(|| "circle".into()),
            nu: f.nu,
            k_min: f.k_min.unwrap_or(10),
            k_max: f.k_max.unwrap_or(100),
            k_step: f.k_step.unwrap_or(1),
            normalized: f.normalized.unwrap_or(false),
            volume: f.volume.unwrap_or(PI),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let fail = |field: &str, msg: String| Err(CliError::Config(format!("{field}: {msg}")));
        if self.dim < 2 {
            return fail("dim", format!("must be at least 2, got {}", self.dim));
        }
        if self.dim > 64 {
            return fail("dim", format!("must be at most 64, got {}", self.dim));
        }
        if self.trials == 0 {
            return fail("trials", "must be positive".into());
        }
        for (field, v) in [("max-k", self.max_k), ("k", self.k), ("k-max", self.k_max)] {
            if v > MAX_K {
                return fail(field, format!("must be at most {MAX_K}, got {v}"));
            }
        }
        if self.k_min > self.k_max {
            return fail("k-min", format!("{} exceeds k-max {}", self.k_min, self.k_max));
        }
        if self.k_step == 0 {
            return fail("k-step", "must be positive".into());
        }
        if self.bands == 0 || self.bands > 10_000 {
            return fail("bands", format!("must lie in 1..=10000, got {}", self.bands));
        }
        if !(self.volume > 0.0 && self.volume.is_finite()) {
            return fail("volume", format!("must be positive, got {}", self.volume));
        }
        GroupAction::parse(&self.action).map_err(|e| CliError::Config(format!("action: {e}")))?;
        if let Some(d) = self.quadrature_degree {
            let need = 2 * self.k + 2;
            if d < need {
                return fail("quadrature-degree", format!("{d} is below 2k + 2 = {need} for k = {}", self.k));
            }
        }
        Ok(())
    }

    pub fn action(&self) -> GroupAction {
        GroupAction::parse(&self.action).unwrap_or(GroupAction::Circle)
    }

    /// Geometry for `k` with the configured volume and quadrature.
    pub fn geometry(&self, k: usize) -> Result<QuantizedGeometry, CliError> {
        let g = QuantizedGeometry::new(k).with_volume(self.volume)?;
        Ok(match self.quadrature_degree {
            Some(d) => g.with_quadrature(QuadratureSpec::with_degree(d))?,
            None => g,
        })
    }
}

fn read_config(path: &Path) -> Result<Flags, CliError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(CliError::ConfigNotFound(path.into())),
        Err(e) => return Err(CliError::Io { path: path.into(), source: e }),
    };
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
