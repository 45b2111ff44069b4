//! Command-line arguments, the optional TOML config file and their merge.
//!
//! Flags override config-file values, which override built-in defaults.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::CliError;

#[derive(Parser, Debug)]
#[command(name = "clockshift", version, about = "Field-insensitive clock transitions and rank-2 tensor shifts of trapped ions")]
pub struct Cli {
    /// TOML file with default values for any flag (keys are the long flag names).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Transition frequency and C₂ of one label pair over a field grid.
    Trace(TraceArgs),
    /// Every field-insensitive point of every E2-allowed pair.
    Scan(ScanArgs),
    /// C₂ at a given field, or at every insensitive point of a pair.
    C2(C2Args),
    /// Quadrupole or tensor-polarizability shift at a field.
    Shift(ShiftArgs),
    /// Crystal-size broadening and the Ramsey-time bound.
    Broadening(BroadeningArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Table,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftMode {
    Quadrupole,
    TensorDc,
    TensorRf,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Ion-definition file.
    #[arg(long)]
    pub species: Option<PathBuf>,
    /// Transition index, `lower:upper` level labels, or upper label.
    #[arg(long)]
    pub transition: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Pair {
    /// Lower clock state as `F,m_F`, e.g. `4,-3` or `7/2,-1/2`.
    #[arg(long, allow_hyphen_values = true)]
    pub lower: Option<String>,
    /// Upper clock state as `F,m_F`.
    #[arg(long, allow_hyphen_values = true)]
    pub upper: Option<String>,
    /// Model the lower state with its linear Zeeman term only.
    #[arg(long)]
    pub freeze_lower_linear: bool,
}

#[derive(Args, Debug, Clone)]
pub struct TraceArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub pair: Pair,
    /// Largest field, mT.
    #[arg(long)]
    pub bmax: Option<f64>,
    /// Number of grid points from 0 to bmax.
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: Common,
    /// Largest field, mT.
    #[arg(long)]
    pub bmax: Option<f64>,
    /// Keep only points with |C₂| below this.
    #[arg(long)]
    pub max_c2: Option<f64>,
    /// Bracketing grid points over (0, bmax].
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub freeze_lower_linear: bool,
}

#[derive(Args, Debug, Clone)]
pub struct C2Args {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub pair: Pair,
    /// Field, mT. Without it every insensitive point up to --bmax is reported.
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub bmax: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct CoefficientSource {
    #[command(flatten)]
    pub pair: Pair,
    /// Field, mT, at which C₂ is evaluated.
    #[arg(long)]
    pub b: Option<f64>,
    /// Use this transition C₂ directly instead of computing it.
    #[arg(long, allow_hyphen_values = true)]
    pub c2: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct ShiftArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub source: CoefficientSource,
    #[arg(long, value_enum)]
    pub mode: Option<ShiftMode>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_deg: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta_deg: Option<f64>,
    /// Gradient asymmetry ε.
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon: Option<f64>,
    /// Product A·Θ of gradient and quadrupole moment, Hz.
    #[arg(long, allow_hyphen_values = true)]
    pub gradient: Option<f64>,
    /// Gradient A in V/m², combined with each level's theta_au.
    #[arg(long, allow_hyphen_values = true)]
    pub gradient_vm2: Option<f64>,
    /// ⟨E_x²⟩, V²/m².
    #[arg(long)]
    pub ex2: Option<f64>,
    /// ⟨E_y²⟩, V²/m².
    #[arg(long)]
    pub ey2: Option<f64>,
    /// ⟨E_z²⟩, V²/m² (tensor-dc only).
    #[arg(long)]
    pub ez2: Option<f64>,
    /// ⟨E_xE_y⟩, V²/m².
    #[arg(long, allow_hyphen_values = true)]
    pub exey: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct BroadeningArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub source: CoefficientSource,
    /// Axial trap frequency ω_z, rad/s.
    #[arg(long)]
    pub omega_z: Option<f64>,
    #[arg(long)]
    pub n_ions: Option<u64>,
}

/// Everything a command may read, after merging flags and config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    pub species: Option<PathBuf>,
    pub transition: Option<String>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub lower: Option<String>,
    pub upper: Option<String>,
    pub freeze_lower_linear: Option<bool>,
    pub bmax: Option<f64>,
    pub b: Option<f64>,
    pub points: Option<usize>,
    pub max_c2: Option<f64>,
    pub c2: Option<f64>,
    pub mode: Option<ShiftMode>,
    pub alpha_deg: Option<f64>,
    pub beta_deg: Option<f64>,
    pub epsilon: Option<f64>,
    pub gradient: Option<f64>,
    pub gradient_vm2: Option<f64>,
    pub ex2: Option<f64>,
    pub ey2: Option<f64>,
    pub ez2: Option<f64>,
    pub exey: Option<f64>,
    pub omega_z: Option<f64>,
    pub n_ions: Option<u64>,
}

macro_rules! overlay {
    ($self:ident, $base:ident; $($field:ident),* $(,)?) => {
        Settings { $($field: $self.$field.or($base.$field),)* }
    };
}

impl Settings {
    /// Values in `self` win; gaps are filled from `base`.
    pub fn or(self, base: Settings) -> Settings {
        overlay!(self, base;
            species, transition, format, out, lower, upper, freeze_lower_linear, bmax, b, points,
            max_c2, c2, mode, alpha_deg, beta_deg, epsilon, gradient, gradient_vm2, ex2, ey2, ez2,
            exey, omega_z, n_ions)
    }

    pub fn load(path: &Path) -> Result<Settings, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::input(format!("config {}: {}", path.display(), e.message())))
    }

    fn with_common(mut self, c: Common) -> Self {
        self.species = c.species;
        self.transition = c.transition;
        self.format = c.format;
        self.out = c.out;
        self
    }

    fn with_pair(mut self, p: Pair) -> Self {
        self.lower = p.lower;
        self.upper = p.upper;
        self.freeze_lower_linear = p.freeze_lower_linear.then_some(true);
        self
    }

    fn with_source(mut self, s: CoefficientSource) -> Self {
        self = self.with_pair(s.pair);
        self.b = s.b;
        self.c2 = s.c2;
        self
    }

    /// Flags of one invocation as a partial settings record.
    pub fn from_command(command: &Command) -> Settings {
        let empty = Settings::default();
        match command.clone() {
            Command::Trace(a) => {
                let mut s = empty.with_common(a.common).with_pair(a.pair);
                s.bmax = a.bmax;
                s.points = a.points;
                s
            }
            Command::Scan(a) => {
                let mut s = empty.with_common(a.common);
                s.bmax = a.bmax;
                s.max_c2 = a.max_c2;
                s.points = a.points;
                s.freeze_lower_linear = a.freeze_lower_linear.then_some(true);
                s
            }
            Command::C2(a) => {
                let mut s = empty.with_common(a.common).with_pair(a.pair);
                s.b = a.b;
                s.bmax = a.bmax;
                s
            }
            Command::Shift(a) => {
                let mut s = empty.with_common(a.common).with_source(a.source);
                s.mode = a.mode;
                s.alpha_deg = a.alpha_deg;
                s.beta_deg = a.beta_deg;
                s.epsilon = a.epsilon;
                s.gradient = a.gradient;
                s.gradient_vm2 = a.gradient_vm2;
                s.ex2 = a.ex2;
                s.ey2 = a.ey2;
                s.ez2 = a.ez2;
                s.exey = a.exey;
                s
            }
            Command::Broadening(a) => {
                let mut s = empty.with_common(a.common).with_source(a.source);
                s.omega_z = a.omega_z;
                s.n_ions = a.n_ions;
                s
            }
        }
    }

    pub fn require<T: Clone>(value: &Option<T>, flag: &str) -> Result<T, CliError> {
        value.clone().ok_or_else(|| CliError::input(format!("--{flag} is required")))
    }
}
