use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use lwkit::harness::{BatteryConfig, GridParams};
use lwkit::landau::LwRoute;
use lwkit::transforms::{ScalingParams, StftConvention, WavepacketVariant};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Bin,
    Json,
}

/// Everything a subcommand may read. Loaded from `--config`, then overridden by flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub hbar: f64,
    pub config_grid: GridParams,
    pub phase_grid: GridParams,
    pub route_grid: GridParams,
    pub gamma: f64,
    pub mu: f64,
    pub seed: u64,
    pub tolerance: Option<f64>,
    pub cases: Vec<String>,
    pub out_dir: PathBuf,
    pub format: Format,
    pub stft_convention: StftConvention,
    pub wavepacket_variant: WavepacketVariant,
    pub route: LwRoute,
    /// Fixture names: `hermite:K` or `coherent:X,Y`.
    pub psi: String,
    pub phi: String,
    /// Symbol name, see `symbols::parse_symbol`.
    pub symbol: String,
    pub levels: usize,
    pub j_max: usize,
    pub k_max: usize,
    pub time: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let b = BatteryConfig::default();
        RunConfig {
            hbar: b.hbar,
            config_grid: b.config_grid,
            phase_grid: b.phase_grid,
            route_grid: b.route_grid,
            gamma: b.gamma,
            mu: b.mu,
            seed: b.seed,
            tolerance: None,
            cases: Vec::new(),
            out_dir: PathBuf::from("lwkit-out"),
            format: Format::Bin,
            stft_convention: StftConvention::Tf,
            wavepacket_variant: WavepacketVariant::Explicit,
            route: LwRoute::XyRule,
            psi: "hermite:0".into(),
            phi: "hermite:0".into(),
            symbol: "harmonic".into(),
            levels: 8,
            j_max: 4,
            k_max: 4,
            time: 1.0,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", p.display())))
            }
        }
    }

    pub fn params(&self) -> Result<ScalingParams, CliError> {
        Ok(ScalingParams::new(self.gamma, self.mu)?)
    }

    pub fn battery(&self) -> BatteryConfig {
        BatteryConfig {
            hbar: self.hbar,
            config_grid: self.config_grid,
            phase_grid: self.phase_grid,
            route_grid: self.route_grid,
            gamma: self.gamma,
            mu: self.mu,
            seed: self.seed,
            tolerance: self.tolerance,
            cases: self.cases.clone(),
        }
    }

    /// Checks the preconditions every subcommand shares.
    pub fn validate(&self) -> Result<(), CliError> {
        self.battery().validate()?;
        if !self.time.is_finite() {
            return Err(CliError::Usage(format!("time must be finite, got {}", self.time)));
        }
        if self.levels == 0 {
            return Err(CliError::Usage("levels must be positive".into()));
        }
        Ok(())
    }
}

fn parse_grid(s: &str) -> Result<GridParams, String> {
    let (n, l) = s.split_once(',').ok_or_else(|| format!("expected N,L, got '{s}'"))?;
    let points = n.trim().parse().map_err(|_| format!("bad node count '{n}'"))?;
    let half_extent = l.trim().parse().map_err(|_| format!("bad half-extent '{l}'"))?;
    Ok(GridParams { half_extent, points })
}

/// Flags shared by every subcommand; any flag given replaces the config value.
#[derive(Args, Debug, Clone, Default)]
pub struct Overrides {
    /// JSON run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub hbar: Option<f64>,
    /// Configuration grid as N,L (N nodes on [-L, L))
    #[arg(long, global = true, value_parser = parse_grid)]
    pub grid: Option<GridParams>,
    /// Phase-space grid as N,L
    #[arg(long, global = true, value_parser = parse_grid)]
    pub phase_grid: Option<GridParams>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Case id or prefix (repeatable)
    #[arg(long = "case", global = true)]
    pub cases: Vec<String>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub psi: Option<String>,
    #[arg(long, global = true)]
    pub phi: Option<String>,
    #[arg(long, global = true)]
    pub symbol: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub time: Option<f64>,
    #[arg(long, global = true)]
    pub levels: Option<usize>,
}

impl Overrides {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = RunConfig::load(self.config.as_deref())?;
        if let Some(v) = &self.out {
            c.out_dir = v.clone();
        }
        if let Some(v) = self.hbar {
            c.hbar = v;
        }
        if let Some(v) = self.grid {
            c.config_grid = v;
        }
        if let Some(v) = self.phase_grid {
            c.phase_grid = v;
        }
        if let Some(v) = self.gamma {
            c.gamma = v;
        }
        if let Some(v) = self.mu {
            c.mu = v;
        }
        if let Some(v) = self.tol {
            c.tolerance = Some(v);
        }
        if !self.cases.is_empty() {
            c.cases = self.cases.clone();
        }
        if let Some(v) = self.format {
            c.format = v;
        }
        if let Some(v) = &self.psi {
            c.psi = v.clone();
        }
        if let Some(v) = &self.phi {
            c.phi = v.clone();
        }
        if let Some(v) = &self.symbol {
            c.symbol = v.clone();
        }
        if let Some(v) = self.time {
            c.time = v;
        }
        if let Some(v) = self.levels {
            c.levels = v;
        }
        c.validate()?;
        Ok(c)
    }
}
