use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use stepopt::{MarketParams, OptionKind, PathConfig, PricingConfig, QuadConfig, SpectrumChoice, StepOptionSpec};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVar {
    Spot,
    Strike,
    V0,
}

impl SweepVar {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepVar::Spot => "spot",
            SweepVar::Strike => "strike",
            SweepVar::V0 => "v0",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVar,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.points < 2 {
            return Err(CliError::Config(format!("sweep needs at least 2 points, got {}", self.points)));
        }
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(CliError::Config(format!("sweep range needs lo < hi, got [{}, {}]", self.lo, self.hi)));
        }
        Ok(())
    }

    /// Evenly spaced grid with both endpoints exact.
    pub fn grid(&self) -> Vec<f64> {
        let step = (self.hi - self.lo) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| if i + 1 == self.points { self.hi } else { self.lo + i as f64 * step })
            .collect()
    }
}

/// Figure reproductions with caption parameters baked in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

/// Everything a command needs; loadable from JSON, overridable by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub kind: OptionKind,
    pub spot: f64,
    pub strike: f64,
    pub rate: f64,
    pub vol: f64,
    pub tau: f64,
    /// Upper barrier `B`/`b` as a log-price.
    pub upper_barrier: f64,
    /// Lower barrier `a` as a log-price.
    pub lower_barrier: f64,
    pub v0: f64,
    /// Knock-out rates plotted as separate series in sweeps.
    pub v0_series: Vec<f64>,
    pub sweep: Option<SweepSpec>,
    pub preset: Option<Preset>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub quad: QuadConfig,
    pub spectrum: SpectrumChoice,
    pub mc: PathConfig,
    /// Attach a Monte Carlo estimate to `price` output.
    pub with_mc: bool,
    /// Reduced path counts for `validate`.
    pub quick: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            kind: OptionKind::Pso,
            spot: 110.0,
            strike: 100.0,
            rate: 0.05,
            vol: 0.3,
            tau: 1.0,
            upper_barrier: 4.867,
            lower_barrier: 4.5,
            v0: 55.0,
            v0_series: vec![13.0, 26.0, 55.0],
            sweep: None,
            preset: None,
            format: Format::Csv,
            out: None,
            quad: QuadConfig::default(),
            spectrum: SpectrumChoice::default(),
            mc: PathConfig::default(),
            with_mc: false,
            quick: false,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config file: {e}")))
    }

    pub fn market(&self) -> Result<MarketParams, CliError> {
        Ok(MarketParams::new(self.rate, self.vol)?)
    }

    pub fn pricing(&self) -> PricingConfig {
        PricingConfig {
            quad: self.quad,
            spectrum: self.spectrum,
        }
    }

    /// Contract of `kind` with this config's strike, expiry, barriers and `v0`.
    pub fn spec_for(&self, kind: OptionKind, strike: f64, v0: f64) -> StepOptionSpec {
        let (a, b, t) = (self.lower_barrier, self.upper_barrier, self.tau);
        match kind {
            OptionKind::Pso => StepOptionSpec::pso(strike, t, b, v0),
            OptionKind::Pdbs => StepOptionSpec::pdbs(strike, t, a, b, v0),
            OptionKind::Uosb => StepOptionSpec::uosb(strike, t, b),
            OptionKind::Sdb => StepOptionSpec::sdb(strike, t, a, b),
            OptionKind::Vanilla => StepOptionSpec::vanilla(strike, t),
        }
    }

    pub fn spec(&self) -> StepOptionSpec {
        self.spec_for(self.kind, self.strike, self.v0)
    }

    /// Checks everything that can be checked before any pricing runs.
    pub fn validate(&self) -> Result<(), CliError> {
        self.market()?;
        self.quad.validate()?;
        if !(self.spot.is_finite() && self.spot > 0.0) {
            return Err(CliError::Config(format!("spot must be finite and > 0, got {}", self.spot)));
        }
        if let Some(s) = &self.sweep {
            s.validate()?;
        }
        if self.v0_series.is_empty() {
            return Err(CliError::Config("v0_series must not be empty".into()));
        }
        Ok(())
    }
}
