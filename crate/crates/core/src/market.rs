//! Market parameters, contract descriptions and the shared scalar helpers
//! (standard normal CDF, daily knock-out factor).
//!
//! Every pricer in this crate works in log-price coordinates `x = ln S`. The
//! Black-Scholes generator is made Hermitian by the similarity transform
//! `H = e^{αx} (-σ²/2 ∂² + γ) e^{-αx}`; [`ModelCoefficients`] holds the
//! resulting drift exponent `α` and energy shift `γ`.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{PricingError, Result};

/// Trading days per year used by the daily knock-out factor.
pub const TRADING_DAYS_PER_YEAR: f64 = 250.0;

/// Risk-free rate and volatility, both per year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    pub rate: f64,
    pub vol: f64,
}

impl MarketParams {
    pub fn new(rate: f64, vol: f64) -> Result<Self> {
        let mp = MarketParams { rate, vol };
        mp.validate()?;
        Ok(mp)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.vol.is_finite() || self.vol <= 0.0 {
            return Err(PricingError::param("vol", format!("must be finite and > 0, got {}", self.vol)));
        }
        if !self.rate.is_finite() || self.rate < 0.0 {
            return Err(PricingError::param("rate", format!("must be finite and >= 0, got {}", self.rate)));
        }
        Ok(())
    }

    pub fn variance(&self) -> f64 {
        self.vol * self.vol
    }
}

/// Drift-removal exponent and energy shift of the Hermitian generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelCoefficients {
    pub alpha: f64,
    pub gamma: f64,
}

/// `α = (σ²/2 − r)/σ²`, `γ = (σ²/2 + r)²/(2σ²)`.
pub fn model_coefficients(mp: &MarketParams) -> Result<ModelCoefficients> {
    mp.validate()?;
    let s2 = mp.variance();
    let half = 0.5 * s2;
    Ok(ModelCoefficients {
        alpha: (half - mp.rate) / s2,
        gamma: (half + mp.rate).powi(2) / (2.0 * s2),
    })
}

/// Standard normal cumulative distribution function.
///
/// Evaluated through `erfc`, which keeps full relative precision in the
/// lower tail (`N(-8) ≈ 6.2e-16` is returned accurately, not rounded to 0).
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Daily knock-out factor `e^{-V₀/250}`.
pub fn daily_knockout_factor(v0: f64) -> Result<f64> {
    if !v0.is_finite() || v0 < 0.0 {
        return Err(PricingError::param("v0", format!("must be finite and >= 0, got {v0}")));
    }
    Ok((-v0 / TRADING_DAYS_PER_YEAR).exp())
}

/// The contract families the engine prices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptionKind {
    /// Up-and-out proportional step call.
    Pso,
    /// Proportional double-barrier step call.
    Pdbs,
    /// Up-and-out standard barrier call.
    Uosb,
    /// Standard double-barrier (double knock-out) call.
    Sdb,
    /// European call.
    Vanilla,
}

impl OptionKind {
    pub const ALL: [OptionKind; 5] = [
        OptionKind::Pso,
        OptionKind::Pdbs,
        OptionKind::Uosb,
        OptionKind::Sdb,
        OptionKind::Vanilla,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            OptionKind::Pso => "pso",
            OptionKind::Pdbs => "pdbs",
            OptionKind::Uosb => "uosb",
            OptionKind::Sdb => "sdb",
            OptionKind::Vanilla => "vanilla",
        }
    }

    /// Step kinds carry a finite knock-out rate.
    pub fn is_step(&self) -> bool {
        matches!(self, OptionKind::Pso | OptionKind::Pdbs)
    }

    pub fn is_double_barrier(&self) -> bool {
        matches!(self, OptionKind::Pdbs | OptionKind::Sdb)
    }

    pub fn has_upper_barrier(&self) -> bool {
        !matches!(self, OptionKind::Vanilla)
    }
}

impl fmt::Display for OptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OptionKind {
    type Err = PricingError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pso" | "pso_up_out" => Ok(OptionKind::Pso),
            "pdbs" => Ok(OptionKind::Pdbs),
            "uosb" => Ok(OptionKind::Uosb),
            "sdb" => Ok(OptionKind::Sdb),
            "vanilla" => Ok(OptionKind::Vanilla),
            other => Err(PricingError::param("kind", format!("unknown option kind `{other}`"))),
        }
    }
}

/// A call contract. Barriers are log-prices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepOptionSpec {
    pub kind: OptionKind,
    pub strike: f64,
    pub tau: f64,
    /// `B` for the single-barrier kinds, `b` for the double-barrier kinds.
    pub upper: f64,
    /// `a`; only meaningful for the double-barrier kinds.
    pub lower: f64,
    /// Knock-out rate per year; only meaningful for the step kinds.
    pub v0: f64,
}

impl StepOptionSpec {
    pub fn vanilla(strike: f64, tau: f64) -> Self {
        StepOptionSpec {
            kind: OptionKind::Vanilla,
            strike,
            tau,
            upper: f64::INFINITY,
            lower: f64::NEG_INFINITY,
            v0: 0.0,
        }
    }

    pub fn pso(strike: f64, tau: f64, barrier: f64, v0: f64) -> Self {
        StepOptionSpec {
            kind: OptionKind::Pso,
            strike,
            tau,
            upper: barrier,
            lower: f64::NEG_INFINITY,
            v0,
        }
    }

    pub fn uosb(strike: f64, tau: f64, barrier: f64) -> Self {
        StepOptionSpec {
            kind: OptionKind::Uosb,
            strike,
            tau,
            upper: barrier,
            lower: f64::NEG_INFINITY,
            v0: f64::INFINITY,
        }
    }

    pub fn pdbs(strike: f64, tau: f64, lower: f64, upper: f64, v0: f64) -> Self {
        StepOptionSpec {
            kind: OptionKind::Pdbs,
            strike,
            tau,
            upper,
            lower,
            v0,
        }
    }

    pub fn sdb(strike: f64, tau: f64, lower: f64, upper: f64) -> Self {
        StepOptionSpec {
            kind: OptionKind::Sdb,
            strike,
            tau,
            upper,
            lower,
            v0: f64::INFINITY,
        }
    }

    /// Same contract with a different kind; barriers and rate are kept.
    pub fn with_kind(&self, kind: OptionKind) -> Self {
        StepOptionSpec { kind, ..*self }
    }

    pub fn with_v0(&self, v0: f64) -> Self {
        StepOptionSpec { v0, ..*self }
    }

    pub fn with_strike(&self, strike: f64) -> Self {
        StepOptionSpec { strike, ..*self }
    }

    pub fn log_strike(&self) -> f64 {
        self.strike.ln()
    }

    /// Checks the contract against the market; `gamma` guards the step kinds.
    pub fn validate(&self, coeffs: &ModelCoefficients) -> Result<()> {
        if !self.strike.is_finite() || self.strike <= 0.0 {
            return Err(PricingError::param("strike", format!("must be finite and > 0, got {}", self.strike)));
        }
        if !self.tau.is_finite() || self.tau <= 0.0 {
            return Err(PricingError::param("tau", format!("must be finite and > 0, got {}", self.tau)));
        }
        if self.kind.has_upper_barrier() && !self.upper.is_finite() {
            return Err(PricingError::param("upper_barrier", "must be finite"));
        }
        if self.kind.is_double_barrier() {
            if !self.lower.is_finite() {
                return Err(PricingError::param("lower_barrier", "must be finite"));
            }
            if self.lower >= self.upper {
                return Err(PricingError::param(
                    "lower_barrier",
                    format!("lower barrier {} must be below upper barrier {}", self.lower, self.upper),
                ));
            }
        }
        if self.kind.is_step() {
            if !self.v0.is_finite() || self.v0 < 0.0 {
                return Err(PricingError::param("v0", format!("must be finite and >= 0, got {}", self.v0)));
            }
            if self.v0 <= coeffs.gamma {
                return Err(PricingError::param(
                    "v0",
                    format!("knock-out rate {} must exceed gamma = {:.6}", self.v0, coeffs.gamma),
                ));
            }
        }
        Ok(())
    }
}

/// Log of the underlying price.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LogSpot(pub f64);

impl LogSpot {
    pub fn from_price(s: f64) -> Result<Self> {
        if !s.is_finite() || s <= 0.0 {
            return Err(PricingError::param("spot", format!("must be finite and > 0, got {s}")));
        }
        Ok(LogSpot(s.ln()))
    }

    pub fn x(&self) -> f64 {
        self.0
    }

    pub fn price(&self) -> f64 {
        self.0.exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn coefficients_reference_values() {
        let c = model_coefficients(&MarketParams::new(0.05, 0.3).unwrap()).unwrap();
        assert!(close(c.alpha, -0.05556, 5e-6), "{}", c.alpha);
        assert!(close(c.gamma, 0.050139, 5e-7), "{}", c.gamma);

        let c = model_coefficients(&MarketParams::new(0.045, 0.3).unwrap()).unwrap();
        assert!(c.alpha.abs() < 1e-15);

        let c = model_coefficients(&MarketParams::new(0.0, 1.0).unwrap()).unwrap();
        assert_eq!(c.alpha, 0.5);
        assert_eq!(c.gamma, 0.125);
    }

    #[test]
    fn rejects_bad_market() {
        assert!(MarketParams::new(0.05, 0.0).is_err());
        assert!(MarketParams::new(-0.01, 0.2).is_err());
        assert!(MarketParams::new(0.05, f64::NAN).is_err());
        let raw = MarketParams { rate: 0.05, vol: -1.0 };
        assert!(model_coefficients(&raw).is_err());
    }

    #[test]
    fn normal_cdf_reference_points() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!(close(normal_cdf(1.959963984540054), 0.975, 1e-13));
        assert!(normal_cdf(-8.0) < 1e-14);
        assert!(normal_cdf(-8.0) > 0.0);
        // Tabulated value of the lower tail at -8: 6.22096057427178e-16.
        assert!(close(normal_cdf(-8.0) / 6.22096057427178e-16, 1.0, 1e-10));
    }

    #[test]
    fn daily_factor() {
        assert!(close(daily_knockout_factor(55.0).unwrap(), 0.8025, 5e-5));
        assert_eq!(daily_knockout_factor(0.0).unwrap(), 1.0);
        assert!(close(daily_knockout_factor(26.0).unwrap(), 0.9012, 5e-5));
        assert!(daily_knockout_factor(-1.0).is_err());
    }

    #[test]
    fn step_kinds_need_rate_above_gamma() {
        let mp = MarketParams::new(0.05, 0.3).unwrap();
        let c = model_coefficients(&mp).unwrap();
        let spec = StepOptionSpec::pso(100.0, 1.0, 130f64.ln(), 0.01);
        assert!(matches!(spec.validate(&c), Err(PricingError::Parameter { name: "v0", .. })));
        assert!(spec.with_v0(55.0).validate(&c).is_ok());
        let bad = StepOptionSpec::pdbs(100.0, 1.0, 4.9, 4.5, 55.0);
        assert!(bad.validate(&c).is_err());
    }

    #[test]
    fn kind_round_trip() {
        for k in OptionKind::ALL {
            assert_eq!(k.as_str().parse::<OptionKind>().unwrap(), k);
        }
        assert!("knock_in".parse::<OptionKind>().is_err());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn cdf_symmetry(x in -40.0f64..40.0) {
                prop_assert!((normal_cdf(x) + normal_cdf(-x) - 1.0).abs() < 1e-12);
            }

            #[test]
            fn gamma_positive(r in 0.0f64..0.5, vol in 0.01f64..2.0) {
                let c = model_coefficients(&MarketParams::new(r, vol).unwrap()).unwrap();
                prop_assert!(c.gamma > 0.0);
            }

            #[test]
            fn daily_factor_decreasing(v in 0.0f64..1000.0, dv in 1e-6f64..100.0) {
                prop_assert!(daily_knockout_factor(v + dv).unwrap() < daily_knockout_factor(v).unwrap());
            }
        }
    }
}
