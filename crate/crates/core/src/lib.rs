//! Pricing engine for proportional step and proportional double-barrier step
//! call options.
//!
//! The step option's knock-out discount `e^{-V₀·τ_out}` turns the pricing
//! problem into a Schrödinger-type propagation in log-price space: a potential
//! step for the single-barrier contract, a finite square well for the
//! double-barrier one. [`step`] evaluates those kernels, [`spectrum`] supplies
//! the well's bound states, [`baseline`] holds the vanilla and hard-barrier
//! reference pricers, and [`mc`] is an independent path-simulation oracle.

pub mod baseline;
pub mod error;
pub mod market;
pub mod mc;
pub mod payoff;
pub mod quadrature;
pub mod spectrum;
pub mod step;

pub use error::{PricingError, Result};
pub use market::{
    daily_knockout_factor, model_coefficients, normal_cdf, normal_pdf, LogSpot, MarketParams, ModelCoefficients,
    OptionKind, StepOptionSpec,
};
pub use quadrature::{integrate, integrate_semi_infinite, QuadConfig, QuadResult};
pub use spectrum::{EigenMode, FormulaRule, Parity, Provenance, Spectrum, SpectrumChoice, SpectrumPartition, WellGeometry};
pub use step::{delta, pdbs_price, price, pso_price, Component, Diagnostics, PricingConfig, PricingResult};
pub use mc::{mc_convergence_report, mc_price, McEstimate, Monitoring, PathConfig};
