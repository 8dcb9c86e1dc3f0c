//! Reference pricers: Black–Scholes (closed form and Gaussian kernel), the
//! up-and-out call through its Dirichlet momentum kernel, and the double
//! knock-out call through the infinite-well eigenfunction series.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{PricingError, Result};
use crate::market::{model_coefficients, normal_cdf, MarketParams, OptionKind, StepOptionSpec};
use crate::payoff::PayoffWeight;
use crate::quadrature::{integrate, integrate_pieces, neumaier_sum, QuadConfig};

/// Error bookkeeping for a kernel-based price.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KernelDiagnostics {
    pub quadrature_error: f64,
    pub truncation_bound: f64,
    pub terms_used: usize,
}

/// Gaussian damping beyond which the momentum integral is cut: `e^{-50}`.
const MOMENTUM_CUT_EXPONENT: f64 = 50.0;

/// Series terms are dropped once `e^{-τσ²pₙ²/2}` falls below this.
pub const SERIES_CUTOFF: f64 = 1e-14;

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if !v.is_finite() || v <= 0.0 {
        return Err(PricingError::param(name, format!("must be finite and > 0, got {v}")));
    }
    Ok(())
}

/// Black–Scholes call `S·N(d₊) − e^{-rτ}K·N(d₋)`.
pub fn bs_call_closed(mp: &MarketParams, s: f64, k: f64, tau: f64) -> Result<f64> {
    mp.validate()?;
    check_positive("spot", s)?;
    check_positive("strike", k)?;
    check_positive("tau", tau)?;
    let sd = mp.vol * tau.sqrt();
    let d_plus = ((s / k).ln() + (mp.rate + 0.5 * mp.variance()) * tau) / sd;
    let d_minus = d_plus - sd;
    Ok(s * normal_cdf(d_plus) - (-mp.rate * tau).exp() * k * normal_cdf(d_minus))
}

/// Closed-form Black–Scholes delta `N(d₊)`.
pub fn bs_call_delta(mp: &MarketParams, s: f64, k: f64, tau: f64) -> Result<f64> {
    mp.validate()?;
    check_positive("spot", s)?;
    check_positive("strike", k)?;
    check_positive("tau", tau)?;
    let sd = mp.vol * tau.sqrt();
    Ok(normal_cdf(((s / k).ln() + (mp.rate + 0.5 * mp.variance()) * tau) / sd))
}

/// Discounted transition density from `x` to `x_end`:
/// `e^{-rτ}·𝒩(x_end; x + τ(r − σ²/2), τσ²)`.
pub fn bs_kernel(mp: &MarketParams, x: f64, x_end: f64, tau: f64) -> f64 {
    let var = tau * mp.variance();
    let mean = x + tau * (mp.rate - 0.5 * mp.variance());
    let d = x_end - mean;
    (-mp.rate * tau).exp() * (-0.5 * d * d / var).exp() / (2.0 * PI * var).sqrt()
}

/// Vanilla call by integrating the payoff against [`bs_kernel`].
pub fn bs_call_kernel(mp: &MarketParams, x: f64, k: f64, tau: f64, cfg: &QuadConfig) -> Result<(f64, KernelDiagnostics)> {
    mp.validate()?;
    check_positive("strike", k)?;
    check_positive("tau", tau)?;
    let sd = mp.vol * tau.sqrt();
    let mean = x + tau * (mp.rate - 0.5 * mp.variance());
    let lo = k.ln();
    // The payoff grows like e^{x'} so the effective Gaussian is centred at mean + sd².
    let hi = (mean + sd * sd).max(lo) + 12.0 * sd;
    if lo >= hi {
        return Ok((0.0, KernelDiagnostics::default()));
    }
    let r = integrate(|xe| bs_kernel(mp, x, xe, tau) * (xe.exp() - k), lo, hi, cfg)?;
    let z = (hi - mean - sd * sd) / sd;
    let tail = (x.exp()) * normal_cdf(-z);
    Ok((
        r.value,
        KernelDiagnostics {
            quadrature_error: r.error,
            truncation_bound: tail,
            terms_used: 0,
        },
    ))
}

fn check_kind(spec: &StepOptionSpec, kind: OptionKind) -> Result<()> {
    if spec.kind != kind {
        return Err(PricingError::Contract(format!("expected a {kind} contract, got {}", spec.kind)));
    }
    Ok(())
}

/// Up-and-out call from the Dirichlet scattering kernel
/// `2e^{-τγ}e^{α(x-x')}∫₀^∞ dp/2π e^{-τσ²p²/2}[cos p(x-x') − cos p(x+x'-2B)]`.
///
/// The `x'` integral over `[ln K, B]` is taken in closed form; the momentum
/// integral is cut at `p = 10/(σ√τ)` where the Gaussian weight is `e^{-50}`.
pub fn uosb_price(mp: &MarketParams, x: f64, spec: &StepOptionSpec, cfg: &QuadConfig) -> Result<(f64, KernelDiagnostics)> {
    check_kind(spec, OptionKind::Uosb)?;
    let coeffs = model_coefficients(mp)?;
    spec.validate(&coeffs)?;
    let barrier = spec.upper;
    let lk = spec.log_strike();
    if x >= barrier || lk >= barrier {
        return Ok((0.0, KernelDiagnostics::default()));
    }
    let s2t = mp.variance() * spec.tau;
    let p_hi = (2.0 * MOMENTUM_CUT_EXPONENT / s2t).sqrt();
    let pay = PayoffWeight::new(coeffs.alpha, spec.strike, barrier);
    let shift = x - barrier;
    let pre = (-spec.tau * coeffs.gamma + coeffs.alpha * x).exp();
    let integrand = |p: f64| {
        let direct = pay.integral(0.0, -p, p * shift, lk, barrier);
        let image = pay.integral(0.0, p, p * shift, lk, barrier);
        (-0.5 * s2t * p * p).exp() * (direct - image) / PI
    };
    let r = integrate(integrand, 0.0, p_hi, cfg)?;
    let jabs = pay.integral(0.0, 0.0, 0.0, lk, barrier).abs();
    let tail = pre * 2.0 * jabs * (-MOMENTUM_CUT_EXPONENT).exp() / (PI * s2t * p_hi);
    Ok((
        (pre * r.value).max(0.0),
        KernelDiagnostics {
            quadrature_error: pre * r.error,
            truncation_bound: tail,
            terms_used: 0,
        },
    ))
}

/// Number of infinite-well terms kept at the default cutoff.
pub fn sdb_default_terms(mp: &MarketParams, spec: &StepOptionSpec) -> usize {
    let l = spec.upper - spec.lower;
    let s2t = mp.variance() * spec.tau;
    // e^{-τσ²(nπ/L)²/2} < cutoff  ⇔  n > L/π·√(2 ln(1/cutoff)/(τσ²))
    let n = l / PI * (2.0 * (1.0 / SERIES_CUTOFF).ln() / s2t).sqrt();
    (n.floor() as usize + 1).max(1)
}

/// Double knock-out call from the infinite-well eigenfunction series,
/// truncated once the mode weight drops below [`SERIES_CUTOFF`].
pub fn sdb_price(mp: &MarketParams, x: f64, spec: &StepOptionSpec, cfg: &QuadConfig) -> Result<(f64, KernelDiagnostics)> {
    sdb_price_terms(mp, x, spec, cfg, sdb_default_terms(mp, spec))
}

/// [`sdb_price`] with an explicit number of series terms.
pub fn sdb_price_terms(
    mp: &MarketParams,
    x: f64,
    spec: &StepOptionSpec,
    cfg: &QuadConfig,
    terms: usize,
) -> Result<(f64, KernelDiagnostics)> {
    check_kind(spec, OptionKind::Sdb)?;
    let coeffs = model_coefficients(mp)?;
    spec.validate(&coeffs)?;
    let (a, b) = (spec.lower, spec.upper);
    // Below `a` the kernel vanishes, so a strike under the corridor only clips the range.
    let lo = spec.log_strike().max(a);
    if x <= a || x >= b || lo >= b {
        return Ok((0.0, KernelDiagnostics::default()));
    }
    let l = b - a;
    let s2t = mp.variance() * spec.tau;
    let mut parts = Vec::with_capacity(terms);
    let mut qerr = 0.0;
    for n in 1..=terms {
        let p = n as f64 * PI / l;
        let weight = (-0.5 * s2t * p * p).exp();
        let r = integrate(
            |xe| (coeffs.alpha * (x - xe)).exp() * (p * (xe - a)).sin() * (xe.exp() - spec.strike),
            lo,
            b,
            cfg,
        )?;
        let scale = 2.0 / l * (-spec.tau * coeffs.gamma).exp() * weight * (p * (x - a)).sin();
        parts.push(scale * r.value);
        qerr += (scale * r.error).abs();
    }
    let next = (terms + 1) as f64 * PI / l;
    let bound_payoff = (b.exp() - spec.strike).max(0.0) * (coeffs.alpha * (x - lo)).exp().max((coeffs.alpha * (x - b)).exp()) * l;
    let tail = 2.0 / l * (-0.5 * s2t * next * next).exp() / (1.0 - (-s2t * PI * PI / (l * l)).exp()) * bound_payoff;
    Ok((
        neumaier_sum(parts).max(0.0),
        KernelDiagnostics {
            quadrature_error: qerr,
            truncation_bound: tail,
            terms_used: terms,
        },
    ))
}

/// Double knock-out call by brute-force quadrature of the truncated kernel
/// over `x'`; used to cross-check the series ordering.
pub fn sdb_kernel(mp: &MarketParams, x: f64, x_end: f64, spec: &StepOptionSpec, terms: usize) -> Result<f64> {
    let coeffs = model_coefficients(mp)?;
    let (a, b) = (spec.lower, spec.upper);
    if x <= a || x >= b || x_end <= a || x_end >= b {
        return Ok(0.0);
    }
    let l = b - a;
    let s2t = mp.variance() * spec.tau;
    let sum = neumaier_sum((1..=terms).map(|n| {
        let p = n as f64 * PI / l;
        (-0.5 * s2t * p * p).exp() * (p * (x - a)).sin() * (p * (x_end - a)).sin()
    }));
    Ok(2.0 / l * (-spec.tau * coeffs.gamma + coeffs.alpha * (x - x_end)).exp() * sum)
}

/// Integral of the vanilla payoff against [`bs_kernel`] with breakpoints,
/// exposed for property checks that need the kernel route on a custom range.
pub fn kernel_payoff_integral(mp: &MarketParams, x: f64, k: f64, tau: f64, points: &[f64], cfg: &QuadConfig) -> Result<f64> {
    Ok(integrate_pieces(|xe| bs_kernel(mp, x, xe, tau) * (xe.exp() - k).max(0.0), points, cfg)?.value)
}
