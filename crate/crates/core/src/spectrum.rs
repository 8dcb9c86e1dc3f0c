//! Bound states of the symmetric finite square well that models the
//! double-barrier step option.
//!
//! Inside the corridor `(a, b)` the transformed price solves `C'' + k₁²C = 0`,
//! outside it decays as `e^{-k₂|x-c|}` with `k₁² + k₂² = β² = 2V₀/σ²` and
//! `c = (a+b)/2`. Matching value and slope at the walls gives the
//! quantization condition
//!
//! ```text
//! k₁ (b-a)/2 = nπ/2 − arcsin(k₁/β),   n = 1, 2, …
//! ```
//!
//! whose `n`-th root lies strictly inside `((n-1)π/(b-a), nπ/(b-a))`. Odd `n`
//! are even (cosine) states, even `n` odd (sine) states.
//!
//! Besides the exact roots this module carries the two closed-form
//! approximations used by the double-barrier step pricer: a low-energy one,
//! obtained by linearising the arcsine, and a high-energy one, obtained from
//! the expansion of `arcsin(1 − u)` near the top of the well.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{PricingError, Result};
use crate::market::{model_coefficients, MarketParams};

/// Geometry and depth of the well in log-price space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WellGeometry {
    pub a: f64,
    pub b: f64,
    pub v0: f64,
    pub sigma: f64,
    pub gamma: f64,
}

impl WellGeometry {
    pub fn new(mp: &MarketParams, a: f64, b: f64, v0: f64) -> Result<Self> {
        let coeffs = model_coefficients(mp)?;
        let g = WellGeometry {
            a,
            b,
            v0,
            sigma: mp.vol,
            gamma: coeffs.gamma,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.b.is_finite()) || self.a >= self.b {
            return Err(PricingError::param(
                "barriers",
                format!("need finite a < b, got a = {}, b = {}", self.a, self.b),
            ));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(PricingError::param("vol", "must be finite and > 0"));
        }
        if !self.v0.is_finite() || self.v0 <= self.gamma {
            return Err(PricingError::param(
                "v0",
                format!("well depth {} must exceed gamma = {:.6}", self.v0, self.gamma),
            ));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    /// `β = √(2V₀)/σ`, the wavenumber at the rim of the well.
    pub fn beta(&self) -> f64 {
        (2.0 * self.v0).sqrt() / self.sigma
    }

    /// `β² = 2V₀/σ²`.
    pub fn beta_sq(&self) -> f64 {
        2.0 * self.v0 / (self.sigma * self.sigma)
    }

    /// Largest interior wavenumber whose exterior decay still beats the drift:
    /// `√(β² − 2γ/σ²)`.
    pub fn k_ceiling(&self) -> f64 {
        (self.beta_sq() - 2.0 * self.gamma / (self.sigma * self.sigma)).max(0.0).sqrt()
    }
}

/// Symmetry of an eigenfunction about the well center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    /// Cosine inside the well; odd `n`.
    Symmetric,
    /// Sine inside the well; even `n`.
    Antisymmetric,
}

impl Parity {
    pub fn of_level(n: usize) -> Self {
        if n % 2 == 1 {
            Parity::Symmetric
        } else {
            Parity::Antisymmetric
        }
    }
}

/// How a mode's wavenumber was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    LowApprox,
    HighApprox,
}

/// A normalised bound state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenMode {
    pub n: usize,
    pub k1: f64,
    pub k2: f64,
    pub parity: Parity,
    pub provenance: Provenance,
    pub a_in: f64,
    /// Exterior amplitude `A_in·trig(k₁(b-a)/2)·e^{k₂(b-a)/2}`; may overflow for
    /// very deep wells, so evaluation goes through [`EigenMode::edge_value`].
    pub a_out: f64,
}

impl EigenMode {
    fn build(geom: &WellGeometry, n: usize, k1: f64, provenance: Provenance) -> Self {
        let k2 = (geom.beta_sq() - k1 * k1).max(0.0).sqrt();
        let a_in = (2.0 * k2 / (k2 * geom.width() + 2.0)).sqrt();
        let parity = Parity::of_level(n);
        let half = 0.5 * geom.width();
        let trig = match parity {
            Parity::Symmetric => (k1 * half).cos(),
            Parity::Antisymmetric => (k1 * half).sin(),
        };
        EigenMode {
            n,
            k1,
            k2,
            parity,
            provenance,
            a_in,
            a_out: a_in * trig * (k2 * half).exp(),
        }
    }

    /// Interior amplitude evaluated at the upper wall, `φ(b⁻)`.
    pub fn edge_value(&self, geom: &WellGeometry) -> f64 {
        let half = 0.5 * geom.width();
        self.a_in
            * match self.parity {
                Parity::Symmetric => (self.k1 * half).cos(),
                Parity::Antisymmetric => (self.k1 * half).sin(),
            }
    }

    /// `½σ²k₁²`, the mode's energy above `γ`.
    pub fn kinetic_energy(&self, sigma: f64) -> f64 {
        0.5 * sigma * sigma * self.k1 * self.k1
    }

    /// `∫ₐᵇ φ² dx` in closed form.
    pub fn interior_mass(&self, geom: &WellGeometry) -> f64 {
        let l = geom.width();
        let osc = if self.k1 > 0.0 {
            (self.k1 * l).sin() / (2.0 * self.k1)
        } else {
            0.5 * l
        };
        let per_unit = match self.parity {
            Parity::Symmetric => 0.5 * l + osc,
            Parity::Antisymmetric => 0.5 * l - osc,
        };
        self.a_in * self.a_in * per_unit
    }

    /// `∫_b^{b+len} φ² dx` (equal to the mirror integral below `a`).
    pub fn tail_mass(&self, geom: &WellGeometry, len: f64) -> f64 {
        let e = self.edge_value(geom);
        e * e * (-(-2.0 * self.k2 * len).exp_m1()) / (2.0 * self.k2)
    }
}

/// The transcendental matching residual `k(b-a)/2 − nπ/2 + arcsin(k/β)`.
pub fn quantization_residual(geom: &WellGeometry, n: usize, k: f64) -> f64 {
    let ratio = (k / geom.beta()).min(1.0);
    0.5 * k * geom.width() - 0.5 * n as f64 * PI + ratio.asin()
}

/// Open bracket `((n-1)π/(b-a), nπ/(b-a))` that contains the `n`-th root.
pub fn root_bracket(geom: &WellGeometry, n: usize) -> (f64, f64) {
    let l = geom.width();
    ((n as f64 - 1.0) * PI / l, n as f64 * PI / l)
}

/// Number of bound states the pricing expansion keeps:
/// `⌊(b-a)/π · √(β² − 2γ/σ²)⌋`.
pub fn n_max(geom: &WellGeometry) -> Result<usize> {
    geom.validate()?;
    let raw = n_max_raw(geom);
    if raw < 1.0 {
        return Err(PricingError::NoBoundState(raw));
    }
    Ok(raw.floor() as usize)
}

/// The un-rounded level count `(b-a)/π · √(β² − 2γ/σ²)`.
pub fn n_max_raw(geom: &WellGeometry) -> f64 {
    geom.width() / PI * geom.k_ceiling()
}

fn check_level(geom: &WellGeometry, n: usize) -> Result<usize> {
    let top = n_max(geom)?;
    if n == 0 || n > top {
        return Err(PricingError::param(
            "n",
            format!("level {n} outside 1..={top} supported by the well"),
        ));
    }
    Ok(top)
}

/// Exact `n`-th wavenumber by bisection on the bracket.
pub fn exact_mode(geom: &WellGeometry, n: usize) -> Result<EigenMode> {
    check_level(geom, n)?;
    let beta = geom.beta();
    let (mut lo, hi0) = root_bracket(geom, n);
    let mut hi = hi0.min(beta);
    let g_lo = quantization_residual(geom, n, lo);
    let g_hi = quantization_residual(geom, n, hi);
    if !(g_lo < 0.0 && g_hi > 0.0) {
        return Err(PricingError::Internal(format!(
            "level {n}: residual does not change sign on [{lo}, {hi}] ({g_lo:e}, {g_hi:e})"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if quantization_residual(geom, n, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let k = if quantization_residual(geom, n, lo).abs() <= quantization_residual(geom, n, hi).abs() {
        lo
    } else {
        hi
    };
    Ok(EigenMode::build(geom, n, k, Provenance::Exact))
}

/// Low-energy wavenumber `βnπ/(β(b-a)+2)`.
pub fn approx_mode_low(geom: &WellGeometry, n: usize) -> Result<EigenMode> {
    check_level(geom, n)?;
    let beta = geom.beta();
    let k = beta * n as f64 * PI / (beta * geom.width() + 2.0);
    Ok(EigenMode::build(geom, n, k, Provenance::LowApprox))
}

fn high_argument(geom: &WellGeometry, n: usize) -> Result<f64> {
    let arg = 2.0 - 2.0 * (n as f64 - 1.0) * PI / (geom.beta() * geom.width());
    if arg < 0.0 {
        return Err(PricingError::ApproximationDomain(format!(
            "high-energy formula needs 2 - 2(n-1)π/(β(b-a)) >= 0, got {arg} at n = {n}"
        )));
    }
    Ok(arg)
}

/// High-energy wavenumber `(2/(b-a))·[(n-1)π/2 + √(2 − 2(n-1)π/(β(b-a)))]`.
///
/// Defined for `n = 1` as well (it then reduces to `2√2/(b-a)`), which the
/// error tables use even though the relative-error estimate is not.
pub fn approx_mode_high(geom: &WellGeometry, n: usize) -> Result<EigenMode> {
    check_level(geom, n)?;
    let arg = high_argument(geom, n)?;
    let k = 2.0 / geom.width() * ((n as f64 - 1.0) * PI / 2.0 + arg.sqrt());
    Ok(EigenMode::build(geom, n, k, Provenance::HighApprox))
}

/// A-priori relative error of the low-energy formula,
/// `n²π²/(6β[β(b-a)+2]²)`.
pub fn low_error_estimate(geom: &WellGeometry, n: usize) -> f64 {
    let beta = geom.beta();
    let nn = n as f64;
    nn * nn * PI * PI / (6.0 * beta * (beta * geom.width() + 2.0).powi(2))
}

/// A-priori absolute error of the high-energy formula,
/// `[2 − 2(n-1)π/(β(b-a))]^{3/2} / (12(b-a))`.
pub fn high_error_absolute(geom: &WellGeometry, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(PricingError::param("n", "levels start at 1"));
    }
    Ok(high_argument(geom, n)?.powf(1.5) / (12.0 * geom.width()))
}

/// A-priori relative error of the high-energy formula,
/// `[2 − 2(n-1)π/(β(b-a))]^{3/2} / (12(n-1)π)`; undefined at `n = 1`.
pub fn high_error_estimate(geom: &WellGeometry, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(PricingError::ApproximationDomain(
            "relative error of the high-energy formula is undefined at n = 1".into(),
        ));
    }
    Ok(high_argument(geom, n)?.powf(1.5) / (12.0 * (n as f64 - 1.0) * PI))
}

/// Both a-priori relative error formulas at level `n`.
pub fn error_formulas(geom: &WellGeometry, n: usize) -> Result<(f64, f64)> {
    Ok((low_error_estimate(geom, n), high_error_estimate(geom, n)?))
}

/// How the mixed spectrum decides between the two closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaRule {
    /// Low-energy formula below the top level; high-energy formula for the
    /// top level `n = n_max` once the well holds two or more levels.
    #[default]
    TopLevel,
    /// Whichever closed form lands closer to the exact root.
    NearestRoot,
}

/// Which wavenumbers a spectrum is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumChoice {
    Exact,
    Mixed(FormulaRule),
}

impl Default for SpectrumChoice {
    fn default() -> Self {
        SpectrumChoice::Mixed(FormulaRule::TopLevel)
    }
}

/// Mode counts by parity and by closed form.
///
/// Index 1 is the sine (antisymmetric) family, index 2 the cosine
/// (symmetric) family; `m1`/`m2` count modes on the low-energy formula and
/// `m_max1`/`m_max2` all modes of that family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumPartition {
    pub m1: usize,
    pub m2: usize,
    pub m_max1: usize,
    pub m_max2: usize,
    pub n_max: usize,
}

fn rule_picks_high(geom: &WellGeometry, n: usize, top: usize, rule: FormulaRule) -> Result<bool> {
    match rule {
        FormulaRule::TopLevel => Ok(top >= 2 && n == top),
        FormulaRule::NearestRoot => {
            let exact = exact_mode(geom, n)?.k1;
            let low = approx_mode_low(geom, n)?.k1;
            let high = match approx_mode_high(geom, n) {
                Ok(m) => m.k1,
                Err(PricingError::ApproximationDomain(_)) => return Ok(false),
                Err(e) => return Err(e),
            };
            Ok((high - exact).abs() < (low - exact).abs())
        }
    }
}

/// Assigns a closed form to every level and counts the result.
pub fn partition(geom: &WellGeometry, rule: FormulaRule) -> Result<SpectrumPartition> {
    Ok(Spectrum::build(geom, SpectrumChoice::Mixed(rule))?.partition)
}

/// A full set of modes for one well.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub geometry: WellGeometry,
    pub modes: Vec<EigenMode>,
    pub partition: SpectrumPartition,
}

impl Spectrum {
    pub fn build(geom: &WellGeometry, choice: SpectrumChoice) -> Result<Self> {
        let top = n_max(geom)?;
        let mut modes = Vec::with_capacity(top);
        for n in 1..=top {
            let mode = match choice {
                SpectrumChoice::Exact => exact_mode(geom, n)?,
                SpectrumChoice::Mixed(rule) => {
                    if rule_picks_high(geom, n, top, rule)? {
                        approx_mode_high(geom, n)?
                    } else {
                        approx_mode_low(geom, n)?
                    }
                }
            };
            modes.push(mode);
        }
        let count = |parity: Parity, low_only: bool| {
            modes
                .iter()
                .filter(|m| m.parity == parity && (!low_only || m.provenance != Provenance::HighApprox))
                .count()
        };
        let partition = SpectrumPartition {
            m1: count(Parity::Antisymmetric, true),
            m2: count(Parity::Symmetric, true),
            m_max1: count(Parity::Antisymmetric, false),
            m_max2: count(Parity::Symmetric, false),
            n_max: top,
        };
        Ok(Spectrum {
            geometry: *geom,
            modes,
            partition,
        })
    }
}

/// Piecewise eigenfunction value at log-price `x`.
pub fn eval_wavefunction(mode: &EigenMode, geom: &WellGeometry, x: f64) -> f64 {
    let c = geom.center();
    let half = 0.5 * geom.width();
    let d = x - c;
    if d.abs() <= half {
        return mode.a_in
            * match mode.parity {
                Parity::Symmetric => (mode.k1 * d).cos(),
                Parity::Antisymmetric => (mode.k1 * d).sin(),
            };
    }
    let decay = (-mode.k2 * (d.abs() - half)).exp() * mode.edge_value(geom);
    if d < 0.0 && mode.parity == Parity::Antisymmetric {
        -decay
    } else {
        decay
    }
}
