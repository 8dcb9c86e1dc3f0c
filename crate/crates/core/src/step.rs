//! Step-option pricers.
//!
//! The proportional step option (PSO) propagates through a potential step of
//! height `V₀` above the barrier `B`; its kernel is an integral over the
//! scattering states with momentum `p ∈ (0, √(2(V₀−γ))/σ)`. The proportional
//! double-barrier step (PDBS) sees a finite square well on `(a, b)` and is
//! priced from the well's bound states.
//!
//! Both prices are split into labelled components whose Neumaier sum is the
//! reported price. Payoff integrals over `x'` are evaluated in closed form
//! through [`PayoffWeight`]; only the momentum integral is numerical.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::baseline::{bs_call_closed, sdb_price, uosb_price, KernelDiagnostics};
use crate::error::{PricingError, Result};
use crate::market::{model_coefficients, MarketParams, ModelCoefficients, OptionKind, StepOptionSpec};
use crate::payoff::PayoffWeight;
use crate::quadrature::{integrate_pieces, neumaier_sum, QuadConfig};
use crate::spectrum::{eval_wavefunction, EigenMode, Parity, Provenance, Spectrum, SpectrumChoice, WellGeometry};

/// Numerical settings for [`price`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PricingConfig {
    pub quad: QuadConfig,
    pub spectrum: SpectrumChoice,
}

/// One labelled additive piece of a price.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub label: String,
    pub value: f64,
}

/// Per-mode summary of a bound-state expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub n: usize,
    pub k1: f64,
    pub k2: f64,
    pub parity: Parity,
    pub provenance: Provenance,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub kernel: KernelDiagnostics,
    /// Upper truncation of the `x'` integral above the barrier, if any.
    pub x_cut: Option<f64>,
    /// Momentum interval actually integrated, if any.
    pub momentum_range: Option<(f64, f64)>,
    pub modes: Vec<ModeSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricingResult {
    pub kind: OptionKind,
    pub price: f64,
    pub components: Vec<Component>,
    pub diagnostics: Diagnostics,
}

impl PricingResult {
    fn from_components(kind: OptionKind, components: Vec<Component>, diagnostics: Diagnostics) -> Self {
        let price = neumaier_sum(components.iter().map(|c| c.value));
        PricingResult {
            kind,
            price,
            components,
            diagnostics,
        }
    }

    /// Component value by label (`"C1"` … `"C6"`).
    pub fn component(&self, label: &str) -> Option<f64> {
        self.components.iter().find(|c| c.label == label).map(|c| c.value)
    }
}

fn component(label: &str, value: f64) -> Component {
    Component {
        label: label.to_string(),
        value,
    }
}

/// Scattering state of the potential step with incoming momentum `p1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringState {
    pub p1: f64,
    /// Decay rate above the step, `√(2V₀/σ² − p₁²)`.
    pub p2: f64,
    /// Reflection amplitude `(p₁ − ip₂)/(p₁ + ip₂)`.
    pub reflection: Complex64,
    /// Transmission amplitude `2p₁/(p₁ + ip₂)`.
    pub transmission: Complex64,
}

/// Largest admissible momentum `√(2(V₀ − γ))/σ`.
pub fn momentum_ceiling(coeffs: &ModelCoefficients, sigma: f64, v0: f64) -> f64 {
    (2.0 * (v0 - coeffs.gamma)).max(0.0).sqrt() / sigma
}

/// Scattering state with incoming momentum `p1 ∈ (0, √(2(V₀ − γ))/σ)`.
pub fn scattering_state(mp: &MarketParams, v0: f64, p1: f64) -> Result<ScatteringState> {
    let coeffs = model_coefficients(mp)?;
    let ceiling = momentum_ceiling(&coeffs, mp.vol, v0);
    if !(p1 > 0.0 && p1 < ceiling) {
        return Err(PricingError::UnsupportedRegion(format!("momentum {p1} outside (0, {ceiling})")));
    }
    scatter(v0, mp.vol, p1)
}

fn scatter(v0: f64, sigma: f64, p1: f64) -> Result<ScatteringState> {
    let p2_sq = 2.0 * v0 / (sigma * sigma) - p1 * p1;
    if !(p1 > 0.0) || !(p2_sq > 0.0) {
        return Err(PricingError::UnsupportedRegion(format!(
            "momentum {p1} outside (0, sqrt(2 V0)/sigma)"
        )));
    }
    let p2 = p2_sq.sqrt();
    let denom = Complex64::new(p1, p2);
    Ok(ScatteringState {
        p1,
        p2,
        reflection: Complex64::new(p1, -p2) / denom,
        transmission: Complex64::new(2.0 * p1, 0.0) / denom,
    })
}

/// Position of the start and end points relative to the barrier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PsoRegion {
    /// `x < B`, `x' < B`: incident plus reflected wave.
    BelowBelow,
    /// `x < B`, `x' ≥ B`.
    BelowAbove,
    /// `x ≥ B`, `x' < B`.
    AboveBelow,
    /// `x ≥ B`, `x' ≥ B`.
    AboveAbove,
}

impl PsoRegion {
    pub fn of(x: f64, x_end: f64, barrier: f64) -> Self {
        match (x < barrier, x_end < barrier) {
            (true, true) => PsoRegion::BelowBelow,
            (true, false) => PsoRegion::BelowAbove,
            (false, true) => PsoRegion::AboveBelow,
            (false, false) => PsoRegion::AboveAbove,
        }
    }
}

/// Momentum-space integrand of the PSO kernel, without the
/// `e^{-τγ}e^{α(x−x')}` prefactor and the `e^{-τσ²p²/2}/2π` weight.
fn region_integrand(st: &ScatteringState, region: PsoRegion, x: f64, x_end: f64, barrier: f64) -> f64 {
    let p = st.p1;
    match region {
        PsoRegion::BelowBelow => {
            let theta = p * (x + x_end - 2.0 * barrier);
            2.0 * (p * (x - x_end)).cos() + 2.0 * (st.reflection.conj() * Complex64::from_polar(1.0, theta)).re
        }
        PsoRegion::BelowAbove => {
            2.0 * (st.transmission.conj() * Complex64::from_polar(1.0, p * (x - barrier))).re
                * (-st.p2 * (x_end - barrier)).exp()
        }
        PsoRegion::AboveBelow => {
            2.0 * (-st.p2 * (x - barrier)).exp()
                * (st.transmission.conj() * Complex64::from_polar(1.0, p * (x_end - barrier))).re
        }
        PsoRegion::AboveAbove => st.transmission.norm_sqr() * (-st.p2 * (x + x_end - 2.0 * barrier)).exp(),
    }
}

fn pso_inputs(mp: &MarketParams, spec: &StepOptionSpec, cfg: &QuadConfig) -> Result<ModelCoefficients> {
    if spec.kind != OptionKind::Pso {
        return Err(PricingError::Contract(format!("expected a pso contract, got {}", spec.kind)));
    }
    if !(cfg.endpoint_clip > 0.0) {
        return Err(PricingError::Divergence(
            "the momentum integral needs endpoint_clip > 0: the integrand is singular at the momentum ceiling".into(),
        ));
    }
    cfg.validate()?;
    let coeffs = model_coefficients(mp)?;
    spec.validate(&coeffs)?;
    Ok(coeffs)
}

fn momentum_points(lo: f64, hi: f64, s2t: f64) -> Vec<f64> {
    let gauss = (20.0 / s2t).sqrt();
    if gauss > lo && gauss < hi {
        vec![lo, gauss, hi]
    } else {
        vec![lo, hi]
    }
}

/// PSO transition kernel `K(x, x')` for an explicitly stated region.
///
/// Returns [`PricingError::Contract`] when `(x, x')` does not lie in `region`.
pub fn pso_kernel_in(
    mp: &MarketParams,
    spec: &StepOptionSpec,
    x: f64,
    x_end: f64,
    region: PsoRegion,
    cfg: &QuadConfig,
) -> Result<f64> {
    let coeffs = pso_inputs(mp, spec, cfg)?;
    let actual = PsoRegion::of(x, x_end, spec.upper);
    if actual != region {
        return Err(PricingError::Contract(format!(
            "(x, x') = ({x}, {x_end}) lies in {actual:?}, not {region:?}"
        )));
    }
    let s2t = mp.variance() * spec.tau;
    let pmax = momentum_ceiling(&coeffs, mp.vol, spec.v0);
    let (lo, hi) = (cfg.endpoint_clip * pmax, (1.0 - cfg.endpoint_clip) * pmax);
    let f = |p: f64| match scatter(spec.v0, mp.vol, p) {
        Ok(st) => (-0.5 * s2t * p * p).exp() / (2.0 * PI) * region_integrand(&st, region, x, x_end, spec.upper),
        Err(_) => 0.0,
    };
    let r = integrate_pieces(f, &momentum_points(lo, hi, s2t), cfg)?;
    Ok((-spec.tau * coeffs.gamma + coeffs.alpha * (x - x_end)).exp() * r.value)
}

/// PSO transition kernel with the region inferred from `(x, x')`.
pub fn pso_kernel(mp: &MarketParams, spec: &StepOptionSpec, x: f64, x_end: f64, cfg: &QuadConfig) -> Result<f64> {
    pso_kernel_in(mp, spec, x, x_end, PsoRegion::of(x, x_end, spec.upper), cfg)
}

/// PSO call price.
///
/// For `x < B` the components are `C1` (`x'` below the barrier) and `C2`
/// (`x'` above it); for `x ≥ B` they are `C3` and `C4`. The payoff integral
/// above the barrier is truncated at
/// `x_cut = max(B, ln K, x) + tail_sigmas·σ√τ`.
pub fn pso_price(mp: &MarketParams, x: f64, spec: &StepOptionSpec, cfg: &QuadConfig) -> Result<PricingResult> {
    let coeffs = pso_inputs(mp, spec, cfg)?;
    let barrier = spec.upper;
    let lk = spec.log_strike();
    if lk >= barrier {
        return Err(PricingError::UnsupportedRegion(format!(
            "strike log-price {lk} must lie below the barrier {barrier}"
        )));
    }
    if !x.is_finite() {
        return Err(PricingError::param("spot", "log-spot must be finite"));
    }
    let s2t = mp.variance() * spec.tau;
    let x_cut = barrier.max(lk).max(x) + cfg.tail_sigmas * s2t.sqrt();
    let pmax = momentum_ceiling(&coeffs, mp.vol, spec.v0);
    let (lo, hi) = (cfg.endpoint_clip * pmax, (1.0 - cfg.endpoint_clip) * pmax);
    let pay = PayoffWeight::new(coeffs.alpha, spec.strike, barrier);
    let below = x < barrier;
    let d = x - barrier;

    // Closed-form x' integrals for a given scattering state, as (below, above).
    let pieces = |st: &ScatteringState| -> (f64, f64) {
        let p = st.p1;
        let above_mass = pay.integral(st.p2, 0.0, 0.0, barrier, x_cut);
        if below {
            let r = st.reflection.conj();
            let incident = 2.0 * pay.integral(0.0, -p, p * d, lk, barrier);
            let reflected =
                2.0 * (r.re * pay.integral(0.0, p, p * d, lk, barrier) - r.im * pay.integral_sin(0.0, p, p * d, lk, barrier));
            let t = 2.0 * (st.transmission.conj() * Complex64::from_polar(1.0, p * d)).re;
            (incident + reflected, t * above_mass)
        } else {
            let t = st.transmission.conj();
            let decay = (-st.p2 * d).exp();
            let low = 2.0 * decay * (t.re * pay.integral(0.0, p, 0.0, lk, barrier) - t.im * pay.integral_sin(0.0, p, 0.0, lk, barrier));
            (low, st.transmission.norm_sqr() * decay * above_mass)
        }
    };
    let weight = |p: f64| (-0.5 * s2t * p * p).exp() / (2.0 * PI);
    let points = momentum_points(lo, hi, s2t);
    let run = |which: usize| {
        integrate_pieces(
            |p| match scatter(spec.v0, mp.vol, p) {
                Ok(st) => {
                    let (a, b) = pieces(&st);
                    weight(p) * if which == 0 { a } else { b }
                }
                Err(_) => 0.0,
            },
            &points,
            cfg,
        )
    };
    let first = run(0)?;
    let second = run(1)?;
    let pre = (-spec.tau * coeffs.gamma + coeffs.alpha * x).exp();

    // Clipped end slivers, estimated from the integrand at the clip points.
    let edge = |p: f64| {
        scatter(spec.v0, mp.vol, p)
            .map(|st| {
                let (a, b) = pieces(&st);
                weight(p) * (a.abs() + b.abs())
            })
            .unwrap_or(0.0)
    };
    let truncation = pre * cfg.endpoint_clip * pmax * (edge(lo) + edge(hi));
    let labels = if below { ["C1", "C2"] } else { ["C3", "C4"] };
    let diagnostics = Diagnostics {
        kernel: KernelDiagnostics {
            quadrature_error: pre * (first.error + second.error),
            truncation_bound: truncation,
            terms_used: 0,
        },
        x_cut: Some(x_cut),
        momentum_range: Some((lo, hi)),
        modes: Vec::new(),
    };
    Ok(PricingResult::from_components(
        OptionKind::Pso,
        vec![component(labels[0], pre * first.value), component(labels[1], pre * second.value)],
        diagnostics,
    ))
}

/// `-ln(1e-14)`: exterior tails are cut where the eigenfunction weight has
/// decayed by this many e-folds.
const TAIL_EFOLDS: f64 = 32.236_191_301_916_64;

/// `∫ e^{-αx'}φ(x')(e^{x'} − K) dx'` from `ln K` (or the far left) up to `b`.
fn payoff_overlap_low(mode: &EigenMode, geom: &WellGeometry, alpha: f64, strike: f64) -> f64 {
    let lk = strike.ln();
    let (a, b) = (geom.a, geom.b);
    let phase = match mode.parity {
        Parity::Symmetric => 0.0,
        Parity::Antisymmetric => -0.5 * PI,
    };
    let inner = mode.a_in * PayoffWeight::new(alpha, strike, geom.center()).integral(0.0, mode.k1, phase, lk.max(a), b);
    if lk >= a {
        return inner;
    }
    // Left exterior: φ = ±φ(b⁻)·e^{k₂(x'−a)}.
    let sign = match mode.parity {
        Parity::Symmetric => 1.0,
        Parity::Antisymmetric => -1.0,
    };
    inner + sign * mode.edge_value(geom) * PayoffWeight::new(alpha, strike, a).integral(-mode.k2, 0.0, 0.0, lk, a)
}

/// `∫_b^{b+L} e^{-αx'}φ(x')(e^{x'} − K) dx'` with `L` set by the decay margin.
fn payoff_overlap_high(mode: &EigenMode, geom: &WellGeometry, alpha: f64, strike: f64) -> Result<f64> {
    let margin = mode.k2 - (1.0 - alpha);
    if !(margin > 0.0) {
        return Err(PricingError::Divergence(format!(
            "mode n = {} decays at k2 = {} which does not beat the payoff growth {}",
            mode.n,
            mode.k2,
            1.0 - alpha
        )));
    }
    let len = TAIL_EFOLDS / margin;
    let b = geom.b;
    Ok(mode.edge_value(geom) * PayoffWeight::new(alpha, strike, b).integral(mode.k2, 0.0, 0.0, b, b + len))
}

/// PDBS call price from the bound states of the square well.
///
/// Each mode contributes `w·(M_L + M_I + M_R)·(J_low + J_high)` with
/// `w = e^{-τγ − τσ²k₁²/2}e^{αx}φ(x)`, interior and tail masses `M`, and
/// payoff overlaps `J` below and above `b`. The six components collect the
/// mass × overlap products summed over modes.
pub fn pdbs_price(mp: &MarketParams, x: f64, spec: &StepOptionSpec, cfg: &PricingConfig) -> Result<PricingResult> {
    if spec.kind != OptionKind::Pdbs {
        return Err(PricingError::Contract(format!("expected a pdbs contract, got {}", spec.kind)));
    }
    cfg.quad.validate()?;
    let coeffs = model_coefficients(mp)?;
    spec.validate(&coeffs)?;
    let (a, b) = (spec.lower, spec.upper);
    if !(x > a && x < b) {
        return Err(PricingError::UnsupportedRegion(format!("log-spot {x} outside the corridor ({a}, {b})")));
    }
    if spec.log_strike() >= b {
        return Err(PricingError::UnsupportedRegion(format!(
            "strike log-price {} must lie below the upper barrier {b}",
            spec.log_strike()
        )));
    }
    let geom = WellGeometry::new(mp, a, b, spec.v0)?;
    let spectrum = Spectrum::build(&geom, cfg.spectrum)?;
    let mut parts: [Vec<f64>; 6] = Default::default();
    let mut modes = Vec::with_capacity(spectrum.modes.len());
    let mut tail_bound = 0.0;
    for mode in &spectrum.modes {
        let w = (-spec.tau * (coeffs.gamma + mode.kinetic_energy(mp.vol)) + coeffs.alpha * x).exp()
            * eval_wavefunction(mode, &geom, x);
        let tail_len = TAIL_EFOLDS / (2.0 * mode.k2);
        let side = mode.tail_mass(&geom, tail_len);
        let mid = mode.interior_mass(&geom);
        let j_low = payoff_overlap_low(mode, &geom, coeffs.alpha, spec.strike);
        let j_high = payoff_overlap_high(mode, &geom, coeffs.alpha, spec.strike)?;
        let products = [
            side * j_low,
            side * j_high,
            mid * j_low,
            mid * j_high,
            side * j_low,
            side * j_high,
        ];
        for (slot, v) in parts.iter_mut().zip(products) {
            slot.push(w * v);
        }
        let contribution = w * (2.0 * side + mid) * (j_low + j_high);
        let edge = mode.edge_value(&geom);
        tail_bound += (w * edge * edge * (-TAIL_EFOLDS).exp() / mode.k2 * (j_low.abs() + j_high.abs())).abs();
        modes.push(ModeSummary {
            n: mode.n,
            k1: mode.k1,
            k2: mode.k2,
            parity: mode.parity,
            provenance: mode.provenance,
            contribution,
        });
    }
    let components = parts
        .iter()
        .enumerate()
        .map(|(i, v)| component(&format!("C{}", i + 1), neumaier_sum(v.iter().copied())))
        .collect();
    let diagnostics = Diagnostics {
        kernel: KernelDiagnostics {
            quadrature_error: 0.0,
            truncation_bound: tail_bound,
            terms_used: spectrum.modes.len(),
        },
        x_cut: None,
        momentum_range: None,
        modes,
    };
    Ok(PricingResult::from_components(OptionKind::Pdbs, components, diagnostics))
}

/// Prices any supported contract at log-spot `x`.
pub fn price(mp: &MarketParams, x: f64, spec: &StepOptionSpec, cfg: &PricingConfig) -> Result<PricingResult> {
    let single = |label: &str, value: f64, kernel: KernelDiagnostics| {
        PricingResult::from_components(
            spec.kind,
            vec![component(label, value)],
            Diagnostics {
                kernel,
                ..Diagnostics::default()
            },
        )
    };
    match spec.kind {
        OptionKind::Pso => pso_price(mp, x, spec, &cfg.quad),
        OptionKind::Pdbs => pdbs_price(mp, x, spec, cfg),
        OptionKind::Uosb => {
            let (v, d) = uosb_price(mp, x, spec, &cfg.quad)?;
            Ok(single("C1", v, d))
        }
        OptionKind::Sdb => {
            let (v, d) = sdb_price(mp, x, spec, &cfg.quad)?;
            Ok(single("C1", v, d))
        }
        OptionKind::Vanilla => {
            let coeffs = model_coefficients(mp)?;
            spec.validate(&coeffs)?;
            let v = bs_call_closed(mp, x.exp(), spec.strike, spec.tau)?;
            Ok(single("C1", v, KernelDiagnostics::default()))
        }
    }
}

/// Step used by [`delta`] in log-price.
pub const DELTA_STEP: f64 = 1e-3;

/// `∂C/∂S = e^{-x}·(C(x+h) − C(x−h))/2h`.
pub fn delta(mp: &MarketParams, x: f64, spec: &StepOptionSpec, cfg: &PricingConfig) -> Result<f64> {
    let up = price(mp, x + DELTA_STEP, spec, cfg)?.price;
    let down = price(mp, x - DELTA_STEP, spec, cfg)?.price;
    Ok((-x).exp() * (up - down) / (2.0 * DELTA_STEP))
}
