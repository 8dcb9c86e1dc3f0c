//! Globally adaptive Gauss–Kronrod (10/21-point) integration.
//!
//! The scheme keeps every subinterval in a max-heap keyed on its error
//! estimate and bisects the worst one until the summed error meets
//! `max(abs_tol, rel_tol·|I|)`. Error estimates follow the QUADPACK `qk21`
//! recipe, including its round-off floor, so an integrand that is already
//! resolved to machine precision stops refining instead of exhausting the
//! subdivision budget.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{PricingError, Result};

/// Tolerances and truncation widths shared by every quadrature in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Width multiplier (in units of `σ√τ`) for truncating semi-infinite payoff integrals.
    pub tail_sigmas: f64,
    /// Fraction of an interval clipped at an endpoint where the integrand is marginal.
    pub endpoint_clip: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
            tail_sigmas: 8.0,
            endpoint_clip: 1e-6,
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !self.rel_tol.is_finite() {
            return Err(PricingError::param("rel_tol", "must be finite and > 0"));
        }
        if !(self.abs_tol > 0.0) || !self.abs_tol.is_finite() {
            return Err(PricingError::param("abs_tol", "must be finite and > 0"));
        }
        if self.max_subdivisions < 1 {
            return Err(PricingError::param("max_subdivisions", "must be >= 1"));
        }
        if !(self.tail_sigmas > 0.0) || !self.tail_sigmas.is_finite() {
            return Err(PricingError::param("tail_sigmas", "must be finite and > 0"));
        }
        if !(self.endpoint_clip > 0.0 && self.endpoint_clip <= 1e-2) {
            return Err(PricingError::param(
                "endpoint_clip",
                format!("must lie in (0, 1e-2], got {}", self.endpoint_clip),
            ));
        }
        Ok(())
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        QuadConfig { rel_tol, ..self }
    }
}

/// Value and error estimate of a definite integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub subdivisions: usize,
}

// QUADPACK qk21 abscissae and weights.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], ...
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    /// Error cannot shrink further: round-off floor reached or interval degenerate.
    frozen: bool,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        // Frozen segments sink to the bottom; ties broken by position for determinism.
        (!self.frozen)
            .cmp(&!other.frozen)
            .then(self.error.total_cmp(&other.error))
            .then(other.lo.total_cmp(&self.lo))
    }
}

fn qk21<F: FnMut(f64) -> f64>(f: &mut F, lo: f64, hi: f64) -> Segment {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    let mut frozen = false;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && error <= floor {
        error = floor;
        frozen = true;
    }
    let width_floor = 1e3 * f64::EPSILON * (lo.abs().max(hi.abs())).max(1.0);
    if (hi - lo).abs() <= width_floor {
        frozen = true;
    }
    Segment {
        lo,
        hi,
        value,
        error,
        frozen,
    }
}

/// Adaptive integral of `f` over `[lo, hi]`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, lo: f64, hi: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    integrate_pieces(f, &[lo, hi], cfg)
}

/// Adaptive integral over `[points[0], points[last]]` with the given interior
/// breakpoints seeded as initial subintervals (kinks, barrier crossings).
pub fn integrate_pieces<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], cfg: &QuadConfig) -> Result<QuadResult> {
    cfg.validate()?;
    if points.len() < 2 {
        return Err(PricingError::param("interval", "need at least two points"));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(PricingError::param("interval", "endpoints must be finite"));
    }
    if points.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(PricingError::param("interval", "points must be strictly increasing (lo < hi)"));
    }

    let mut heap = BinaryHeap::with_capacity(2 * cfg.max_subdivisions + points.len());
    let mut evaluations = 0usize;
    for w in points.windows(2) {
        heap.push(qk21(&mut f, w[0], w[1]));
        evaluations += 21;
    }
    let mut subdivisions = 0usize;
    let (mut run_value, mut run_error) = totals(&heap);

    loop {
        let tol = cfg.abs_tol.max(cfg.rel_tol * run_value.abs());
        if !run_value.is_finite() || !run_error.is_finite() {
            return Err(PricingError::Quadrature {
                estimate: run_value,
                error: run_error,
                subdivisions,
            });
        }
        let worst = *heap.peek().expect("heap holds at least one segment");
        if run_error <= tol || worst.frozen {
            let (value, error) = totals(&heap);
            return Ok(QuadResult {
                value,
                error,
                evaluations,
                subdivisions,
            });
        }
        if subdivisions >= cfg.max_subdivisions {
            let (value, error) = totals(&heap);
            return Err(PricingError::Quadrature {
                estimate: value,
                error,
                subdivisions,
            });
        }
        heap.pop();
        let mid = 0.5 * (worst.lo + worst.hi);
        let left = qk21(&mut f, worst.lo, mid);
        let right = qk21(&mut f, mid, worst.hi);
        run_value += (left.value + right.value) - worst.value;
        run_error += (left.error + right.error) - worst.error;
        heap.push(left);
        heap.push(right);
        evaluations += 42;
        subdivisions += 1;
        if subdivisions % 64 == 0 {
            // Re-anchor the running sums against drift.
            (run_value, run_error) = totals(&heap);
        }
    }
}

fn totals(heap: &BinaryHeap<Segment>) -> (f64, f64) {
    // Sum in a position-sorted order so the result does not depend on heap layout.
    let mut segs: Vec<&Segment> = heap.iter().collect();
    segs.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let value = neumaier_sum(segs.iter().map(|s| s.value));
    let error = neumaier_sum(segs.iter().map(|s| s.error));
    (value, error)
}

/// Compensated (Neumaier) summation.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Integral over `[lo, ∞)` of an integrand dominated by `e^{-decay_rate·x}`.
///
/// The range is cut at `lo + max(50, tail_sigmas)/decay_rate`; the omitted
/// tail is bounded by `|f(hi)|/decay_rate` and added to the error estimate.
pub fn integrate_semi_infinite<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    decay_rate: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    if !(decay_rate > 0.0) || !decay_rate.is_finite() {
        return Err(PricingError::Divergence(format!(
            "semi-infinite integral needs a positive decay rate, got {decay_rate}"
        )));
    }
    let width = 50.0f64.max(cfg.tail_sigmas) / decay_rate;
    let hi = lo + width;
    let mut res = integrate(&mut f, lo, hi, cfg)?;
    res.error += f(hi).abs() / decay_rate;
    Ok(res)
}
