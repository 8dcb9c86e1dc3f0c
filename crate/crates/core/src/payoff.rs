//! Closed-form payoff moments.
//!
//! Every kernel in this crate is a sum of terms of the form
//! `e^{α(x-x')}·e^{-d(x'-o)}·cos(q(x'-o)+φ)`, so the call payoff integral
//! `∫ e^{-αx'}(e^{x'}-K)·… dx'` reduces to two complex exponential
//! integrals. Evaluating them exactly removes one quadrature dimension from
//! the pricers and keeps the oscillatory `x'` integrals free of
//! cancellation error.

use num_complex::Complex64;

/// `(e^w − 1)/w`, accurate near `w = 0`.
fn exprel(w: Complex64) -> Complex64 {
    if w.norm() < 1e-3 {
        Complex64::new(1.0, 0.0) + w / 2.0 + w * w / 6.0 + w * w * w / 24.0 + w * w * w * w / 120.0
    } else {
        (w.exp() - 1.0) / w
    }
}

/// `∫_{u0}^{u1} e^{s·u} cos(q·u + φ) du`; `u1` may be `+∞` when `s < 0`.
pub fn exp_cos_integral(s: f64, q: f64, phase: f64, u0: f64, u1: f64) -> f64 {
    let z = Complex64::new(s, q);
    let rot = Complex64::from_polar(1.0, phase);
    if u1 == f64::INFINITY {
        debug_assert!(s < 0.0, "integral to infinity needs s < 0, got {s}");
        return (-(rot * (z * u0).exp() / z)).re;
    }
    let width = u1 - u0;
    (rot * (z * u0).exp() * exprel(z * width) * width).re
}

/// Payoff weight `e^{-αx'}(e^{x'} − K)` with the trigonometric/exponential
/// factor expressed in the shifted coordinate `u = x' − origin`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayoffWeight {
    pub alpha: f64,
    pub strike: f64,
    pub origin: f64,
}

impl PayoffWeight {
    pub fn new(alpha: f64, strike: f64, origin: f64) -> Self {
        PayoffWeight { alpha, strike, origin }
    }

    /// `∫_{lo}^{hi} e^{-αx'}(e^{x'}−K)·e^{-decay·u}·cos(freq·u + phase) dx'`
    /// with `u = x' − origin`. `hi` may be `+∞` if `decay > 1 − α`.
    pub fn integral(&self, decay: f64, freq: f64, phase: f64, lo: f64, hi: f64) -> f64 {
        if !(hi > lo) {
            return 0.0;
        }
        let u0 = lo - self.origin;
        let u1 = if hi == f64::INFINITY { hi } else { hi - self.origin };
        let up = ((1.0 - self.alpha) * self.origin).exp()
            * exp_cos_integral(1.0 - self.alpha - decay, freq, phase, u0, u1);
        let down = self.strike
            * (-self.alpha * self.origin).exp()
            * exp_cos_integral(-self.alpha - decay, freq, phase, u0, u1);
        up - down
    }

    /// Same integral with `sin(freq·u + phase)` in place of the cosine.
    pub fn integral_sin(&self, decay: f64, freq: f64, phase: f64, lo: f64, hi: f64) -> f64 {
        self.integral(decay, freq, phase - std::f64::consts::FRAC_PI_2, lo, hi)
    }

    /// Integrand value, for brute-force checks.
    pub fn integrand(&self, decay: f64, freq: f64, phase: f64, x: f64) -> f64 {
        let u = x - self.origin;
        (-self.alpha * x).exp() * (x.exp() - self.strike) * (-decay * u).exp() * (freq * u + phase).cos()
    }
}
