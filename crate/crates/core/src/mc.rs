//! Monte Carlo oracle on an Euler grid in log-price.
//!
//! Paths are simulated in fixed-size batches; batch `i` draws from a ChaCha8
//! stream `i` under the configured seed, and batch results are merged in
//! batch order, so an estimate is reproducible regardless of thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};
use crate::market::{model_coefficients, MarketParams, OptionKind, StepOptionSpec};

/// Samples per batch (a sample is one path, or one antithetic pair).
const BATCH: usize = 4096;

pub const GENERATOR: &str = "ChaCha8";
pub const MIN_PATHS: usize = 1000;
pub const MIN_STEPS: usize = 50;

/// How hard barriers are monitored between grid points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monitoring {
    /// Knock out only when a grid point touches the barrier.
    #[default]
    Discrete,
    /// Weight each surviving step by the Brownian-bridge probability of not
    /// crossing in between.
    BrownianBridge,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PathConfig {
    pub n_paths: usize,
    /// Time steps per year.
    pub n_steps: usize,
    pub seed: u64,
    pub antithetic: bool,
    pub monitoring: Monitoring,
}

impl Default for PathConfig {
    fn default() -> Self {
        PathConfig {
            n_paths: 200_000,
            n_steps: 250,
            seed: 20_240_601,
            antithetic: true,
            monitoring: Monitoring::Discrete,
        }
    }
}

impl PathConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths < MIN_PATHS {
            return Err(PricingError::param("n_paths", format!("must be >= {MIN_PATHS}")));
        }
        if self.antithetic && self.n_paths % 2 != 0 {
            return Err(PricingError::param("n_paths", "must be even with antithetic sampling"));
        }
        if self.n_steps < MIN_STEPS {
            return Err(PricingError::param("n_steps", format!("must be >= {MIN_STEPS} per year")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub generator: String,
}

/// Running mean and second central moment.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.count += 1.0;
        let d = v - self.mean;
        self.mean += d / self.count;
        self.m2 += d * (v - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0.0 {
            return other;
        }
        if other.count == 0.0 {
            return self;
        }
        let count = self.count + other.count;
        let d = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + d * other.count / count,
            m2: self.m2 + other.m2 + d * d * self.count * other.count / count,
        }
    }
}

struct PathModel {
    x0: f64,
    drift: f64,
    sd: f64,
    dt: f64,
    steps: usize,
    discount: f64,
    strike: f64,
    kind: OptionKind,
    lower: f64,
    upper: f64,
    v0: f64,
    var_dt: f64,
    monitoring: Monitoring,
}

impl PathModel {
    fn outside(&self, x: f64) -> bool {
        match self.kind {
            OptionKind::Pso | OptionKind::Uosb => x >= self.upper,
            OptionKind::Pdbs | OptionKind::Sdb => x <= self.lower || x >= self.upper,
            OptionKind::Vanilla => false,
        }
    }

    /// Probability a bridge between `x0` and `x1` stays inside the hard barriers.
    fn bridge_survival(&self, x0: f64, x1: f64) -> f64 {
        let mut s = 1.0;
        let up = (self.upper - x0) * (self.upper - x1);
        s *= 1.0 - (-2.0 * up / self.var_dt).exp();
        if self.kind == OptionKind::Sdb {
            let down = (x0 - self.lower) * (x1 - self.lower);
            s *= 1.0 - (-2.0 * down / self.var_dt).exp();
        }
        s
    }

    fn payoff(&self, z: &[f64], sign: f64) -> f64 {
        let mut x = self.x0;
        let hard = matches!(self.kind, OptionKind::Uosb | OptionKind::Sdb);
        if hard && self.outside(x) {
            return 0.0;
        }
        let mut occupation = 0.0;
        let mut survival = 1.0;
        let mut prev_out = self.outside(x);
        for &zi in z {
            let next = x + self.drift + self.sd * sign * zi;
            let out = self.outside(next);
            if hard {
                if out {
                    return 0.0;
                }
                if self.monitoring == Monitoring::BrownianBridge {
                    survival *= self.bridge_survival(x, next);
                }
            } else {
                occupation += 0.5 * self.dt * (prev_out as u8 as f64 + out as u8 as f64);
            }
            prev_out = out;
            x = next;
        }
        let intrinsic = (x.exp() - self.strike).max(0.0);
        let knock = if self.kind.is_step() { (-self.v0 * occupation).exp() } else { 1.0 };
        self.discount * knock * survival * intrinsic
    }
}

/// Monte Carlo price at log-spot `x` with standard error.
pub fn mc_price(mp: &MarketParams, x: f64, spec: &StepOptionSpec, cfg: &PathConfig) -> Result<McEstimate> {
    cfg.validate()?;
    let coeffs = model_coefficients(mp)?;
    spec.validate(&coeffs)?;
    if !x.is_finite() {
        return Err(PricingError::param("spot", "log-spot must be finite"));
    }
    let steps = ((cfg.n_steps as f64 * spec.tau).round() as usize).max(1);
    let dt = spec.tau / steps as f64;
    let model = PathModel {
        x0: x,
        drift: (mp.rate - 0.5 * mp.variance()) * dt,
        sd: mp.vol * dt.sqrt(),
        dt,
        steps,
        discount: (-mp.rate * spec.tau).exp(),
        strike: spec.strike,
        kind: spec.kind,
        lower: spec.lower,
        upper: spec.upper,
        v0: spec.v0,
        var_dt: mp.variance() * dt,
        monitoring: cfg.monitoring,
    };
    let samples = if cfg.antithetic { cfg.n_paths / 2 } else { cfg.n_paths };
    let n_batches = samples.div_ceil(BATCH);
    let batches: Vec<Moments> = (0..n_batches)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let count = BATCH.min(samples - i * BATCH);
            let mut z = vec![0.0; model.steps];
            let mut m = Moments::default();
            for _ in 0..count {
                for zi in z.iter_mut() {
                    *zi = StandardNormal.sample(&mut rng);
                }
                let v = if cfg.antithetic {
                    0.5 * (model.payoff(&z, 1.0) + model.payoff(&z, -1.0))
                } else {
                    model.payoff(&z, 1.0)
                };
                m.push(v);
            }
            m
        })
        .collect();
    let total = batches.into_iter().fold(Moments::default(), Moments::merge);
    let var = if total.count > 1.0 { total.m2 / (total.count - 1.0) } else { 0.0 };
    Ok(McEstimate {
        mean: total.mean,
        std_error: (var / total.count).sqrt(),
        n_paths: cfg.n_paths,
        seed: cfg.seed,
        generator: GENERATOR.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n_paths: usize,
    pub mean: f64,
    pub std_error: f64,
    pub reference: f64,
    pub abs_error: f64,
    /// `|mean − reference| / std_error`.
    pub z_score: f64,
}

/// Runs [`mc_price`] over a ladder of path counts against a reference price.
pub fn mc_convergence_report(
    mp: &MarketParams,
    x: f64,
    spec: &StepOptionSpec,
    base: &PathConfig,
    ladder: &[usize],
    reference: f64,
) -> Result<Vec<ConvergenceRow>> {
    ladder
        .iter()
        .map(|&n| {
            let est = mc_price(mp, x, spec, &PathConfig { n_paths: n, ..*base })?;
            let abs_error = (est.mean - reference).abs();
            Ok(ConvergenceRow {
                n_paths: n,
                mean: est.mean,
                std_error: est.std_error,
                reference,
                abs_error,
                z_score: if est.std_error > 0.0 { abs_error / est.std_error } else { f64::INFINITY },
            })
        })
        .collect()
}
