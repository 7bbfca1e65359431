//! Deterministic random parameter draws.
//!
//! Every `(seed, check id, trial)` triple owns an independent ChaCha8
//! stream, so results do not depend on evaluation order or thread count and
//! redraws after a rejected sample never shift other trials.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Complex;

use crate::qcore::QContext;
use crate::Result;

/// Sampling and precision settings shared by all checks.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleConfig {
    pub seed: u64,
    pub trials: usize,
    /// Bounds on `|q|`.
    pub q_range: (f64, f64),
    /// `arg q` is drawn from `[0, theta_max]`.
    pub theta_max: f64,
    /// Bounds on the moduli of free parameters.
    pub param_box: (f64, f64),
    /// Keep `a` inside `|s/q| < |a| < |s/q^2|` where both `W` series converge.
    pub annulus_enforce: bool,
    /// Largest termination order of terminating series.
    pub termination_n: usize,
    pub precision_bits: u32,
    /// Perturb one coefficient of a continued fraction (negative control).
    pub fault_injection: bool,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            trials: 20,
            q_range: (0.1, 0.6),
            theta_max: PI / 4.0,
            param_box: (0.3, 3.0),
            annulus_enforce: true,
            termination_n: 4,
            precision_bits: 256,
            fault_injection: false,
        }
    }
}

/// Per-trial random stream.
pub struct Sampler {
    rng: ChaCha8Rng,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// FNV-1a, stable across platforms and releases.
fn stable_hash(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

impl Sampler {
    pub fn new(seed: u64, id: &str, trial: usize) -> Self {
        let key = splitmix64(splitmix64(seed) ^ stable_hash(id)) ^ splitmix64(trial as u64);
        Self {
            rng: ChaCha8Rng::seed_from_u64(splitmix64(key)),
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            lo
        } else {
            self.rng.random_range(lo..hi)
        }
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.random_range(lo..=hi)
    }

    /// `r e^(i theta)` with `r` in `[rlo, rhi)`, `theta` in `[tlo, thi)`, as exact binary values.
    pub fn polar(
        &mut self,
        ctx: &QContext,
        (rlo, rhi): (f64, f64),
        (tlo, thi): (f64, f64),
    ) -> Complex {
        let r = self.uniform(rlo, rhi);
        let t = self.uniform(tlo, thi);
        ctx.num(r * t.cos(), r * t.sin())
    }

    /// Free parameter with modulus in `bounds` and arbitrary argument.
    pub fn param(&mut self, ctx: &QContext, bounds: (f64, f64)) -> Complex {
        self.polar(ctx, bounds, (-PI, PI))
    }

    /// Modulus `|q|^t` with `t` uniform in `[tlo, thi)`, arbitrary argument.
    pub fn log_scaled(&mut self, ctx: &QContext, qmod: f64, (tlo, thi): (f64, f64)) -> Complex {
        let t = self.uniform(tlo, thi);
        let r = qmod.powf(t);
        self.polar(ctx, (r, r), (-PI, PI))
    }

    /// A context with `|q|` in the intersection of `cfg.q_range` and `limit`.
    pub fn context(&mut self, cfg: &SampleConfig, limit: (f64, f64)) -> Result<QContext> {
        let lo = cfg.q_range.0.max(limit.0);
        let hi = cfg.q_range.1.min(limit.1).max(lo);
        let r = self.uniform(lo, hi);
        let t = self.uniform(0.0, cfg.theta_max);
        QContext::from_parts(r * t.cos(), r * t.sin(), cfg.precision_bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = Sampler::new(7, "x", 3);
        let mut b = Sampler::new(7, "x", 3);
        let mut c = Sampler::new(7, "x", 4);
        let mut d = Sampler::new(7, "y", 3);
        let va = a.uniform(0.0, 1.0);
        assert_eq!(va, b.uniform(0.0, 1.0));
        assert_ne!(va, c.uniform(0.0, 1.0));
        assert_ne!(va, d.uniform(0.0, 1.0));
    }

    #[test]
    fn context_respects_bounds() {
        let cfg = SampleConfig::default();
        for trial in 0..50 {
            let mut s = Sampler::new(1, "q", trial);
            let ctx = s.context(&cfg, (0.0, 0.3)).unwrap();
            let m = crate::qcore::mag(ctx.q()).to_f64();
            assert!((0.1 - 1e-12..=0.3 + 1e-12).contains(&m));
        }
    }
}
