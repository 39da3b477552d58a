//! `φ(τ) = Π_p (1/(p+1) + p/(2(p+1)) [e^{-iτ log p/(p^s-1)} + e^{iτ log p/(p^s+1)}])`.
//!
//! The product is carried as a compensated sum of log-moduli and arguments
//! so that `|φ(τ)|` far below the smallest normal double stays meaningful.

use std::io::Write;

use num_complex::Complex64;

use super::{prime_tail_second_moment, ModelConfig};
use crate::arith::primes_up_to;
use crate::error::{Error, Result};
use crate::lfun::validate_epsilon;
use crate::summation::NeumaierSum;

#[derive(Debug, Clone, Copy)]
struct Factor {
    /// `p / (2(p+1))`
    weight: f64,
    /// `log p / (p^s - 1)`
    a: f64,
    /// `log p / (p^s + 1)`
    b: f64,
}

impl Factor {
    /// `f_p(τ) - 1` without cancellation, using
    /// `e^{iθ} - 1 = -2 sin²(θ/2) + i sin θ`.
    #[inline]
    fn minus_one(&self, tau: f64) -> (f64, f64) {
        let ta = tau * self.a;
        let tb = tau * self.b;
        let sa = (0.5 * ta).sin();
        let sb = (0.5 * tb).sin();
        let re = -2.0 * self.weight * (sa * sa + sb * sb);
        let im = self.weight * (tb.sin() - ta.sin());
        (re, im)
    }
}

/// `φ(τ)` in polar form with its truncation estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharFnValue {
    pub tau: f64,
    pub log_modulus: f64,
    pub argument: f64,
    /// Bound on `|log(Π_{p>P} f_p(τ))|`: `τ² Σ_{p>P} (log p)^2/p^{1+2ε}`.
    pub tail_estimate: f64,
    /// Largest `|f_p(τ)|` seen among the included factors.
    pub max_factor_modulus: f64,
}

impl CharFnValue {
    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(self.log_modulus.exp(), self.argument)
    }

    pub fn modulus(&self) -> f64 {
        self.log_modulus.exp()
    }
}

/// Truncated characteristic function, primes `p <= P`.
#[derive(Debug, Clone)]
pub struct CharFn {
    epsilon: f64,
    prime_cutoff: u64,
    factors: Vec<Factor>,
    tail_mass: f64,
}

impl CharFn {
    pub fn new(epsilon: f64, prime_cutoff: u64) -> Result<Self> {
        validate_epsilon(epsilon)?;
        if prime_cutoff < 2 {
            return Err(Error::invalid("prime_cutoff", "must be at least 2"));
        }
        let sigma = 0.5 + epsilon;
        let factors = primes_up_to(prime_cutoff)
            .into_iter()
            .map(|p| {
                let pf = p as f64;
                let ps = pf.powf(sigma);
                Factor {
                    weight: pf / (2.0 * (pf + 1.0)),
                    a: pf.ln() / (ps - 1.0),
                    b: pf.ln() / (ps + 1.0),
                }
            })
            .collect();
        Ok(Self {
            epsilon,
            prime_cutoff,
            factors,
            tail_mass: prime_tail_second_moment(epsilon, prime_cutoff),
        })
    }

    pub fn from_config(config: &ModelConfig) -> Result<Self> {
        Self::new(config.epsilon(), config.prime_cutoff())
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn prime_cutoff(&self) -> u64 {
        self.prime_cutoff
    }

    pub fn eval(&self, tau: f64) -> CharFnValue {
        let mut log_mod = NeumaierSum::new();
        let mut arg = NeumaierSum::new();
        let mut max_mod: f64 = 0.0;
        for f in &self.factors {
            let (re, im) = f.minus_one(tau);
            // |1 + z|^2 - 1 = 2 Re z + |z|^2
            let excess = 2.0 * re + re * re + im * im;
            log_mod.add(0.5 * excess.ln_1p());
            arg.add(im.atan2(1.0 + re));
            max_mod = max_mod.max((1.0 + excess).sqrt());
        }
        CharFnValue {
            tau,
            log_modulus: log_mod.value(),
            argument: arg.value(),
            tail_estimate: tau * tau * self.tail_mass,
            max_factor_modulus: max_mod,
        }
    }

    /// `log(-log |φ(τ)|)`, the quantity whose slope in `log τ` tracks the
    /// decay exponent.
    pub fn log_neg_log_modulus(&self, tau: f64) -> f64 {
        (-self.eval(tau).log_modulus).ln()
    }

    pub fn curve(&self, taus: &[f64]) -> CharFnCurve {
        CharFnCurve {
            epsilon: self.epsilon,
            prime_cutoff: self.prime_cutoff,
            points: taus
                .iter()
                .map(|&t| CharFnPoint::from(self.eval(t)))
                .collect(),
        }
    }
}

/// One-off evaluation of the truncated product at `τ`.
pub fn char_fn(tau: f64, epsilon: f64, prime_cutoff: u64) -> Result<CharFnValue> {
    Ok(CharFn::new(epsilon, prime_cutoff)?.eval(tau))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharFnPoint {
    pub tau: f64,
    pub value: Complex64,
    pub tail_estimate: f64,
}

impl From<CharFnValue> for CharFnPoint {
    fn from(v: CharFnValue) -> Self {
        Self {
            tau: v.tau,
            value: v.value(),
            tail_estimate: v.tail_estimate,
        }
    }
}

/// Sampled `φ` values, exported as CSV `tau,re,im,tailEstimate`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharFnCurve {
    pub epsilon: f64,
    pub prime_cutoff: u64,
    pub points: Vec<CharFnPoint>,
}

impl CharFnCurve {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "tau,re,im,tailEstimate")?;
        for p in &self.points {
            writeln!(
                w,
                "{},{},{},{}",
                p.tau, p.value.re, p.value.im, p.tail_estimate
            )?;
        }
        w.flush()?;
        Ok(())
    }
}
