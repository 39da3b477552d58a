//! The random model: independent `X_p` with
//! `P(X_p = ±1) = p / (2(p+1))`, `P(X_p = 0) = 1/(p+1)`, and the random
//! Euler product `L_ε = Σ_p (log p) X_p / (p^{1/2+ε} - X_p)`.
//!
//! `L_ε` is written with the sign of the Dirichlet series `Σ Λ(n) X_n n^{-s}`.
//! The family values are `L'/L = -Σ Λ(n) χ_D(n) n^{-s}`, so the model of a
//! family value is `-L_ε`; [`char_fn`] is the characteristic function of
//! `-L_ε`.

mod charfn;
mod moments;
mod sampling;

pub use charfn::{char_fn, CharFn, CharFnCurve, CharFnPoint, CharFnValue};
pub use moments::{
    exact_first_moment, exact_moment, exact_moment_truncated, neglected_moment_bound,
    ModelTruncation,
};
pub use sampling::{mc_moment, sample_l, EulerSampler, ModelSampleBatch, MomentEstimate};

use crate::arith::{factorize, is_prime};
use crate::error::{Error, Result};
use crate::lfun::validate_epsilon;

/// Default prime cutoff `P`.
pub const DEFAULT_PRIME_CUTOFF: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    epsilon: f64,
    prime_cutoff: u64,
    seed: u64,
}

impl ModelConfig {
    pub fn new(epsilon: f64, prime_cutoff: u64, seed: u64) -> Result<Self> {
        validate_epsilon(epsilon)?;
        if prime_cutoff < 2 {
            return Err(Error::invalid("prime_cutoff", "must be at least 2"));
        }
        Ok(Self {
            epsilon,
            prime_cutoff,
            seed,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn sigma(&self) -> f64 {
        0.5 + self.epsilon
    }

    pub fn prime_cutoff(&self) -> u64 {
        self.prime_cutoff
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// Law of `X_p` as exact rationals over the common denominator `2(p+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct XpLaw {
    pub p: u64,
    /// Numerators of `P(-1), P(0), P(+1)`.
    pub numerators: [u64; 3],
    pub denominator: u64,
}

impl XpLaw {
    pub fn probabilities(&self) -> (f64, f64, f64) {
        let d = self.denominator as f64;
        let [a, b, c] = self.numerators;
        (a as f64 / d, b as f64 / d, c as f64 / d)
    }

    /// Inverse-CDF cut points on 64-bit words: `u < t[0]` gives -1,
    /// `u < t[1]` gives 0, anything else +1. `t[i] = ⌊2^64 · F_i⌋` exactly.
    pub fn thresholds(&self) -> [u64; 2] {
        let d = self.denominator as u128;
        let [a, b, _] = self.numerators;
        let cut = |num: u64| (((num as u128) << 64) / d) as u64;
        [cut(a), cut(a + b)]
    }

    #[inline]
    pub fn draw(thresholds: [u64; 2], u: u64) -> i8 {
        if u < thresholds[0] {
            -1
        } else if u < thresholds[1] {
            0
        } else {
            1
        }
    }
}

/// `(P(X_p = -1), P(X_p = 0), P(X_p = +1))` for a prime `p`.
pub fn xp_distribution(p: u64) -> Result<XpLaw> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    Ok(law_unchecked(p))
}

pub(crate) fn law_unchecked(p: u64) -> XpLaw {
    XpLaw {
        p,
        numerators: [p, 2, p],
        denominator: 2 * (p + 1),
    }
}

/// `E(X_n)`: `Π_{p|n} p/(p+1)` for squares, 0 otherwise.
pub fn expected_xn(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n", "must be positive"));
    }
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e % 2 == 1) {
        return Ok(0.0);
    }
    Ok(f.iter()
        .map(|&(p, _)| p as f64 / (p as f64 + 1.0))
        .product())
}

/// `Σ_{p > P} (log p)^2 / p^{1+2ε}` by comparison with
/// `∫_P^∞ log x · x^{-1-2ε} dx`.
pub fn prime_tail_second_moment(epsilon: f64, prime_cutoff: u64) -> f64 {
    let a = 2.0 * epsilon;
    let p = prime_cutoff as f64;
    p.powf(-a) * (p.ln() / a + 1.0 / (a * a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::primes_up_to;
    use crate::rng::SampleStream;

    #[test]
    fn law_examples() {
        assert_eq!(
            xp_distribution(2).unwrap().probabilities(),
            (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
        );
        let (a, b, c) = xp_distribution(3).unwrap().probabilities();
        assert_eq!((a, b, c), (0.375, 0.25, 0.375));
        assert!(matches!(xp_distribution(9), Err(Error::NotPrime(9))));
        assert!(xp_distribution(1).is_err());
    }

    #[test]
    fn law_normalized_exactly() {
        for p in primes_up_to(100_000) {
            let l = xp_distribution(p).unwrap();
            assert_eq!(l.numerators.iter().sum::<u64>(), l.denominator);
            assert_eq!(l.numerators[0], l.numerators[2]);
        }
    }

    #[test]
    fn thresholds_are_exact_floors() {
        let t = xp_distribution(2).unwrap().thresholds();
        // 2^64 / 3 and 2 * 2^64 / 3
        assert_eq!(t[0], 6_148_914_691_236_517_205);
        assert_eq!(t[1], 12_297_829_382_473_034_410);
        let t = xp_distribution(3).unwrap().thresholds();
        assert_eq!(t[0], 3u64 << 61);
        assert_eq!(t[1], 5u64 << 61);
    }

    #[test]
    fn orthogonality_values() {
        assert_eq!(expected_xn(9).unwrap(), 0.75);
        assert!((expected_xn(36).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(expected_xn(2).unwrap(), 0.0);
        assert_eq!(expected_xn(1).unwrap(), 1.0);
        assert_eq!(expected_xn(12).unwrap(), 0.0);
        assert!(expected_xn(0).is_err());
    }

    #[test]
    fn orthogonality_realized_by_sampler() {
        let draws = 1_000_000u64;
        let t2 = law_unchecked(2).thresholds();
        let t3 = law_unchecked(3).thresholds();
        for n in [2u64, 3, 4, 9, 12, 36] {
            let f = factorize(n);
            let mut sum = 0i64;
            let mut sum_sq = 0i64;
            for i in 0..draws {
                let s = SampleStream::new(7, i);
                let x2 = XpLaw::draw(t2, s.word(0)) as i64;
                let x3 = XpLaw::draw(t3, s.word(1)) as i64;
                let x: i64 = f
                    .iter()
                    .map(|&(p, e)| if p == 2 { x2 } else { x3 }.pow(e))
                    .product();
                sum += x;
                sum_sq += x * x;
            }
            let mean = sum as f64 / draws as f64;
            let var = sum_sq as f64 / draws as f64 - mean * mean;
            let se = (var / draws as f64).sqrt();
            let want = expected_xn(n).unwrap();
            assert!(
                (mean - want).abs() <= 4.0 * se,
                "n={n}: {mean} vs {want} (se {se})"
            );
        }
    }

    #[test]
    fn series_forms_agree() {
        // Σ_{n: p|n ⇒ p<=50} Λ(n) x_n n^{-s} against Σ_p (log p) x_p / (p^s - x_p)
        let s = 0.75;
        let primes = primes_up_to(50);
        for trial in 0..10u64 {
            let stream = SampleStream::new(trial, 0);
            let xs: Vec<i64> = (0..primes.len())
                .map(|j| (stream.word(j as u64) % 3) as i64 - 1)
                .collect();
            let mut dirichlet = 0.0;
            let mut euler = 0.0;
            for (&p, &x) in primes.iter().zip(&xs) {
                let lp = (p as f64).ln();
                euler += lp * x as f64 / ((p as f64).powf(s) - x as f64);
                let mut q = p;
                let mut xq = x;
                while q <= 1_000_000 {
                    dirichlet += lp * xq as f64 / (q as f64).powf(s);
                    q *= p;
                    xq *= x;
                }
            }
            assert!((dirichlet - euler).abs() < 1e-3, "{dirichlet} vs {euler}");
        }
    }

    #[test]
    fn config_validation() {
        assert!(ModelConfig::new(0.25, 2, 0).is_ok());
        assert!(ModelConfig::new(0.25, 1, 0).is_err());
        assert!(ModelConfig::new(0.6, 100, 0).is_err());
        assert_eq!(
            ModelConfig::new(0.25, 10, 1).unwrap().with_seed(9).seed(),
            9
        );
    }

    #[test]
    fn tail_second_moment_shrinks() {
        let a = prime_tail_second_moment(0.25, 1000);
        let b = prime_tail_second_moment(0.25, 100_000);
        assert!(a > b && b > 0.0);
    }
}
