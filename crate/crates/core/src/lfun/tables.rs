//! Dense tables of the von Mangoldt function and its Dirichlet powers.

use crate::arith::{factorize, FactorSieve};
use crate::error::{Error, Result};

/// `log p` if `n = p^j` with `j >= 1`, else 0.
pub fn von_mangoldt(n: u64) -> f64 {
    match factorize(n).as_slice() {
        [(p, _)] => (*p as f64).ln(),
        _ => 0.0,
    }
}

/// Prime powers `q <= limit` in ascending order with `Λ(q) = log p`.
#[derive(Debug, Clone)]
pub struct PrimePowers {
    limit: u64,
    entries: Vec<(u64, f64)>,
}

impl PrimePowers {
    pub fn new(limit: u64) -> Self {
        let mut entries: Vec<(u64, f64)> = Vec::new();
        for p in crate::arith::primes_up_to(limit) {
            let lp = (p as f64).ln();
            let mut q = p;
            loop {
                entries.push((q, lp));
                match q.checked_mul(p) {
                    Some(next) if next <= limit => q = next,
                    _ => break,
                }
            }
        }
        entries.sort_unstable_by_key(|e| e.0);
        Self { limit, entries }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn entries(&self) -> &[(u64, f64)] {
        &self.entries
    }

    /// Number of entries with `q <= x`.
    pub fn count_up_to(&self, x: f64) -> usize {
        self.entries.partition_point(|&(q, _)| (q as f64) <= x)
    }
}

/// `Λ_1, …, Λ_{k_max}` tabulated on `[0, limit]`.
///
/// `Λ_k = Λ_{k-1} * Λ` is built by striking every multiple of every prime
/// power, so the cost per level is about `limit · log log limit`.
#[derive(Debug, Clone)]
pub struct LambdaTables {
    limit: u64,
    levels: Vec<Vec<f64>>,
}

/// Which side the new factor of Λ is convolved on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvolutionOrder {
    /// `Λ_{k-1} * Λ`: outer loop over the cofactor of `Λ_{k-1}`.
    PreviousFirst,
    /// `Λ * Λ_{k-1}`: outer loop over the prime power.
    LambdaFirst,
}

impl LambdaTables {
    pub fn new(limit: u64, k_max: usize) -> Result<Self> {
        Self::with_order(limit, k_max, ConvolutionOrder::PreviousFirst)
    }

    pub fn with_order(limit: u64, k_max: usize, order: ConvolutionOrder) -> Result<Self> {
        if k_max == 0 {
            return Err(Error::invalid("k_max", "must be at least 1"));
        }
        if limit > 100_000_000 {
            return Err(Error::ResourceLimit(format!(
                "Λ_k tables up to {limit} exceed the dense-table cap of 10^8"
            )));
        }
        let pp = PrimePowers::new(limit);
        let len = limit as usize + 1;
        let mut base = vec![0.0; len];
        for &(q, lp) in pp.entries() {
            base[q as usize] = lp;
        }
        let mut levels = vec![base];
        for _ in 1..k_max {
            let prev = levels.last().expect("non-empty");
            let next = match order {
                ConvolutionOrder::PreviousFirst => convolve_previous_first(prev, &pp),
                ConvolutionOrder::LambdaFirst => convolve_lambda_first(prev, &pp),
            };
            levels.push(next);
        }
        Ok(Self { limit, levels })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn k_max(&self) -> usize {
        self.levels.len()
    }

    /// Dense values of `Λ_k` on `[0, limit]`.
    pub fn level(&self, k: usize) -> Result<&[f64]> {
        if k == 0 || k > self.levels.len() {
            return Err(Error::invalid(
                "k",
                format!("must lie in 1..={}, got {k}", self.levels.len()),
            ));
        }
        Ok(&self.levels[k - 1])
    }

    pub fn lambda_k(&self, n: u64, k: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::invalid("n", "must be positive"));
        }
        if n > self.limit {
            return Err(Error::Cutoff {
                requested: n,
                bound: self.limit,
            });
        }
        Ok(self.level(k)?[n as usize])
    }
}

fn convolve_previous_first(prev: &[f64], pp: &PrimePowers) -> Vec<f64> {
    let limit = (prev.len() - 1) as u64;
    let mut out = vec![0.0; prev.len()];
    for m in 1..=limit {
        let a = prev[m as usize];
        if a == 0.0 {
            continue;
        }
        let max_q = limit / m;
        for &(q, lq) in pp.entries() {
            if q > max_q {
                break;
            }
            out[(m * q) as usize] += a * lq;
        }
    }
    out
}

fn convolve_lambda_first(prev: &[f64], pp: &PrimePowers) -> Vec<f64> {
    let limit = (prev.len() - 1) as u64;
    let mut out = vec![0.0; prev.len()];
    for &(q, lq) in pp.entries() {
        let max_m = limit / q;
        for m in 1..=max_m {
            let a = prev[m as usize];
            if a != 0.0 {
                out[(m * q) as usize] += lq * a;
            }
        }
    }
    out
}

/// Reference `Λ_k(n)` by recursion over divisors; test oracle only.
#[doc(hidden)]
pub fn lambda_k_by_divisors(n: u64, k: usize, sieve: &FactorSieve) -> f64 {
    if k == 1 {
        return sieve.prime_power_base(n).map_or(0.0, |p| (p as f64).ln());
    }
    let mut total = 0.0;
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            for e in [d, n / d] {
                if let Some(p) = sieve.prime_power_base(e) {
                    total += (p as f64).ln() * lambda_k_by_divisors(n / e, k - 1, sieve);
                }
                if d * d == n {
                    break;
                }
            }
        }
        d += 1;
    }
    total
}
