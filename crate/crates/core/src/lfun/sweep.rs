//! Family sweeps: one `L'/L` value per discriminant, with audit and flags.

use std::path::Path;

use rayon::prelude::*;

use super::{large_value_threshold, LogDerivValue, TruncationParams};
use crate::arith::{primes_up_to, FactorSieve};
use crate::discriminant::{
    enumerate_family, kronecker, CharacterTable, FamilySlice, FundamentalDiscriminant,
};
use crate::error::{Error, Result};
use crate::summation::NeumaierSum;

/// Flagging knobs for a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// Share of members re-evaluated at `2λ + 1/2` (every `round(1/f)`-th
    /// member by family index). Zero disables the audit.
    pub audit_fraction: f64,
    /// Multiplier on `(log N / log log N)^{1/2-ε}` for the large-value flag.
    pub large_value_scale: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            audit_fraction: 0.01,
            large_value_scale: 6.0,
        }
    }
}

impl SweepOptions {
    fn audit_stride(&self) -> Result<Option<usize>> {
        if !(0.0..=1.0).contains(&self.audit_fraction) {
            return Err(Error::invalid("audit_fraction", "must lie in [0, 1]"));
        }
        if self.large_value_scale.is_nan() || self.large_value_scale <= 0.0 {
            return Err(Error::invalid("large_value_scale", "must be positive"));
        }
        if self.audit_fraction == 0.0 {
            return Ok(None);
        }
        Ok(Some((1.0 / self.audit_fraction).round().max(1.0) as usize))
    }
}

/// A member's character is read from a full-period table when the period is
/// at most this many times the number of primes needed, and from one
/// Kronecker symbol per prime otherwise.
const TABLE_FACTOR: u64 = 4;

/// Immutable tables shared by every worker of one sweep.
pub(super) struct SweepContext {
    params: TruncationParams,
    threshold: f64,
    audit_stride: Option<usize>,
    /// Covers every modulus that takes the table route.
    sieve: FactorSieve,
    /// Primes up to the audit cutoff.
    primes: Vec<u64>,
    main_primes: usize,
    /// Prime powers `q` up to the audit cutoff, ascending, with weights
    /// `Λ(q) q^{-s}`, the index of their base prime and the parity of the
    /// exponent.
    weights: Vec<f64>,
    base: Vec<u32>,
    odd: Vec<bool>,
    main_len: usize,
}

impl SweepContext {
    pub(super) fn new(
        family: &FamilySlice,
        params: &TruncationParams,
        options: &SweepOptions,
    ) -> Result<Self> {
        let bound = family.bound();
        if bound < 3 {
            return Err(Error::invalid("N", "family sweeps need N >= 3"));
        }
        let audit_stride = options.audit_stride()?;
        let threshold = options.large_value_scale * large_value_threshold(bound, params.epsilon())?;
        let audit_limit = params.audit_lambda().floor() as u64;
        let sigma = params.sigma();
        let primes = primes_up_to(audit_limit);
        let main_primes = primes.partition_point(|&p| (p as f64) <= params.lambda());
        // (q, prime index, odd exponent), sorted by q
        let mut powers: Vec<(u64, u32, bool)> = Vec::new();
        for (i, &p) in primes.iter().enumerate() {
            let mut q = p;
            let mut odd = true;
            loop {
                powers.push((q, i as u32, odd));
                match q.checked_mul(p) {
                    Some(next) if next <= audit_limit => q = next,
                    _ => break,
                }
                odd = !odd;
            }
        }
        powers.sort_unstable_by_key(|e| e.0);
        let main_len = powers.partition_point(|e| (e.0 as f64) <= params.lambda());
        let weights = powers
            .iter()
            .map(|&(q, i, _)| (primes[i as usize] as f64).ln() * (q as f64).powf(-sigma))
            .collect();
        let base = powers.iter().map(|e| e.1).collect();
        let odd = powers.iter().map(|e| e.2).collect();
        let table_cap = TABLE_FACTOR * primes.len() as u64;
        let max_modulus = family
            .members()
            .iter()
            .map(|d| d.modulus())
            .filter(|&m| m <= table_cap)
            .max()
            .unwrap_or(1);
        Ok(Self {
            params: *params,
            threshold,
            audit_stride,
            sieve: FactorSieve::new(max_modulus.max(2)),
            primes,
            main_primes,
            weights,
            base,
            odd,
            main_len,
        })
    }

    fn fill_chi(
        &self,
        d: FundamentalDiscriminant,
        table: Option<&CharacterTable>,
        range: std::ops::Range<usize>,
        chi: &mut [i8],
    ) {
        for i in range {
            let p = self.primes[i];
            chi[i] = match table {
                Some(t) => t.at(p),
                None => kronecker(d.get(), p),
            };
        }
    }

    /// `Σ χ(q) w_q` over prime-power entries `range`.
    #[inline]
    fn accumulate(&self, chi: &[i8], range: std::ops::Range<usize>) -> f64 {
        let mut acc = NeumaierSum::new();
        for i in range {
            let c = chi[self.base[i] as usize];
            if c != 0 {
                let c = if c < 0 && !self.odd[i] { 1 } else { c };
                acc.add(c as f64 * self.weights[i]);
            }
        }
        acc.value()
    }

    pub(super) fn evaluate(
        &self,
        index: usize,
        d: FundamentalDiscriminant,
        chi: &mut Vec<i8>,
    ) -> LogDerivValue {
        chi.resize(self.primes.len(), 0);
        let table = (d.modulus() <= TABLE_FACTOR * self.primes.len() as u64)
            .then(|| CharacterTable::new(d, &self.sieve));
        self.fill_chi(d, table.as_ref(), 0..self.main_primes, chi);
        let value = -self.accumulate(chi, 0..self.main_len);
        let large = value.abs() >= self.threshold;
        let audited = self.audit_stride.is_some_and(|s| index.is_multiple_of(s));
        let consistency_gap = if audited || large {
            self.fill_chi(d, table.as_ref(), self.main_primes..self.primes.len(), chi);
            self.accumulate(chi, self.main_len..self.weights.len())
                .abs()
        } else {
            0.0
        };
        LogDerivValue {
            discriminant: d,
            value,
            lambda_used: self.params.lambda(),
            consistency_gap,
            flagged: large || consistency_gap > self.params.consistency_tol(),
        }
    }

    pub(super) fn evaluate_span(
        &self,
        members: &[FundamentalDiscriminant],
        offset: usize,
    ) -> Vec<LogDerivValue> {
        members
            .par_iter()
            .enumerate()
            .map_init(Vec::new, |chi, (i, &d)| self.evaluate(offset + i, d, chi))
            .collect()
    }
}

/// Sweeps the default family `F(N)` with default options.
pub fn evaluate_family(bound: u64, params: &TruncationParams) -> Result<Vec<LogDerivValue>> {
    let family = enumerate_family(bound)?;
    evaluate_family_with(&family, params, &SweepOptions::default())
}

/// One value per member of `family`, in family order.
pub fn evaluate_family_with(
    family: &FamilySlice,
    params: &TruncationParams,
    options: &SweepOptions,
) -> Result<Vec<LogDerivValue>> {
    let ctx = SweepContext::new(family, params, options)?;
    Ok(ctx.evaluate_span(family.members(), 0))
}

/// As [`evaluate_family_with`], persisting progress to `path` in chunks so
/// an interrupted sweep resumes where it stopped.
pub fn evaluate_family_cached(
    family: &FamilySlice,
    params: &TruncationParams,
    options: &SweepOptions,
    path: &Path,
) -> Result<Vec<LogDerivValue>> {
    const CHUNK: usize = 4096;
    let ctx = SweepContext::new(family, params, options)?;
    let mut cache = super::cache::SweepCache::open(path, family, params)?;
    let mut values = cache.take_completed();
    let members = family.members();
    while values.len() < members.len() {
        let start = values.len();
        let end = (start + CHUNK).min(members.len());
        let chunk = ctx.evaluate_span(&members[start..end], start);
        cache.append(&chunk)?;
        values.extend(chunk);
    }
    Ok(values)
}
