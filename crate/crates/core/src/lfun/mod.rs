//! Truncated Dirichlet polynomials for `(L'/L)^k(1/2 + ε, χ_D)`.
//!
//! For `Re s > 1`, `(L'/L)^k(s, χ) = (-1)^k Σ Λ_k(n) χ(n) n^{-s}`. At
//! `s = 1/2 + ε` the sum is cut sharply at a half-integer `λ`; the error is
//! tracked empirically by re-evaluating at `2λ + 1/2`.

mod cache;
mod sweep;
mod tables;

pub use cache::{read_sweep_file, write_sweep_csv, SweepHeader};
pub use sweep::{evaluate_family, evaluate_family_cached, evaluate_family_with, SweepOptions};
pub use tables::{von_mangoldt, ConvolutionOrder, LambdaTables, PrimePowers};

#[doc(hidden)]
pub use tables::lambda_k_by_divisors;

use crate::discriminant::FundamentalDiscriminant;
use crate::error::{Error, Result};
use crate::summation::NeumaierSum;

/// Largest cutoff the default policy will pick.
pub const LAMBDA_CAP: f64 = 1.0e7 + 0.5;

/// Default number of Λ_k levels kept in memory.
pub const DEFAULT_K_MAX: usize = 6;

/// Evaluation regime: `s = 1/2 + ε`, cutoff `λ ∈ Z + 1/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationParams {
    epsilon: f64,
    lambda: f64,
    consistency_tol: f64,
}

impl TruncationParams {
    pub fn new(epsilon: f64, lambda: f64, consistency_tol: f64) -> Result<Self> {
        validate_epsilon(epsilon)?;
        if lambda.is_nan() || lambda < 2.5 || lambda.fract() != 0.5 || lambda > 1e15 {
            return Err(Error::invalid(
                "lambda",
                format!("must be a half-integer >= 2.5, got {lambda}"),
            ));
        }
        if !consistency_tol.is_finite() || consistency_tol <= 0.0 {
            return Err(Error::invalid("consistency_tol", "must be a positive real"));
        }
        Ok(Self {
            epsilon,
            lambda,
            consistency_tol,
        })
    }

    /// Cutoff `λ` with the default tolerance for that cutoff.
    pub fn with_lambda(epsilon: f64, lambda: f64) -> Result<Self> {
        validate_epsilon(epsilon)?;
        Self::new(epsilon, lambda, default_consistency_tol(epsilon, lambda))
    }

    /// Default policy: `λ = ⌊N^0.6⌋ + 1/2`, at least 2.5, capped at `10^7 + 1/2`.
    pub fn for_family(bound: u64, epsilon: f64) -> Result<Self> {
        Self::with_lambda(epsilon, default_lambda(bound))
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Real part of the evaluation point.
    pub fn sigma(&self) -> f64 {
        0.5 + self.epsilon
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn consistency_tol(&self) -> f64 {
        self.consistency_tol
    }

    /// Cutoff of the audit evaluation, `2λ + 1/2`.
    pub fn audit_lambda(&self) -> f64 {
        2.0 * self.lambda + 0.5
    }

    /// Largest integer inside the sum.
    pub fn lambda_floor(&self) -> u64 {
        self.lambda.floor() as u64
    }
}

pub(crate) fn validate_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 0.5 {
        Ok(())
    } else {
        Err(Error::invalid(
            "epsilon",
            format!("must lie in (0, 1/2), got {epsilon}"),
        ))
    }
}

pub fn default_lambda(bound: u64) -> f64 {
    power_lambda(bound, 0.6)
}

/// `⌊N^a⌋ + 1/2`, clamped to `[2.5, LAMBDA_CAP]`.
fn power_lambda(bound: u64, exponent: f64) -> f64 {
    // the nudge keeps exact powers such as 10^5 ↦ 1000 from rounding down
    let raw = ((bound as f64).powf(exponent) * (1.0 + 1e-12)).floor() + 0.5;
    raw.clamp(2.5, LAMBDA_CAP)
}

/// How the cutoff `λ` is chosen for a family of size `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaPolicy {
    /// [`default_lambda`].
    Default,
    Fixed(f64),
    /// `⌊N^a⌋ + 1/2`.
    Power(f64),
}

impl LambdaPolicy {
    pub fn lambda_for(&self, bound: u64) -> f64 {
        match *self {
            LambdaPolicy::Default => default_lambda(bound),
            LambdaPolicy::Fixed(l) => l,
            LambdaPolicy::Power(a) => power_lambda(bound, a),
        }
    }

    pub fn params(&self, bound: u64, epsilon: f64) -> Result<TruncationParams> {
        if let LambdaPolicy::Power(a) = *self {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::invalid(
                    "lambda",
                    format!("exponent must be positive, got {a}"),
                ));
            }
        }
        TruncationParams::with_lambda(epsilon, self.lambda_for(bound))
    }
}

/// Six times the model's root-mean-square size of the block `λ < n <= 2λ + 1/2`,
/// `(∫ log x · x^{-1-2ε} dx)^{1/2}` over that range.
pub fn default_consistency_tol(epsilon: f64, lambda: f64) -> f64 {
    let a = 2.0 * epsilon;
    let antiderivative = |x: f64| -x.powf(-a) * (x.ln() / a + 1.0 / (a * a));
    let mass = antiderivative(2.0 * lambda + 0.5) - antiderivative(lambda);
    6.0 * mass.max(0.0).sqrt()
}

/// `(log N / log log N)^{1/2 - ε}`, the large-value level of the tail lemma.
pub fn large_value_threshold(bound: u64, epsilon: f64) -> Result<f64> {
    if bound < 3 {
        return Err(Error::invalid("N", "large-value threshold needs N >= 3"));
    }
    let l = (bound as f64).ln();
    Ok((l / l.ln()).powf(0.5 - epsilon))
}

/// One family member's evaluated `L'/L(1/2 + ε, χ_D)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDerivValue {
    pub discriminant: FundamentalDiscriminant,
    pub value: f64,
    pub lambda_used: f64,
    /// `|value(λ) - value(2λ + 1/2)|`; 0 when the entry was not audited.
    pub consistency_gap: f64,
    pub flagged: bool,
}

/// Repeated evaluation at a fixed `ε` up to a fixed cutoff.
#[derive(Debug, Clone)]
pub struct LogDerivEvaluator {
    sigma: f64,
    limit: u64,
    /// Prime powers with weights `Λ(q) q^{-s}`.
    weighted: Vec<(u64, f64)>,
    tables: Option<LambdaTables>,
}

impl LogDerivEvaluator {
    /// First power only, cutoff up to `limit`.
    pub fn new(epsilon: f64, limit: u64) -> Result<Self> {
        validate_epsilon(epsilon)?;
        let sigma = 0.5 + epsilon;
        let weighted = PrimePowers::new(limit)
            .entries()
            .iter()
            .map(|&(q, lp)| (q, lp * (q as f64).powf(-sigma)))
            .collect();
        Ok(Self {
            sigma,
            limit,
            weighted,
            tables: None,
        })
    }

    /// Also tabulates `Λ_k` for `k <= k_max` up to `limit`.
    pub fn with_powers(epsilon: f64, limit: u64, k_max: usize) -> Result<Self> {
        let mut ev = Self::new(epsilon, limit)?;
        ev.tables = Some(LambdaTables::new(limit, k_max)?);
        Ok(ev)
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    fn check_cutoff(&self, lambda: f64, limit: u64) -> Result<u64> {
        let floor = if lambda < 1.0 {
            0
        } else {
            lambda.floor() as u64
        };
        if floor > limit {
            return Err(Error::Cutoff {
                requested: floor,
                bound: limit,
            });
        }
        Ok(floor)
    }

    /// `-Σ_{n <= λ} Λ(n) χ_D(n) n^{-s}` with the Kronecker symbol evaluated
    /// directly.
    fn logderiv(&self, d: FundamentalDiscriminant, lambda: f64, limit: u64) -> Result<f64> {
        let floor = self.check_cutoff(lambda, limit)?;
        let mut acc = NeumaierSum::new();
        for &(q, w) in &self.weighted {
            if q > floor {
                break;
            }
            acc.add(d.chi(q) as f64 * w);
        }
        Ok(-acc.value())
    }

    /// `(-1)^k Σ_{n <= λ} Λ_k(n) χ_D(n) n^{-s}`.
    pub fn power(&self, d: FundamentalDiscriminant, k: usize, lambda: f64) -> Result<f64> {
        if k == 0 {
            return Err(Error::invalid("k", "must be positive"));
        }
        if k == 1 {
            return self.logderiv(d, lambda, self.limit);
        }
        let tables = self
            .tables
            .as_ref()
            .ok_or_else(|| Error::invalid("k", "evaluator was built without Λ_k tables"))?;
        let floor = self.check_cutoff(lambda, tables.limit())?;
        let level = tables.level(k)?;
        let mut acc = NeumaierSum::new();
        for n in 2..=floor {
            let l = level[n as usize];
            if l != 0.0 {
                let c = d.chi(n);
                if c != 0 {
                    acc.add(c as f64 * l * (n as f64).powf(-self.sigma));
                }
            }
        }
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(sign * acc.value())
    }
}

/// `(-1)^k Σ_{n <= λ} Λ_k(n) χ_D(n) / n^{1/2+ε}`; the `k = 1` case estimates
/// `L'/L(1/2 + ε, χ_D)`. Builds its own tables; use [`LogDerivEvaluator`]
/// for repeated calls.
pub fn truncated_logderiv_pow(
    d: FundamentalDiscriminant,
    k: usize,
    params: &TruncationParams,
) -> Result<f64> {
    let floor = params.lambda_floor();
    let ev = if k == 1 {
        LogDerivEvaluator::new(params.epsilon(), floor)?
    } else {
        LogDerivEvaluator::with_powers(params.epsilon(), floor, k)?
    };
    ev.power(d, k, params.lambda())
}

/// `E_N(1_{E^c} L^k)`: unflagged `value^k` summed, divided by the full count.
pub fn family_moment(k: u32, values: &[LogDerivValue]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("family values"));
    }
    let acc: NeumaierSum = values
        .iter()
        .filter(|v| !v.flagged)
        .map(|v| v.value.powi(k as i32))
        .collect();
    Ok(acc.value() / values.len() as f64)
}
