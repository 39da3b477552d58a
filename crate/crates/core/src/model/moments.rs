//! Exact moments of truncated model sums.
//!
//! Both truncations split into independent per-prime pieces `S_p` that take
//! three values, so `E[(Σ_p S_p)^k]` is obtained by folding the moment
//! sequences of the `S_p` with binomial weights.

use crate::arith::primes_up_to;
use crate::error::{Error, Result};
use crate::lfun::validate_epsilon;
use crate::summation::NeumaierSum;

/// Largest `k` accepted by the exact moment routines.
pub const MAX_EXACT_K: u32 = 32;
/// Largest cutoff accepted by the exact moment routines.
pub const MAX_EXACT_CUTOFF: f64 = 1.0e8;

/// How the random series is truncated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelTruncation {
    /// `Σ_{n <= λ} Λ(n) X_n n^{-s}`, matching a family sweep at cutoff `λ`.
    Dirichlet { lambda: f64 },
    /// `Σ_{p <= P} (log p) X_p / (p^s - X_p)`.
    Euler { prime_cutoff: u64 },
}

/// `Σ_{p <= P} (log p) · p/(p+1) / (p^{1+2ε} - 1)`, the mean of the
/// truncated Euler form.
pub fn exact_first_moment(epsilon: f64, prime_cutoff: u64) -> Result<f64> {
    validate_epsilon(epsilon)?;
    let e = 1.0 + 2.0 * epsilon;
    Ok(primes_up_to(prime_cutoff)
        .into_iter()
        .map(|p| {
            let pf = p as f64;
            pf.ln() * (pf / (pf + 1.0)) / (pf.powf(e) - 1.0)
        })
        .collect::<NeumaierSum>()
        .value())
}

/// `E[(Σ_{n <= λ} Λ(n) X_n / n^{1/2+ε})^k]`.
pub fn exact_moment(k: u32, epsilon: f64, lambda: f64) -> Result<f64> {
    exact_moment_truncated(k, epsilon, ModelTruncation::Dirichlet { lambda })
}

/// `E[S^k]` for the truncated sum `S` described by `truncation`.
pub fn exact_moment_truncated(k: u32, epsilon: f64, truncation: ModelTruncation) -> Result<f64> {
    validate_epsilon(epsilon)?;
    if k == 0 {
        return Err(Error::invalid("k", "must be positive"));
    }
    if k > MAX_EXACT_K {
        return Err(Error::Infeasible(format!(
            "exact moments are limited to k <= {MAX_EXACT_K}"
        )));
    }
    let sigma = 0.5 + epsilon;
    let pieces = match truncation {
        ModelTruncation::Dirichlet { lambda } => {
            if lambda.is_nan() || lambda > MAX_EXACT_CUTOFF {
                return Err(Error::Infeasible(format!(
                    "cutoff {lambda} exceeds {MAX_EXACT_CUTOFF}"
                )));
            }
            dirichlet_pieces(sigma, lambda)
        }
        ModelTruncation::Euler { prime_cutoff } => {
            if prime_cutoff as f64 > MAX_EXACT_CUTOFF {
                return Err(Error::Infeasible(format!(
                    "prime cutoff {prime_cutoff} exceeds {MAX_EXACT_CUTOFF}"
                )));
            }
            euler_pieces(sigma, prime_cutoff)
        }
    };
    Ok(fold_moments(k as usize, &pieces)[k as usize])
}

/// The neglected-tail size `(2 log λ)^k / λ^{1+2ε}` for `E(Σ_{n>λ} Λ_k(n) X_n n^{-s})`.
pub fn neglected_moment_bound(k: u32, epsilon: f64, lambda: f64) -> f64 {
    (2.0 * lambda.ln()).powi(k as i32) / lambda.powf(1.0 + 2.0 * epsilon)
}

/// One prime's contribution: `0` with probability `1/(p+1)`, otherwise
/// `plus` or `minus` with probability `p/(2(p+1))` each.
#[derive(Debug, Clone, Copy)]
struct Piece {
    p: f64,
    plus: f64,
    minus: f64,
}

fn dirichlet_pieces(sigma: f64, lambda: f64) -> Vec<Piece> {
    let floor = if lambda < 2.0 {
        1
    } else {
        lambda.floor() as u64
    };
    primes_up_to(floor)
        .into_iter()
        .map(|p| {
            let lp = (p as f64).ln();
            // X_p^a is X_p for odd a and X_p^2 for even a
            let (mut odd, mut even) = (NeumaierSum::new(), NeumaierSum::new());
            let mut q = p;
            let mut a = 1;
            loop {
                let w = lp * (q as f64).powf(-sigma);
                if a % 2 == 1 {
                    odd.add(w);
                } else {
                    even.add(w);
                }
                match q.checked_mul(p) {
                    Some(next) if next <= floor => q = next,
                    _ => break,
                }
                a += 1;
            }
            let (o, e) = (odd.value(), even.value());
            Piece {
                p: p as f64,
                plus: e + o,
                minus: e - o,
            }
        })
        .collect()
}

fn euler_pieces(sigma: f64, prime_cutoff: u64) -> Vec<Piece> {
    primes_up_to(prime_cutoff)
        .into_iter()
        .map(|p| {
            let pf = p as f64;
            let lp = pf.ln();
            let ps = pf.powf(sigma);
            Piece {
                p: pf,
                plus: lp / (ps - 1.0),
                minus: -lp / (ps + 1.0),
            }
        })
        .collect()
}

/// Raw moments `E[S^0..=S^k]` of the sum of independent pieces.
fn fold_moments(k: usize, pieces: &[Piece]) -> Vec<f64> {
    let binom = binomial_rows(k);
    let mut acc = vec![0.0; k + 1];
    acc[0] = 1.0;
    let mut piece_moments = vec![0.0; k + 1];
    let mut next = vec![0.0; k + 1];
    for piece in pieces {
        let c = piece.p / (2.0 * (piece.p + 1.0));
        piece_moments[0] = 1.0;
        let (mut pp, mut pm) = (1.0, 1.0);
        for m in piece_moments.iter_mut().skip(1) {
            pp *= piece.plus;
            pm *= piece.minus;
            *m = c * (pp + pm);
        }
        for j in 0..=k {
            let mut s = NeumaierSum::new();
            for i in 0..=j {
                s.add(binom[j][i] * acc[i] * piece_moments[j - i]);
            }
            next[j] = s.value();
        }
        std::mem::swap(&mut acc, &mut next);
    }
    acc
}

fn binomial_rows(k: usize) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![1.0]];
    for n in 1..=k {
        let prev = &rows[n - 1];
        let mut row = vec![1.0; n + 1];
        for i in 1..n {
            row[i] = prev[i - 1] + prev[i];
        }
        rows.push(row);
    }
    rows
}
