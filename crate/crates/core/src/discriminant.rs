//! Fundamental discriminants, their real characters, and family averages.

use std::fmt;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::arith::{is_squarefree, squarefree_flags, FactorSieve};
use crate::error::{Error, Result};

/// Kronecker symbol `(a/n)` for `n >= 0`.
///
/// `(a/0)` is 1 when `|a| = 1` and 0 otherwise. The factor `(a/2)` is 0 for
/// even `a`, +1 for `a = ±1 (mod 8)` and -1 for `a = ±3 (mod 8)`; the odd
/// part is a Jacobi symbol reduced with reciprocity.
pub fn kronecker(a: i64, n: u64) -> i8 {
    if n == 0 {
        return (a == 1 || a == -1) as i8;
    }
    let mut k: i8 = 1;
    let tz = n.trailing_zeros();
    let mut n = n >> tz;
    if tz > 0 {
        if a & 1 == 0 {
            return 0;
        }
        if tz & 1 == 1 && matches!(a & 7, 3 | 5) {
            k = -k;
        }
    }
    if a < 0 && n & 3 == 3 {
        k = -k;
    }
    let mut a = a.unsigned_abs() % n;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz & 1 == 1 && matches!(n & 7, 3 | 5) {
            k = -k;
        }
        if a & 3 == 3 && n & 3 == 3 {
            k = -k;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        k
    } else {
        0
    }
}

/// True iff `d` is a fundamental discriminant (1 included).
pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 0 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => is_squarefree(d.unsigned_abs()),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}

/// A validated fundamental discriminant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FundamentalDiscriminant(i64);

impl FundamentalDiscriminant {
    pub fn new(d: i64) -> Result<Self> {
        if is_fundamental_discriminant(d) {
            Ok(Self(d))
        } else {
            Err(Error::invalid(
                "discriminant",
                format!("{d} is not a fundamental discriminant"),
            ))
        }
    }

    /// Skips validation; callers must already know `d` is fundamental.
    pub(crate) const fn new_unchecked(d: i64) -> Self {
        Self(d)
    }

    pub const fn get(self) -> i64 {
        self.0
    }

    pub const fn signum(self) -> i64 {
        self.0.signum()
    }

    /// Conductor `|d|`, the period of `n -> chi_d(n)`.
    pub const fn modulus(self) -> u64 {
        self.0.unsigned_abs()
    }

    #[inline]
    pub fn chi(self, n: u64) -> i8 {
        kronecker(self.0, n)
    }
}

impl fmt::Display for FundamentalDiscriminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One full period of `chi_d`, built multiplicatively from a factor sieve.
#[derive(Debug, Clone)]
pub struct CharacterTable {
    values: Vec<i8>,
}

impl CharacterTable {
    /// `sieve` must cover `d.modulus() - 1`.
    pub fn new(d: FundamentalDiscriminant, sieve: &FactorSieve) -> Self {
        let m = d.modulus() as usize;
        debug_assert!(m <= 1 || sieve.limit() as usize >= m - 1);
        let mut values = vec![0i8; m];
        values[0] = d.chi(0);
        if m > 1 {
            values[1] = 1;
        }
        for r in 2..m {
            let p = sieve.smallest_factor(r as u64) as usize;
            values[r] = if p == r {
                d.chi(p as u64)
            } else {
                values[p] * values[r / p]
            };
        }
        Self { values }
    }

    pub fn period(&self) -> u64 {
        self.values.len() as u64
    }

    #[inline]
    pub fn at(&self, n: u64) -> i8 {
        self.values[(n % self.values.len() as u64) as usize]
    }

    /// Value at residue `r < period`.
    #[inline]
    pub fn at_residue(&self, r: usize) -> i8 {
        self.values[r]
    }
}

/// Enumeration options for [`FamilySlice`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FamilyOptions {
    pub include_d1: bool,
    /// Upper bound on bytes held by the sieve and the member list.
    pub memory_budget: u64,
}

impl Default for FamilyOptions {
    fn default() -> Self {
        Self {
            include_d1: true,
            memory_budget: 1 << 30,
        }
    }
}

/// Every fundamental discriminant with `|d| <= bound`, sorted by `(|d|, d)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilySlice {
    bound: u64,
    members: Vec<FundamentalDiscriminant>,
}

impl FamilySlice {
    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn members(&self) -> &[FundamentalDiscriminant] {
        &self.members
    }

    pub fn count(&self) -> usize {
        self.members.len()
    }

    /// Exact mean of `chi_D(n)` over the slice.
    pub fn character_average(&self, n: u64) -> f64 {
        if self.members.is_empty() {
            return 0.0;
        }
        let total: i64 = self.members.par_iter().map(|d| d.chi(n) as i64).sum();
        total as f64 / self.members.len() as f64
    }

    /// Plain-text cache: `N=<N> count=<count>` then one discriminant per line.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "N={} count={}", self.bound, self.members.len())?;
        for d in &self.members {
            writeln!(w, "{d}")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::format("family file", "missing header"))??;
        let (bound, count) = parse_family_header(&header)?;
        let mut members = Vec::with_capacity(count);
        for line in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let d: i64 = line
                .parse()
                .map_err(|_| Error::format("family file", format!("bad entry `{line}`")))?;
            let d = FundamentalDiscriminant::new(d)
                .map_err(|_| Error::format("family file", format!("{d} is not fundamental")))?;
            if d.modulus() > bound {
                return Err(Error::format(
                    "family file",
                    format!("{d} exceeds N={bound}"),
                ));
            }
            members.push(d);
        }
        if members.len() != count {
            return Err(Error::format(
                "family file",
                format!("header says {count} entries, found {}", members.len()),
            ));
        }
        Ok(Self { bound, members })
    }
}

fn parse_family_header(header: &str) -> Result<(u64, usize)> {
    let mut bound = None;
    let mut count = None;
    for field in header.split_whitespace() {
        match field.split_once('=') {
            Some(("N", v)) => bound = v.parse().ok(),
            Some(("count", v)) => count = v.parse().ok(),
            _ => {}
        }
    }
    match (bound, count) {
        (Some(b), Some(c)) => Ok((b, c)),
        _ => Err(Error::format("family header", header.to_string())),
    }
}

/// [`enumerate_family_with`] under default options (D = 1 included).
pub fn enumerate_family(bound: u64) -> Result<FamilySlice> {
    enumerate_family_with(bound, FamilyOptions::default())
}

/// Squarefree sieve up to `bound`, then the mod-4 classification for both
/// signs.
pub fn enumerate_family_with(bound: u64, options: FamilyOptions) -> Result<FamilySlice> {
    if bound == 0 {
        return Err(Error::invalid("N", "must be at least 1"));
    }
    // sieve bytes plus roughly 0.61 N members of 8 bytes each
    let needed = bound.saturating_mul(6);
    if needed > options.memory_budget {
        return Err(Error::ResourceLimit(format!(
            "enumerating N={bound} needs about {needed} bytes, budget is {}",
            options.memory_budget
        )));
    }
    let squarefree = squarefree_flags(bound);
    let sf = |m: u64| squarefree[m as usize];
    let mut members = Vec::with_capacity((bound as f64 * 0.62) as usize + 8);
    for a in 1..=bound {
        // negative candidate first so that equal |d| sorts as (-a, a)
        let neg = match a % 4 {
            3 => sf(a),
            0 => matches!((a / 4) % 4, 1 | 2) && sf(a / 4),
            _ => false,
        };
        if neg {
            members.push(FundamentalDiscriminant::new_unchecked(-(a as i64)));
        }
        let pos = match a % 4 {
            1 => sf(a) && (a != 1 || options.include_d1),
            0 => matches!((a / 4) % 4, 2 | 3) && sf(a / 4),
            _ => false,
        };
        if pos {
            members.push(FundamentalDiscriminant::new_unchecked(a as i64));
        }
    }
    Ok(FamilySlice { bound, members })
}

/// Mean of `chi_D(n)` over the default family `F(N)`.
pub fn character_average(n: u64, bound: u64) -> Result<f64> {
    Ok(enumerate_family(bound)?.character_average(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{factorize, is_prime};
    use proptest::prelude::*;

    fn brute_family(bound: i64, include_d1: bool) -> Vec<i64> {
        let mut v: Vec<i64> = (-bound..=bound)
            .filter(|&d| {
                let m = d.rem_euclid(4);
                let ok = match m {
                    1 => (1..=d.abs()).all(|k| k == 1 || d.abs() % (k * k) != 0),
                    0 => {
                        let q = d / 4;
                        matches!(q.rem_euclid(4), 2 | 3)
                            && (2..=q.abs()).all(|k| q.abs() % (k * k) != 0)
                    }
                    _ => false,
                };
                d != 0 && ok && (include_d1 || d != 1)
            })
            .collect();
        v.sort_by_key(|&d| (d.abs(), d));
        v
    }

    #[test]
    fn fundamental_examples() {
        assert!(is_fundamental_discriminant(5));
        assert!(!is_fundamental_discriminant(4));
        assert!(!is_fundamental_discriminant(0));
        assert!(is_fundamental_discriminant(1));
        assert!(is_fundamental_discriminant(-3));
        assert!(is_fundamental_discriminant(-4));
        assert!(is_fundamental_discriminant(-8));
        assert!(is_fundamental_discriminant(12));
        assert!(!is_fundamental_discriminant(-12));
        assert!(!is_fundamental_discriminant(9));
        assert!(!is_fundamental_discriminant(-16));
    }

    #[test]
    fn family_at_ten() {
        let f = enumerate_family(10).unwrap();
        let ds: Vec<i64> = f.members().iter().map(|d| d.get()).collect();
        assert_eq!(ds, vec![1, -3, -4, 5, -7, -8, 8]);
        assert_eq!(f.count(), 7);
        let one: Vec<i64> = enumerate_family(1)
            .unwrap()
            .members()
            .iter()
            .map(|d| d.get())
            .collect();
        assert_eq!(one, vec![1]);
    }

    #[test]
    fn exclude_d1_switch() {
        let opts = FamilyOptions {
            include_d1: false,
            ..Default::default()
        };
        let f = enumerate_family_with(10, opts).unwrap();
        assert_eq!(f.count(), 6);
        assert!(enumerate_family_with(1, opts).unwrap().members().is_empty());
    }

    #[test]
    fn sieve_agrees_with_definition() {
        for n in [1i64, 2, 3, 4, 5, 17, 64, 100, 511, 1000, 2500] {
            let got: Vec<i64> = enumerate_family(n as u64)
                .unwrap()
                .members()
                .iter()
                .map(|d| d.get())
                .collect();
            assert_eq!(got, brute_family(n, true), "N = {n}");
        }
        let n = 10_000u64;
        let got: Vec<i64> = enumerate_family(n)
            .unwrap()
            .members()
            .iter()
            .map(|d| d.get())
            .collect();
        let mut brute: Vec<i64> = (-(n as i64)..=n as i64)
            .filter(|&d| is_fundamental_discriminant(d))
            .collect();
        brute.sort_by_key(|&d| (d.abs(), d));
        assert_eq!(got, brute);
    }

    #[test]
    fn memory_budget_enforced() {
        let opts = FamilyOptions {
            memory_budget: 1000,
            ..Default::default()
        };
        assert!(matches!(
            enumerate_family_with(10_000, opts),
            Err(Error::ResourceLimit(_))
        ));
        assert!(matches!(
            enumerate_family(0),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn kronecker_examples() {
        for d in [-20, -3, 1, 5, 8, 12, 1_000_003] {
            assert_eq!(kronecker(d, 1), 1);
        }
        assert_eq!(kronecker(8, 2), 0);
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(-3, 2), -1);
        assert_eq!(kronecker(-7, 2), 1);
        assert_eq!(kronecker(1, 0), 1);
        assert_eq!(kronecker(-1, 0), 1);
        assert_eq!(kronecker(5, 0), 0);
        assert_eq!(kronecker(i64::MIN, 3), kronecker(i64::MIN % 3, 3));
    }

    fn legendre(a: i64, p: u64) -> i8 {
        if p == 2 {
            return match a.rem_euclid(8) {
                1 | 7 => 1,
                3 | 5 => -1,
                _ => 0,
            };
        }
        let a = a.rem_euclid(p as i64) as u64;
        if a == 0 {
            return 0;
        }
        let mut r = 1u64;
        let mut b = a;
        let mut e = (p - 1) / 2;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        if r == 1 {
            1
        } else {
            -1
        }
    }

    #[test]
    fn kronecker_against_euler_criterion() {
        for d in -200i64..=200 {
            for n in 1u64..=200 {
                let mut expected = 1i8;
                for (p, e) in factorize(n) {
                    expected *= legendre(d, p).pow(e);
                }
                assert_eq!(kronecker(d, n), expected, "({d}/{n})");
            }
        }
    }

    #[test]
    fn multiplicative_in_n() {
        for d in [-1000i64, -163, -4, -3, 1, 5, 8, 12, 997] {
            for m in 1u64..=300 {
                for n in 1u64..=300 {
                    assert_eq!(kronecker(d, m * n), kronecker(d, m) * kronecker(d, n));
                }
            }
        }
    }

    #[test]
    fn periodic_for_fundamental() {
        for d in (-50i64..=50).filter(|&d| is_fundamental_discriminant(d)) {
            let m = d.unsigned_abs();
            for n in 0..=1000u64 {
                assert_eq!(kronecker(d, n), kronecker(d, n + m), "d = {d}, n = {n}");
            }
        }
    }

    #[test]
    fn character_table_matches_symbol() {
        let sieve = FactorSieve::new(2000);
        for d in enumerate_family(2000).unwrap().members().iter().step_by(7) {
            let t = CharacterTable::new(*d, &sieve);
            for n in 0..3000u64 {
                assert_eq!(t.at(n), d.chi(n), "d = {d}, n = {n}");
            }
        }
    }

    #[test]
    fn character_average_trivial_and_square() {
        assert_eq!(character_average(1, 1000).unwrap(), 1.0);
        let v = character_average(4, 100_000).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 0.02, "{v}");
    }

    #[test]
    fn character_average_bridge_at_two() {
        let n = 10_000u64;
        let v = character_average(2, n).unwrap();
        let direct: i64 = (-(n as i64)..=n as i64)
            .filter(|&d| is_fundamental_discriminant(d))
            .map(|d| {
                let r = d.rem_euclid(8);
                match r {
                    1 => 1,
                    5 => -1,
                    _ => 0,
                }
            })
            .sum();
        let count = enumerate_family(n).unwrap().count() as f64;
        assert_eq!(v, direct as f64 / count);
        let scale = (n as f64).powf(-0.5) * 2f64.powf(0.25) * 2f64.ln();
        assert!(v.abs() <= 10.0 * scale, "{v} vs {scale}");
    }

    #[test]
    fn family_text_round_trip() {
        let f = enumerate_family(500).unwrap();
        let mut buf = Vec::new();
        f.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&format!("N=500 count={}\n", f.count())));
        let back = FamilySlice::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, f);
        assert!(FamilySlice::read_from("N=5 count=2\n1\n".as_bytes()).is_err());
        assert!(FamilySlice::read_from("N=5 count=1\n4\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn members_are_fundamental_and_complete(n in 1u64..3000) {
            let f = enumerate_family(n).unwrap();
            let expected = (-(n as i64)..=n as i64).filter(|&d| is_fundamental_discriminant(d)).count();
            prop_assert_eq!(f.count(), expected);
            for w in f.members().windows(2) {
                prop_assert!((w[0].modulus(), w[0].get()) < (w[1].modulus(), w[1].get()));
            }
        }

        #[test]
        fn prime_moduli_reduce_to_legendre(d in -100_000i64..100_000, k in 0usize..200) {
            let p = (1000u64..).filter(|&q| is_prime(q)).nth(k).unwrap();
            prop_assert_eq!(kronecker(d, p), legendre(d, p));
        }
    }
}
