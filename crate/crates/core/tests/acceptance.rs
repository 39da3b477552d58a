//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the lines are never
//! captured. Criteria listed in `EXPECTED_FAILURES` are reported as FAIL like
//! any other; the run only errors on a failure outside that list or on an
//! expected failure that starts passing.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use quadlab::lab::{
    density_from_charfn, discrepancy_report, empirical_cdf, inversion_cutoff, minima_report,
    DensityCurve, LabSettings, SourceTag,
};
use quadlab::lfun::{LambdaPolicy, LambdaTables};
use quadlab::model::{exact_moment, mc_moment, sample_l, CharFn, ModelConfig, ModelSampleBatch};
use quadlab::{character_average, enumerate_family, kronecker};

const EPS: f64 = 0.25;
const PRIME_CUTOFF: u64 = 100_000;
const MC_SAMPLES: usize = 1_000_000;
const SEEDS: [u64; 2] = [42, 4242];
const FAMILY_SIZES: [u64; 3] = [1_000, 10_000, 100_000];
const THREAD_COUNTS: [usize; 3] = [1, 4, 8];

// criterion thresholds
const C1_N: u64 = 1_000_000;
const C1_RANGE: (f64, f64) = (0.6069, 0.6089);
const C1_TIME: Duration = Duration::from_secs(30);
const C2_RANGE: i64 = 200;
const C3_LAMBDA_MAX: f64 = 30.0;
const C3_K_MAX: u32 = 4;
const C3_EPSILONS: [f64; 3] = [0.1, 0.25, 0.4];
const C3_TOL: f64 = 1e-12;
const C3_TIME: Duration = Duration::from_secs(60);
const C4_N: u64 = 10_000;
const C4_K: usize = 5;
const C4_SLACK: f64 = 1e-12;
const C5_TOL: f64 = 0.01;
const C5_TIME: Duration = Duration::from_secs(300);
const C6_KS_MAX: f64 = 0.05;
const C6_LAMBDA_MAX: f64 = 1e6;
const C6_TIME: Duration = Duration::from_secs(20 * 60);
const C7_TAU: (f64, f64) = (10.0, 200.0);
const C7_TARGET: f64 = 4.0 / 3.0;
const C7_TOL: f64 = 0.15;
const C7_TIME: Duration = Duration::from_secs(60);
const C8_K: (u32, u32) = (2, 20);
const C8_BOUND: f64 = 5.0;
const C9_BOUND: f64 = 1.0;
const C10_N: u64 = 100_000;
const C10_BOUND: f64 = 10.0;

/// Sharp truncation of `L'/L` at `λ ≤ 10^6` leaves KS(10^5) near 0.13.
const EXPECTED_FAILURES: &[u32] = &[6];

struct Outcome {
    id: u32,
    pass: bool,
    detail: String,
}

fn report(id: u32, pass: bool, detail: String) -> Outcome {
    println!(
        "criterion {id:>2}  {}  {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    Outcome { id, pass, detail }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn criterion_1() -> Outcome {
    let (family, t) = timed(|| enumerate_family(C1_N).unwrap());
    let density = family.count() as f64 / C1_N as f64;
    let pass = (C1_RANGE.0..=C1_RANGE.1).contains(&density) && t < C1_TIME;
    report(
        1,
        pass,
        format!(
            "|F(10^6)|/10^6 = {density:.6} in [{}, {}], {t:.1?}",
            C1_RANGE.0, C1_RANGE.1
        ),
    )
}

/// `(a/p)` for an odd prime `p` from Euler's criterion.
fn euler_legendre(a: i64, p: u64) -> i8 {
    let r = a.rem_euclid(p as i64) as u64;
    let mut acc = 1u64;
    let (mut b, mut e) = (r, (p - 1) / 2);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    match acc {
        0 => 0,
        1 => 1,
        _ => -1,
    }
}

fn definitional_kronecker(a: i64, n: u64) -> i8 {
    if n == 0 {
        return (a.abs() == 1) as i8;
    }
    let mut out = 1i8;
    let mut m = n;
    let mut p = 2;
    while m > 1 {
        while m.is_multiple_of(p) {
            m /= p;
            out *= if p == 2 {
                match a.rem_euclid(8) {
                    1 | 7 => 1,
                    3 | 5 => -1,
                    _ => 0,
                }
            } else {
                euler_legendre(a, p)
            };
        }
        p += 1;
    }
    out
}

fn criterion_2() -> Outcome {
    let mut mismatches = 0;
    let mut checked = 0;
    for a in -C2_RANGE..=C2_RANGE {
        for n in 0..=C2_RANGE as u64 {
            checked += 1;
            if kronecker(a, n) != definitional_kronecker(a, n) {
                mismatches += 1;
            }
        }
    }
    report(
        2,
        mismatches == 0,
        format!("{mismatches} mismatches in {checked} pairs (|a| <= 200, 0 <= n <= 200)"),
    )
}

fn prime_powers(limit: u64) -> Vec<(u64, u64)> {
    (2..=limit)
        .filter_map(|q| {
            let p = (2..=q).find(|d| q % d == 0).unwrap();
            let mut m = q;
            while m % p == 0 {
                m /= p;
            }
            (m == 1).then_some((q, p))
        })
        .collect()
}

/// `E[X_m]`: `Π p/(p+1)` over the primes of `m` when `m` is a square, else 0.
fn expected_x(mut m: u64) -> f64 {
    let mut out = 1.0;
    let mut p = 2;
    while m > 1 {
        let mut e = 0;
        while m.is_multiple_of(p) {
            m /= p;
            e += 1;
        }
        if e % 2 == 1 {
            return 0.0;
        }
        if e > 0 {
            out *= p as f64 / (p as f64 + 1.0);
        }
        p += 1;
    }
    out
}

fn brute_moment(k: u32, eps: f64, lambda: f64) -> f64 {
    let pp = prime_powers(lambda.floor() as u64);
    let weights: Vec<f64> = pp
        .iter()
        .map(|&(q, p)| (p as f64).ln() / (q as f64).powf(0.5 + eps))
        .collect();
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    let mut idx = vec![0usize; k as usize];
    if pp.is_empty() {
        return 0.0;
    }
    loop {
        let m: u64 = idx.iter().map(|&i| pp[i].0).product();
        let ex = expected_x(m);
        if ex != 0.0 {
            let term = ex * idx.iter().map(|&i| weights[i]).product::<f64>();
            let t = sum + term;
            comp += if sum.abs() >= term.abs() {
                (sum - t) + term
            } else {
                (term - t) + sum
            };
            sum = t;
        }
        let mut j = 0;
        loop {
            if j == idx.len() {
                return sum + comp;
            }
            idx[j] += 1;
            if idx[j] < pp.len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

fn criterion_3() -> Outcome {
    let (worst, t) = timed(|| {
        let mut worst: f64 = 0.0;
        for &eps in &C3_EPSILONS {
            for k in 1..=C3_K_MAX {
                let mut lambda = 2.5;
                while lambda <= C3_LAMBDA_MAX {
                    let exact = exact_moment(k, eps, lambda).unwrap();
                    let brute = brute_moment(k, eps, lambda);
                    worst = worst.max((exact - brute).abs() / brute.abs().max(1.0));
                    lambda += 1.0;
                }
            }
        }
        worst
    });
    let pass = worst <= C3_TOL && t < C3_TIME;
    report(
        3,
        pass,
        format!("max |exact - brute| / max(1, |brute|) = {worst:.2e} <= {C3_TOL:e} over λ <= 30, k <= 4, {t:.1?}"),
    )
}

fn criterion_4() -> Outcome {
    let tables = LambdaTables::new(C4_N, C4_K).unwrap();
    let mut violations = 0;
    let mut tightest: f64 = 0.0;
    for k in 1..=C4_K {
        let level = tables.level(k).unwrap();
        for n in 2..=C4_N {
            let bound = (n as f64).ln().powi(k as i32);
            tightest = tightest.max(level[n as usize] / bound);
            if level[n as usize] > bound * (1.0 + C4_SLACK) {
                violations += 1;
            }
        }
        if level[1] != 0.0 {
            violations += 1;
        }
    }
    report(
        4,
        violations == 0,
        format!("{violations} violations of Λ_k(n) <= (log n)^k, n <= 10^4, k <= 5 (max ratio {tightest:.12})"),
    )
}

/// Every artifact behind criteria 5 to 9, plus its serialized bytes.
struct Artifacts {
    c5_gap: f64,
    c5_integral: f64,
    c5_min: f64,
    c5_time: Duration,
    c6: quadlab::lab::DiscrepancyReport,
    c6_time: Duration,
    c7_slope: f64,
    c7_time: Duration,
    c8_worst: [f64; 2],
    c9: quadlab::lab::MinimaReport,
    bytes: Vec<(&'static str, Vec<u8>)>,
}

fn density_grid() -> Vec<f64> {
    (0..=1200).map(|i| -12.0 + 0.02 * i as f64).collect()
}

fn fitted_slope(cf: &CharFn) -> f64 {
    let pts: Vec<(f64, f64)> = (0..=40)
        .map(|i| {
            let tau = C7_TAU.0 * (C7_TAU.1 / C7_TAU.0).powf(i as f64 / 40.0);
            (tau.ln(), cf.log_neg_log_modulus(tau))
        })
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn growth_worst(batch: &ModelSampleBatch, rows: &mut Vec<u8>) -> f64 {
    let mut worst: f64 = 0.0;
    for k in C8_K.0..=C8_K.1 {
        let est = mc_moment(k, batch).unwrap();
        let ratio = est.abs_root() / (k as f64).powf(0.5 - EPS);
        rows.extend(
            format!("{},{},{},{}\n", batch.config.seed(), k, est.abs_mean, ratio).into_bytes(),
        );
        worst = worst.max(ratio);
    }
    worst
}

fn build_artifacts() -> Artifacts {
    let mut bytes = Vec::new();
    let config = ModelConfig::new(EPS, PRIME_CUTOFF, SEEDS[0]).unwrap();

    let ((batch, curve), c5_time) = timed(|| {
        let batch = sample_l(config, MC_SAMPLES).unwrap();
        let cf = CharFn::from_config(&config).unwrap();
        let curve: DensityCurve =
            density_from_charfn(EPS, &density_grid(), inversion_cutoff(&cf), PRIME_CUTOFF).unwrap();
        (batch, curve)
    });
    let mc = empirical_cdf(&batch.logderiv_samples(), SourceTag::Model).unwrap();
    let c5_gap = curve.sup_distance_to(&mc);
    let mut buf = Vec::new();
    batch.write_binary(&mut buf).unwrap();
    bytes.push(("model batch, seed 42", buf));
    let mut buf = Vec::new();
    curve.write_csv(&mut buf).unwrap();
    bytes.push(("density csv", buf));

    let settings = LabSettings {
        lambda: LambdaPolicy::Default,
        ..LabSettings::new(config, MC_SAMPLES)
    };
    let (sweeps, sweep_time) = timed(|| {
        FAMILY_SIZES
            .iter()
            .map(|&n| settings.sweep(n).unwrap())
            .collect::<Vec<_>>()
    });
    let (c6, ks_time) = timed(|| discrepancy_report(&sweeps, &batch).unwrap());
    let mut buf = Vec::new();
    c6.write_csv(&mut buf).unwrap();
    c6.write_json(&mut buf).unwrap();
    bytes.push(("discrepancy report", buf));

    let (c7_slope, c7_time) = timed(|| fitted_slope(&CharFn::from_config(&config).unwrap()));
    let mut buf = Vec::new();
    CharFn::from_config(&config)
        .unwrap()
        .curve(&[10.0, 20.0, 50.0, 100.0, 200.0])
        .write_csv(&mut buf)
        .unwrap();
    bytes.push(("charfn curve", buf));

    let mut rows = Vec::new();
    let second = sample_l(config.with_seed(SEEDS[1]), MC_SAMPLES).unwrap();
    let c8_worst = [
        growth_worst(&batch, &mut rows),
        growth_worst(&second, &mut rows),
    ];
    bytes.push(("moment growth", rows));
    let mut buf = Vec::new();
    second.write_binary(&mut buf).unwrap();
    bytes.push(("model batch, seed 4242", buf));

    let c9 = minima_report(&sweeps, EPS).unwrap();
    let mut buf = Vec::new();
    c9.write_csv(&mut buf).unwrap();
    bytes.push(("minima report", buf));

    Artifacts {
        c5_gap,
        c5_integral: curve.integral(),
        c5_min: curve.min_value(),
        c5_time,
        c6,
        c6_time: sweep_time + ks_time,
        c7_slope,
        c7_time,
        c8_worst,
        c9,
        bytes,
    }
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

fn model_criteria(a: &Artifacts) -> Vec<Outcome> {
    let mut out = Vec::new();
    out.push(report(
        5,
        a.c5_gap <= C5_TOL && a.c5_time < C5_TIME,
        format!(
            "sup |F_mc - F_inv| = {:.5} <= {C5_TOL} (10^6 samples, P = 10^5; density mass {:.6}, min {:.1e}), {:.1?}",
            a.c5_gap, a.c5_integral, a.c5_min, a.c5_time
        ),
    ));
    let ks: Vec<String> = a.c6.rows.iter().map(|r| format!("{:.4}", r.ks)).collect();
    let last = a.c6.rows.last().unwrap();
    let lambda_ok = a.c6.rows.iter().all(|r| r.lambda <= C6_LAMBDA_MAX);
    out.push(report(
        6,
        a.c6.ks_strictly_decreasing && last.ks <= C6_KS_MAX && lambda_ok && a.c6_time < C6_TIME,
        format!(
            "KS at N = 10^3, 10^4, 10^5: [{}], strictly decreasing: {}, KS(10^5) = {:.4} vs <= {C6_KS_MAX}, {:.1?}",
            ks.join(", "),
            a.c6.ks_strictly_decreasing,
            last.ks,
            a.c6_time
        ),
    ));
    out.push(report(
        7,
        (a.c7_slope - C7_TARGET).abs() <= C7_TOL && a.c7_time < C7_TIME,
        format!(
            "slope {:.4}, target 4/3 ± {C7_TOL}, {:.1?}",
            a.c7_slope, a.c7_time
        ),
    ));
    out.push(report(
        8,
        a.c8_worst.iter().all(|&w| w <= C8_BOUND),
        format!(
            "max_k (E|L|^k)^(1/k) / k^(1/4), k in 2..=20: {:.4} (seed 42), {:.4} (seed 4242), bound {C8_BOUND}",
            a.c8_worst[0], a.c8_worst[1]
        ),
    ));
    let ratios: Vec<String> =
        a.c9.rows
            .iter()
            .map(|r| format!("{:.3e}", r.ratio))
            .collect();
    out.push(report(
        9,
        a.c9.nonincreasing && a.c9.max_ratio <= C9_BOUND,
        format!(
            "m_N / benchmark = [{}] <= {C9_BOUND}, m_N nonincreasing: {}",
            ratios.join(", "),
            a.c9.nonincreasing
        ),
    ));
    out
}

fn criterion_10() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 2..=50u64 {
        let r = (n as f64).sqrt().round() as u64;
        if r * r == n {
            continue;
        }
        let avg = character_average(n, C10_N).unwrap();
        let scaled = avg.abs() * (C10_N as f64).sqrt() / ((n as f64).powf(0.25) * (n as f64).ln());
        worst = worst.max(scaled);
    }
    report(
        10,
        worst <= C10_BOUND,
        format!("max over non-square n <= 50 of |E_N - E(X_n)| N^(1/2) / (n^(1/4) log n) = {worst:.4} <= {C10_BOUND}"),
    )
}

fn criterion_11(base: &Artifacts, base_threads: usize) -> Outcome {
    let mut diffs = Vec::new();
    for &threads in THREAD_COUNTS.iter().filter(|&&t| t != base_threads) {
        let other = in_pool(threads, build_artifacts);
        for ((name, a), (_, b)) in base.bytes.iter().zip(&other.bytes) {
            if a != b {
                diffs.push(format!("{name} @ {threads} threads"));
            }
        }
    }
    let total: usize = base.bytes.iter().map(|b| b.1.len()).sum();
    report(
        11,
        diffs.is_empty(),
        format!(
            "{} artifacts ({total} bytes) compared across threads {THREAD_COUNTS:?}; differing: {diffs:?}",
            base.bytes.len()
        ),
    )
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut outcomes = vec![criterion_1(), criterion_2(), criterion_3(), criterion_4()];
    let base = in_pool(THREAD_COUNTS[0], build_artifacts);
    outcomes.extend(model_criteria(&base));
    outcomes.push(criterion_10());
    outcomes.push(criterion_11(&base, THREAD_COUNTS[0]));

    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    let unexpected: Vec<u32> = failed
        .iter()
        .copied()
        .filter(|id| !EXPECTED_FAILURES.contains(id))
        .collect();
    let fixed: Vec<u32> = EXPECTED_FAILURES
        .iter()
        .copied()
        .filter(|id| !failed.contains(id))
        .collect();
    println!(
        "acceptance: {} passed, {} failed {failed:?} (expected failures {EXPECTED_FAILURES:?}), {:.1?}",
        outcomes.len() - failed.len(),
        failed.len(),
        started.elapsed()
    );
    for o in outcomes.iter().filter(|o| unexpected.contains(&o.id)) {
        println!("unexpected failure, criterion {}: {}", o.id, o.detail);
    }
    if !fixed.is_empty() {
        println!("criteria {fixed:?} are listed as expected failures but passed; update the list");
    }
    if unexpected.is_empty() && fixed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
