//! Tables over several family sizes or moment orders, exported as CSV rows
//! and a JSON summary.
//!
//! The bounds these tables illustrate carry ineffective constants, so each
//! report only offers trend checks and bounded ratios.

use std::io::Write;

use serde::Serialize;

use super::SourceTag;
use super::{
    discrepancy_benchmark, empirical_cdf, family_distribution, ks_distance, min_abs_value,
    tail_frequency,
};
use crate::discriminant::enumerate_family_with;
use crate::discriminant::FamilyOptions;
use crate::error::{Error, Result};
use crate::lfun::{
    evaluate_family_with, family_moment, large_value_threshold, LambdaPolicy, LogDerivValue,
    SweepOptions, DEFAULT_K_MAX,
};
use crate::model::{
    exact_moment, mc_moment, neglected_moment_bound, sample_l, ModelConfig, ModelSampleBatch,
};

/// Everything a family-vs-model comparison needs besides the list of `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabSettings {
    pub epsilon: f64,
    pub lambda: LambdaPolicy,
    pub family: FamilyOptions,
    pub sweep: SweepOptions,
    pub model: ModelConfig,
    pub samples: usize,
}

impl LabSettings {
    pub fn new(model: ModelConfig, samples: usize) -> Self {
        Self {
            epsilon: model.epsilon(),
            lambda: LambdaPolicy::Default,
            family: FamilyOptions::default(),
            sweep: SweepOptions::default(),
            model,
            samples,
        }
    }

    /// Family values at size `bound`, with the `λ` that produced them.
    pub fn sweep(&self, bound: u64) -> Result<FamilySweep> {
        let params = self.lambda.params(bound, self.epsilon)?;
        let family = enumerate_family_with(bound, self.family)?;
        Ok(FamilySweep {
            bound,
            lambda: params.lambda(),
            values: evaluate_family_with(&family, &params, &self.sweep)?,
        })
    }

    pub fn model_batch(&self) -> Result<ModelSampleBatch> {
        sample_l(self.model, self.samples)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilySweep {
    pub bound: u64,
    pub lambda: f64,
    pub values: Vec<LogDerivValue>,
}

impl FamilySweep {
    pub fn flagged(&self) -> usize {
        self.values.iter().filter(|v| v.flagged).count()
    }
}

fn check_increasing(bounds: &[u64]) -> Result<()> {
    if bounds.is_empty() {
        return Err(Error::EmptyInput("N list"));
    }
    if bounds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("N", "list must be strictly increasing"));
    }
    Ok(())
}

fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| Error::format("json", e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DiscrepancyRow {
    pub n: u64,
    pub lambda: f64,
    pub count: usize,
    pub flagged: usize,
    pub ks: f64,
    pub benchmark: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DiscrepancyReport {
    pub epsilon: f64,
    pub prime_cutoff: u64,
    pub samples: usize,
    pub seed: u64,
    pub rows: Vec<DiscrepancyRow>,
    pub ks_strictly_decreasing: bool,
    pub max_ratio: f64,
}

impl DiscrepancyReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "N,lambda,count,flagged,ks,benchmark,ratio")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.n, r.lambda, r.count, r.flagged, r.ks, r.benchmark, r.ratio
            )?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        write_json(w, self)
    }
}

/// KS distance between each family sweep and the (negated) model samples.
pub fn discrepancy_report(
    sweeps: &[FamilySweep],
    batch: &ModelSampleBatch,
) -> Result<DiscrepancyReport> {
    check_increasing(&sweeps.iter().map(|s| s.bound).collect::<Vec<_>>())?;
    let epsilon = batch.config.epsilon();
    let model = empirical_cdf(&batch.logderiv_samples(), SourceTag::Model)?;
    let rows = sweeps
        .iter()
        .map(|s| {
            let ks = ks_distance(&family_distribution(&s.values)?, &model);
            let benchmark = discrepancy_benchmark(s.bound, epsilon)?;
            Ok(DiscrepancyRow {
                n: s.bound,
                lambda: s.lambda,
                count: s.values.len(),
                flagged: s.flagged(),
                ks,
                benchmark,
                ratio: ks / benchmark,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DiscrepancyReport {
        epsilon,
        prime_cutoff: batch.config.prime_cutoff(),
        samples: batch.len(),
        seed: batch.config.seed(),
        ks_strictly_decreasing: rows.windows(2).all(|w| w[1].ks < w[0].ks),
        max_ratio: rows.iter().map(|r| r.ratio).fold(0.0, f64::max),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TailRow {
    pub n: u64,
    pub lambda: f64,
    pub count: usize,
    pub threshold: f64,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TailReport {
    pub epsilon: f64,
    pub rows: Vec<TailRow>,
    pub nonincreasing: bool,
}

impl TailReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "N,lambda,count,threshold,frequency")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                r.n, r.lambda, r.count, r.threshold, r.frequency
            )?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        write_json(w, self)
    }
}

pub fn tail_report(sweeps: &[FamilySweep], epsilon: f64) -> Result<TailReport> {
    check_increasing(&sweeps.iter().map(|s| s.bound).collect::<Vec<_>>())?;
    let rows = sweeps
        .iter()
        .map(|s| {
            Ok(TailRow {
                n: s.bound,
                lambda: s.lambda,
                count: s.values.len(),
                threshold: large_value_threshold(s.bound, epsilon)?,
                frequency: tail_frequency(&s.values, s.bound, epsilon)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TailReport {
        epsilon,
        nonincreasing: rows.windows(2).all(|w| w[1].frequency <= w[0].frequency),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MinimaRow {
    pub n: u64,
    pub lambda: f64,
    pub discriminant: i64,
    pub min_abs: f64,
    pub benchmark: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MinimaReport {
    pub epsilon: f64,
    pub rows: Vec<MinimaRow>,
    pub nonincreasing: bool,
    pub max_ratio: f64,
}

impl MinimaReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "N,lambda,D,minAbs,benchmark,ratio")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.n, r.lambda, r.discriminant, r.min_abs, r.benchmark, r.ratio
            )?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        write_json(w, self)
    }
}

pub fn minima_report(sweeps: &[FamilySweep], epsilon: f64) -> Result<MinimaReport> {
    check_increasing(&sweeps.iter().map(|s| s.bound).collect::<Vec<_>>())?;
    let rows = sweeps
        .iter()
        .map(|s| {
            let (d, m) = min_abs_value(&s.values)?;
            let benchmark = discrepancy_benchmark(s.bound, epsilon)?;
            Ok(MinimaRow {
                n: s.bound,
                lambda: s.lambda,
                discriminant: d.get(),
                min_abs: m,
                benchmark,
                ratio: m / benchmark,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MinimaReport {
        epsilon,
        nonincreasing: rows.windows(2).all(|w| w[1].min_abs <= w[0].min_abs),
        max_ratio: rows.iter().map(|r| r.ratio).fold(0.0, f64::max),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MomentRow {
    pub k: u32,
    pub family_moment: f64,
    /// `E[(-S_λ)^k]` for the model polynomial cut at the family's `λ`.
    pub model_moment: f64,
    /// Bound on the part of the model moment the computation left out.
    pub neglected_bound: f64,
    /// Monte Carlo `E[(-L)^k]` from the Euler-product sampler.
    pub mc_moment: f64,
    pub mc_std_error: f64,
    /// `|family - model|^{1/k}`.
    pub gap_root: f64,
    /// `log N / N^{ε²(ε+3)/(12k)}`.
    pub benchmark: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MomentReport {
    pub epsilon: f64,
    pub n: u64,
    pub lambda: f64,
    pub rows: Vec<MomentRow>,
}

impl MomentReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "k,familyMoment,modelMoment,neglectedBound,mcMoment,mcStdError,gapRoot,benchmark"
        )?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                r.k,
                r.family_moment,
                r.model_moment,
                r.neglected_bound,
                r.mc_moment,
                r.mc_std_error,
                r.gap_root,
                r.benchmark
            )?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        write_json(w, self)
    }
}

/// Moment table for `ks`, drawing a fresh model batch from `settings`.
pub fn moment_compare(
    ks: &[u32],
    sweep: &FamilySweep,
    settings: &LabSettings,
) -> Result<MomentReport> {
    moment_compare_with_batch(ks, sweep, &settings.model_batch()?)
}

pub fn moment_compare_with_batch(
    ks: &[u32],
    sweep: &FamilySweep,
    batch: &ModelSampleBatch,
) -> Result<MomentReport> {
    if ks.is_empty() {
        return Err(Error::EmptyInput("moment orders"));
    }
    if let Some(&k) = ks.iter().find(|&&k| k == 0 || k as usize > DEFAULT_K_MAX) {
        return Err(Error::invalid(
            "k",
            format!("{k} outside 1..={DEFAULT_K_MAX}"),
        ));
    }
    let epsilon = batch.config.epsilon();
    let exponent = epsilon * epsilon * (epsilon + 3.0) / 12.0;
    let n = sweep.bound as f64;
    let rows = ks
        .iter()
        .map(|&k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let family = family_moment(k, &sweep.values)?;
            let model = sign * exact_moment(k, epsilon, sweep.lambda)?;
            let mc = mc_moment(k, batch)?;
            Ok(MomentRow {
                k,
                family_moment: family,
                model_moment: model,
                neglected_bound: neglected_moment_bound(k, epsilon, sweep.lambda),
                mc_moment: sign * mc.mean,
                mc_std_error: mc.std_error,
                gap_root: (family - model).abs().powf(1.0 / k as f64),
                benchmark: n.ln() / n.powf(exponent / k as f64),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentReport {
        epsilon,
        n: sweep.bound,
        lambda: sweep.lambda,
        rows,
    })
}
