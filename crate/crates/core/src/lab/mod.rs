//! Comparing the family distribution with the random model.
//!
//! The family's flagged entries are dropped from the sample but stay in the
//! denominator, so a family CDF tops out at `1 - (#flagged / count)` on the
//! reals and reaches 1 only at `+∞`.

mod density;
mod report;

pub use density::{density_from_charfn, inversion_cutoff, DensityCurve, INVERSION_TARGET};
pub use report::{
    discrepancy_report, minima_report, moment_compare, moment_compare_with_batch, tail_report,
    DiscrepancyReport, DiscrepancyRow, FamilySweep, LabSettings, MinimaReport, MinimaRow,
    MomentReport, MomentRow, TailReport, TailRow,
};

use serde::Serialize;

use crate::discriminant::FundamentalDiscriminant;
use crate::error::{Error, Result};
use crate::lfun::{large_value_threshold, LogDerivValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceTag {
    Family,
    Model,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    sorted: Vec<f64>,
    total: usize,
    source: SourceTag,
}

impl EmpiricalDistribution {
    pub fn sorted_samples(&self) -> &[f64] {
        &self.sorted
    }

    pub fn source(&self) -> SourceTag {
        self.source
    }

    /// Denominator of the CDF; exceeds the sample count when entries were excluded.
    pub fn total(&self) -> usize {
        self.total
    }

    pub fn cdf(&self, z: f64) -> f64 {
        if z == f64::INFINITY {
            return 1.0;
        }
        self.sorted.partition_point(|&x| x <= z) as f64 / self.total as f64
    }
}

pub fn empirical_cdf(samples: &[f64], source: SourceTag) -> Result<EmpiricalDistribution> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("samples"));
    }
    if let Some(bad) = samples.iter().find(|x| x.is_nan()) {
        return Err(Error::invalid(
            "samples",
            format!("non-numeric sample {bad}"),
        ));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(EmpiricalDistribution {
        total: sorted.len(),
        sorted,
        source,
    })
}

/// Family CDF of the unflagged values over the full family count.
pub fn family_distribution(values: &[LogDerivValue]) -> Result<EmpiricalDistribution> {
    if values.is_empty() {
        return Err(Error::EmptyInput("family values"));
    }
    let mut sorted: Vec<f64> = values
        .iter()
        .filter(|v| !v.flagged)
        .map(|v| v.value)
        .collect();
    sorted.sort_by(f64::total_cmp);
    Ok(EmpiricalDistribution {
        sorted,
        total: values.len(),
        source: SourceTag::Family,
    })
}

/// `sup_z |F_A(z) - F_B(z)|`, exact, by merging the jump points.
pub fn ks_distance(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> f64 {
    let (xa, xb) = (&a.sorted, &b.sorted);
    let (na, nb) = (a.total as f64, b.total as f64);
    let (mut i, mut j) = (0, 0);
    let mut best: f64 = 0.0;
    while i < xa.len() || j < xb.len() {
        let z = match (xa.get(i), xb.get(j)) {
            (Some(&u), Some(&v)) => u.min(v),
            (Some(&u), None) => u,
            (None, Some(&v)) => v,
            (None, None) => unreachable!(),
        };
        while i < xa.len() && xa[i] <= z {
            i += 1;
        }
        while j < xb.len() && xb[j] <= z {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    best
}

/// `(log log N / log N)^{1/2 + ε}`, the scale of both the discrepancy and the
/// smallest value.
pub fn discrepancy_benchmark(bound: u64, epsilon: f64) -> Result<f64> {
    if bound < 3 {
        return Err(Error::invalid("N", "benchmark needs N >= 3"));
    }
    let l = (bound as f64).ln();
    Ok((l.ln() / l).powf(0.5 + epsilon))
}

/// Share of the family (flagged entries included in the count) whose
/// unflagged value reaches `(log N / log log N)^{1/2 - ε}` in size.
pub fn tail_frequency(values: &[LogDerivValue], bound: u64, epsilon: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("family values"));
    }
    let level = large_value_threshold(bound, epsilon)?;
    let hits = values
        .iter()
        .filter(|v| !v.flagged && v.value.abs() >= level)
        .count();
    Ok(hits as f64 / values.len() as f64)
}

/// Unflagged entry of least absolute value; ties go to the earlier entry.
pub fn min_abs_value(values: &[LogDerivValue]) -> Result<(FundamentalDiscriminant, f64)> {
    values
        .iter()
        .filter(|v| !v.flagged)
        .fold(None, |best: Option<&LogDerivValue>, v| match best {
            Some(b) if b.value.abs() <= v.value.abs() => Some(b),
            _ => Some(v),
        })
        .map(|v| (v.discriminant, v.value.abs()))
        .ok_or(Error::EmptyInput("unflagged family values"))
}
