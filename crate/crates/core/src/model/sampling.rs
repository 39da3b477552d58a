//! Monte Carlo samples of the truncated Euler form.

use std::io::{Read, Write};

use rayon::prelude::*;

use super::{law_unchecked, prime_tail_second_moment, ModelConfig};
use crate::arith::primes_up_to;
use crate::error::{Error, Result};
use crate::rng::SampleStream;
use crate::summation::NeumaierSum;

#[derive(Debug, Clone, Copy)]
struct PrimeTerm {
    thresholds: [u64; 2],
    /// Term for `X_p = -1, 0, +1`: `-log p / (p^s + 1)`, 0, `log p / (p^s - 1)`.
    values: [f64; 3],
}

/// Precomputed per-prime terms of `Σ_{p <= P} (log p) X_p / (p^s - X_p)`.
#[derive(Debug, Clone)]
pub struct EulerSampler {
    config: ModelConfig,
    terms: Vec<PrimeTerm>,
}

impl EulerSampler {
    pub fn new(config: ModelConfig) -> Self {
        let sigma = config.sigma();
        let terms = primes_up_to(config.prime_cutoff())
            .into_iter()
            .map(|p| {
                let pf = p as f64;
                let ps = pf.powf(sigma);
                PrimeTerm {
                    thresholds: law_unchecked(p).thresholds(),
                    values: [-pf.ln() / (ps + 1.0), 0.0, pf.ln() / (ps - 1.0)],
                }
            })
            .collect();
        Self { config, terms }
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    /// Sample number `index`; the `j`-th prime uses counter `j` of the
    /// sample's stream.
    pub fn sample(&self, index: u64) -> f64 {
        let stream = SampleStream::new(self.config.seed(), index);
        let mut acc = NeumaierSum::new();
        for (j, t) in self.terms.iter().enumerate() {
            // branch-free form of `XpLaw::draw`
            let u = stream.word(j as u64);
            let slot = (u >= t.thresholds[0]) as usize + (u >= t.thresholds[1]) as usize;
            acc.add(t.values[slot]);
        }
        acc.value()
    }

    /// Samples `start..start + count`, in index order.
    pub fn samples(&self, start: u64, count: usize) -> Vec<f64> {
        (0..count as u64)
            .into_par_iter()
            .map(|i| self.sample(start + i))
            .collect()
    }
}

/// Samples of `L_ε` truncated at `P`, plus the neglected second moment.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSampleBatch {
    pub config: ModelConfig,
    pub samples: Vec<f64>,
    /// `Σ_{p > P} (log p)^2 / p^{1+2ε}`, estimated by integral comparison.
    pub tail_estimate: f64,
}

const HEADER_BYTES: usize = 32;

impl ModelSampleBatch {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Samples of `-L_ε`, the model of the family values `L'/L`.
    pub fn logderiv_samples(&self) -> Vec<f64> {
        self.samples.iter().map(|x| -x).collect()
    }

    /// Binary layout: `ε: f64`, `P: u64`, `seed: u64`, `count: u64`, then
    /// `count` samples, all little-endian.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&self.config.epsilon().to_le_bytes())?;
        w.write_all(&self.config.prime_cutoff().to_le_bytes())?;
        w.write_all(&self.config.seed().to_le_bytes())?;
        w.write_all(&(self.samples.len() as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.samples.len() * 8);
        for s in &self.samples {
            buf.extend_from_slice(&s.to_le_bytes());
        }
        w.write_all(&buf)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; HEADER_BYTES];
        r.read_exact(&mut header)
            .map_err(|_| Error::format("sample batch", "truncated header"))?;
        let word =
            |i: usize| u64::from_le_bytes(header[8 * i..8 * i + 8].try_into().expect("8 bytes"));
        let epsilon = f64::from_bits(word(0));
        let config = ModelConfig::new(epsilon, word(1), word(2))?;
        let count = word(3) as usize;
        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        if body.len() != count * 8 {
            return Err(Error::format(
                "sample batch",
                format!("expected {count} samples, found {} bytes", body.len()),
            ));
        }
        let samples = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Ok(Self {
            config,
            samples,
            tail_estimate: prime_tail_second_moment(epsilon, config.prime_cutoff()),
        })
    }

    /// CSV export: `index,value`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,value")?;
        for (i, s) in self.samples.iter().enumerate() {
            writeln!(w, "{i},{s}")?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `count` independent samples of `Σ_{p <= P} (log p) x_p / (p^s - x_p)`.
pub fn sample_l(config: ModelConfig, count: usize) -> Result<ModelSampleBatch> {
    if count == 0 {
        return Err(Error::invalid("count", "must be at least 1"));
    }
    let sampler = EulerSampler::new(config);
    Ok(ModelSampleBatch {
        config,
        samples: sampler.samples(0, count),
        tail_estimate: prime_tail_second_moment(config.epsilon(), config.prime_cutoff()),
    })
}

/// Sample moment with a jackknife standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub k: u32,
    /// Mean of `value^k`.
    pub mean: f64,
    pub std_error: f64,
    /// Mean of `|value|^k`.
    pub abs_mean: f64,
    pub abs_std_error: f64,
}

impl MomentEstimate {
    /// `(E|L|^k)^{1/k}`.
    pub fn abs_root(&self) -> f64 {
        self.abs_mean.powf(1.0 / self.k as f64)
    }
}

fn jackknife_mean(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let total: f64 = values.iter().copied().collect::<NeumaierSum>().value();
    let mean = total / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    // leave-one-out replicates (total - y_i) / (n - 1); their mean is `mean`
    let spread: NeumaierSum = values
        .iter()
        .map(|&y| {
            let r = (total - y) / (n - 1.0) - mean;
            r * r
        })
        .collect();
    (mean, ((n - 1.0) / n * spread.value()).sqrt())
}

pub fn mc_moment(k: u32, batch: &ModelSampleBatch) -> Result<MomentEstimate> {
    moment_of(k, &batch.samples)
}

pub(crate) fn moment_of(k: u32, samples: &[f64]) -> Result<MomentEstimate> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("sample batch"));
    }
    if k == 0 {
        return Err(Error::invalid("k", "must be positive"));
    }
    let powered: Vec<f64> = samples.iter().map(|x| x.powi(k as i32)).collect();
    let (mean, std_error) = jackknife_mean(&powered);
    let abs: Vec<f64> = powered.iter().map(|x| x.abs()).collect();
    let (abs_mean, abs_std_error) = jackknife_mean(&abs);
    Ok(MomentEstimate {
        k,
        mean,
        std_error,
        abs_mean,
        abs_std_error,
    })
}
