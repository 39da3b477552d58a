//! Density of the model distribution by Fourier inversion of `φ`,
//! `M(t) = (1/π) ∫_0^T Re(e^{-iτt} φ(τ)) dτ`.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use super::EmpiricalDistribution;
use crate::error::{Error, Result};
use crate::model::CharFn;

/// `|φ(T)|` must fall below this for the truncation at `T` to be accepted.
pub const INVERSION_TARGET: f64 = 1e-12;

/// Refinement stops once halving the step moves no grid value by more than this.
const REFINE_TOL: f64 = 1e-9;
const MIN_PANELS: usize = 64;
const MAX_PANELS: usize = 1 << 18;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub inversion_cutoff: f64,
    /// Simpson panels on `[0, T]` at the accepted refinement level.
    pub panels: usize,
    /// Largest change in any value at the last halving of the step.
    pub refinement_change: f64,
}

impl DensityCurve {
    /// Trapezoid integral over the grid.
    pub fn integral(&self) -> f64 {
        self.cdf().last().copied().unwrap_or(0.0)
    }

    /// Cumulative trapezoid integral, 0 at the first grid point.
    pub fn cdf(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.grid.len());
        out.push(0.0);
        for i in 1..self.grid.len() {
            acc += 0.5 * (self.values[i] + self.values[i - 1]) * (self.grid[i] - self.grid[i - 1]);
            out.push(acc);
        }
        out
    }

    /// Cumulative trapezoid interpolated linearly between grid points; 0
    /// left of the grid and the full integral right of it.
    pub fn cdf_at(&self, x: f64) -> f64 {
        self.interpolate(&self.cdf(), x)
    }

    fn interpolate(&self, cdf: &[f64], x: f64) -> f64 {
        let g = &self.grid;
        if x < g[0] {
            return 0.0;
        }
        let i = g.partition_point(|&t| t <= x);
        if i == g.len() {
            return cdf[g.len() - 1];
        }
        let w = (x - g[i - 1]) / (g[i] - g[i - 1]);
        cdf[i - 1] + w * (cdf[i] - cdf[i - 1])
    }

    /// `sup_z |F_emp(z) - F(z)|` with `F` the interpolated cumulative curve.
    /// Between jumps and grid points both sides are linear, so checking both
    /// one-sided limits at every jump and the value at every grid point is exact.
    pub fn sup_distance_to(&self, emp: &EmpiricalDistribution) -> f64 {
        let cdf = self.cdf();
        let n = emp.total() as f64;
        let xs = emp.sorted_samples();
        let mut best: f64 = 0.0;
        let mut i = 0;
        while i < xs.len() {
            let z = xs[i];
            let mut j = i;
            while j < xs.len() && xs[j] == z {
                j += 1;
            }
            let f = self.interpolate(&cdf, z);
            best = best
                .max((i as f64 / n - f).abs())
                .max((j as f64 / n - f).abs());
            i = j;
        }
        for (&x, &f) in self.grid.iter().zip(&cdf) {
            best = best.max((emp.cdf(x) - f).abs());
        }
        best
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,density")?;
        for (x, m) in self.grid.iter().zip(&self.values) {
            writeln!(w, "{x},{m}")?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Smallest `T` (to about 1%) on a doubling-then-bisection search with
/// `|φ(T)| < INVERSION_TARGET`.
pub fn inversion_cutoff(cf: &CharFn) -> f64 {
    let target = INVERSION_TARGET.ln();
    let below = |t: f64| cf.eval(t).log_modulus < target;
    let mut hi = 1.0;
    while !below(hi) {
        hi *= 2.0;
    }
    let mut lo = hi / 2.0;
    while hi - lo > 0.01 * hi {
        let mid = 0.5 * (lo + hi);
        if below(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn simpson_row(phi: &[Complex64], t: f64, h: f64) -> f64 {
    let n = phi.len() - 1;
    let term = |j: usize| {
        let (s, c) = (j as f64 * h * t).sin_cos();
        c * phi[j].re + s * phi[j].im
    };
    let mut sum = term(0) + term(n);
    for j in 1..n {
        sum += if j % 2 == 1 { 4.0 } else { 2.0 } * term(j);
    }
    sum * h / 3.0 / std::f64::consts::PI
}

/// Model density on `grid`, integrating `φ` over `[0, T]` with composite
/// Simpson. The step is halved, reusing every earlier node of `φ`, until the
/// values settle.
pub fn density_from_charfn(
    epsilon: f64,
    grid: &[f64],
    cutoff: f64,
    prime_cutoff: u64,
) -> Result<DensityCurve> {
    if grid.is_empty() {
        return Err(Error::EmptyInput("density grid"));
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(
            "grid",
            "must be finite and strictly increasing",
        ));
    }
    if !(cutoff > 0.0 && cutoff.is_finite()) {
        return Err(Error::invalid(
            "T",
            format!("must be positive, got {cutoff}"),
        ));
    }
    let cf = CharFn::new(epsilon, prime_cutoff)?;
    let at_cutoff = cf.eval(cutoff);
    if at_cutoff.log_modulus >= INVERSION_TARGET.ln() {
        return Err(Error::InversionCutoff {
            tau: cutoff,
            modulus: at_cutoff.modulus(),
        });
    }

    let node = |j: usize, n: usize| cf.eval(cutoff * j as f64 / n as f64).value();
    let mut panels = MIN_PANELS;
    let mut phi: Vec<Complex64> = (0..=panels)
        .into_par_iter()
        .map(|j| node(j, panels))
        .collect();
    let rows = |phi: &[Complex64], n: usize| -> Vec<f64> {
        let h = cutoff / n as f64;
        grid.par_iter().map(|&t| simpson_row(phi, t, h)).collect()
    };
    let mut values = rows(&phi, panels);
    loop {
        let fine = 2 * panels;
        let odd: Vec<Complex64> = (0..panels)
            .into_par_iter()
            .map(|j| node(2 * j + 1, fine))
            .collect();
        let mut next = Vec::with_capacity(fine + 1);
        for j in 0..panels {
            next.push(phi[j]);
            next.push(odd[j]);
        }
        next.push(phi[panels]);
        phi = next;
        panels = fine;
        let refined = rows(&phi, panels);
        let change = values
            .iter()
            .zip(&refined)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        values = refined;
        if change < REFINE_TOL || panels >= MAX_PANELS {
            return Ok(DensityCurve {
                grid: grid.to_vec(),
                values,
                inversion_cutoff: cutoff,
                panels,
                refinement_change: change,
            });
        }
    }
}
