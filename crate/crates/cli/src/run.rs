//! Command implementations. Each writes its artifacts under `out` and
//! returns the summary lines to print.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use quadlab::lab::{
    density_from_charfn, discrepancy_report, inversion_cutoff, minima_report, moment_compare,
    tail_report, FamilySweep, LabSettings,
};
use quadlab::lfun::{evaluate_family_cached, write_sweep_csv, SweepOptions};
use quadlab::model::{mc_moment, sample_l, CharFn, ModelConfig};
use quadlab::{enumerate_family_with, FamilyOptions};

use crate::config::{CliError, Command, RunConfig};

type Lines = Vec<String>;

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
}

/// Writes one artifact through `write`, attributing I/O failures to `path`.
fn artifact<F>(path: PathBuf, write: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<File>) -> quadlab::Result<()>,
{
    let mut w = create(&path)?;
    write(&mut w).map_err(|e| match e {
        quadlab::Error::Io(source) => CliError::Io { path, source },
        other => CliError::Lab(other),
    })
}

fn settings(c: &RunConfig) -> Result<LabSettings, CliError> {
    let model = ModelConfig::new(c.epsilon, c.prime_cutoff, c.seed)?;
    Ok(LabSettings {
        lambda: c.lambda,
        family: FamilyOptions {
            include_d1: c.include_d1,
            ..FamilyOptions::default()
        },
        ..LabSettings::new(model, c.samples)
    })
}

fn sweeps(c: &RunConfig) -> Result<Vec<FamilySweep>, CliError> {
    let s = settings(c)?;
    c.bounds
        .iter()
        .map(|&n| s.sweep(n).map_err(CliError::from))
        .collect()
}

pub fn run(c: &RunConfig) -> Result<Lines, CliError> {
    fs::create_dir_all(&c.out).map_err(|source| CliError::Io {
        path: c.out.clone(),
        source,
    })?;
    match c.command {
        Command::Enumerate => enumerate(c),
        Command::Sweep => sweep(c),
        Command::Sample => sample(c),
        Command::Charfn => charfn(c),
        Command::Density => density(c),
        Command::Compare => compare(c),
        Command::Moments => moments(c),
        Command::Tails => tails(c),
        Command::Minima => minima(c),
    }
}

fn family_options(c: &RunConfig) -> FamilyOptions {
    FamilyOptions {
        include_d1: c.include_d1,
        ..FamilyOptions::default()
    }
}

fn enumerate(c: &RunConfig) -> Result<Lines, CliError> {
    let mut lines = Vec::new();
    for &n in &c.bounds {
        let family = enumerate_family_with(n, family_options(c))?;
        let path = c.out.join(format!("family_N{n}.txt"));
        artifact(path.clone(), |w| family.write_to(w))?;
        lines.push(format!(
            "N={n} count={} file={}",
            family.count(),
            path.display()
        ));
    }
    Ok(lines)
}

fn sweep(c: &RunConfig) -> Result<Lines, CliError> {
    let mut lines = Vec::new();
    for &n in &c.bounds {
        let family = enumerate_family_with(n, family_options(c))?;
        let params = c.lambda.params(n, c.epsilon)?;
        let cache = c.out.join(format!("sweep_N{n}.txt"));
        let values = evaluate_family_cached(&family, &params, &SweepOptions::default(), &cache)?;
        artifact(c.out.join(format!("sweep_N{n}.csv")), |w| {
            write_sweep_csv(w, &values)
        })?;
        let flagged = values.iter().filter(|v| v.flagged).count();
        lines.push(format!(
            "N={n} lambda={} count={} flagged={flagged} cache={}",
            params.lambda(),
            values.len(),
            cache.display()
        ));
    }
    Ok(lines)
}

fn sample(c: &RunConfig) -> Result<Lines, CliError> {
    let batch = sample_l(
        ModelConfig::new(c.epsilon, c.prime_cutoff, c.seed)?,
        c.samples,
    )?;
    artifact(c.out.join("model_samples.bin"), |w| batch.write_binary(w))?;
    artifact(c.out.join("model_samples.csv"), |w| batch.write_csv(w))?;
    let first = mc_moment(1, &batch)?;
    Ok(vec![format!(
        "samples={} P={} seed={} mean={} stdError={} tailEstimate={}",
        batch.len(),
        c.prime_cutoff,
        c.seed,
        first.mean,
        first.std_error,
        batch.tail_estimate
    )])
}

fn charfn(c: &RunConfig) -> Result<Lines, CliError> {
    let curve = CharFn::new(c.epsilon, c.prime_cutoff)?.curve(&c.taus);
    artifact(c.out.join("charfn.csv"), |w| curve.write_csv(w))?;
    Ok(curve
        .points
        .iter()
        .map(|p| {
            format!(
                "tau={} re={} im={} tailEstimate={}",
                p.tau, p.value.re, p.value.im, p.tail_estimate
            )
        })
        .collect())
}

fn density(c: &RunConfig) -> Result<Lines, CliError> {
    let t = match c.inversion_cutoff {
        Some(t) => t,
        None => inversion_cutoff(&CharFn::new(c.epsilon, c.prime_cutoff)?),
    };
    let curve = density_from_charfn(c.epsilon, &c.grid(), t, c.prime_cutoff)?;
    artifact(c.out.join("density.csv"), |w| curve.write_csv(w))?;
    Ok(vec![format!(
        "T={t} panels={} points={} integral={} min={} refinementChange={}",
        curve.panels,
        curve.grid.len(),
        curve.integral(),
        curve.min_value(),
        curve.refinement_change
    )])
}

fn compare(c: &RunConfig) -> Result<Lines, CliError> {
    let sweeps = sweeps(c)?;
    let report = discrepancy_report(&sweeps, &settings(c)?.model_batch()?)?;
    artifact(c.out.join("discrepancy.csv"), |w| report.write_csv(w))?;
    artifact(c.out.join("discrepancy.json"), |w| report.write_json(w))?;
    Ok(report
        .rows
        .iter()
        .map(|r| {
            format!(
                "N={} lambda={} ks={} benchmark={} ratio={} flagged={}",
                r.n, r.lambda, r.ks, r.benchmark, r.ratio, r.flagged
            )
        })
        .collect())
}

fn moments(c: &RunConfig) -> Result<Lines, CliError> {
    let s = settings(c)?;
    let n = *c.bounds.last().expect("resolved N list is nonempty");
    let report = moment_compare(&c.ks, &s.sweep(n)?, &s)?;
    artifact(c.out.join("moments.csv"), |w| report.write_csv(w))?;
    artifact(c.out.join("moments.json"), |w| report.write_json(w))?;
    Ok(report
        .rows
        .iter()
        .map(|r| {
            format!(
                "N={n} k={} family={} model={} mc={} gapRoot={} benchmark={}",
                r.k, r.family_moment, r.model_moment, r.mc_moment, r.gap_root, r.benchmark
            )
        })
        .collect())
}

fn tails(c: &RunConfig) -> Result<Lines, CliError> {
    let report = tail_report(&sweeps(c)?, c.epsilon)?;
    artifact(c.out.join("tails.csv"), |w| report.write_csv(w))?;
    artifact(c.out.join("tails.json"), |w| report.write_json(w))?;
    Ok(report
        .rows
        .iter()
        .map(|r| {
            format!(
                "N={} threshold={} frequency={}",
                r.n, r.threshold, r.frequency
            )
        })
        .collect())
}

fn minima(c: &RunConfig) -> Result<Lines, CliError> {
    let report = minima_report(&sweeps(c)?, c.epsilon)?;
    artifact(c.out.join("minima.csv"), |w| report.write_csv(w))?;
    artifact(c.out.join("minima.json"), |w| report.write_json(w))?;
    Ok(report
        .rows
        .iter()
        .map(|r| {
            format!(
                "N={} D={} minAbs={} ratio={}",
                r.n, r.discriminant, r.min_abs, r.ratio
            )
        })
        .collect())
}

/// Flushes summary lines to stdout.
pub fn print_lines(lines: &[String]) -> std::io::Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for l in lines {
        writeln!(out, "{l}")?;
    }
    out.flush()
}
