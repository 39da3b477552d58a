//! Sweep cache: `N=<N> eps=<ε> lambda=<λ> version=1`, then one
//! `D value consistencyGap flagged` line per evaluated discriminant.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{LogDerivValue, TruncationParams};
use crate::discriminant::{FamilySlice, FundamentalDiscriminant};
use crate::error::{Error, Result};

pub const SWEEP_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepHeader {
    pub bound: u64,
    pub epsilon: f64,
    pub lambda: f64,
    pub version: u32,
}

impl SweepHeader {
    pub fn new(bound: u64, params: &TruncationParams) -> Self {
        Self {
            bound,
            epsilon: params.epsilon(),
            lambda: params.lambda(),
            version: SWEEP_FORMAT_VERSION,
        }
    }

    pub fn render(&self) -> String {
        format!(
            "N={} eps={} lambda={} version={}",
            self.bound, self.epsilon, self.lambda, self.version
        )
    }

    pub fn parse(line: &str) -> Result<Self> {
        let mut bound = None;
        let mut epsilon = None;
        let mut lambda = None;
        let mut version = None;
        for field in line.split_whitespace() {
            match field.split_once('=') {
                Some(("N", v)) => bound = v.parse().ok(),
                Some(("eps", v)) => epsilon = v.parse().ok(),
                Some(("lambda", v)) => lambda = v.parse().ok(),
                Some(("version", v)) => version = v.parse().ok(),
                _ => return Err(Error::format("sweep header", line.to_string())),
            }
        }
        match (bound, epsilon, lambda, version) {
            (Some(bound), Some(epsilon), Some(lambda), Some(version)) => Ok(Self {
                bound,
                epsilon,
                lambda,
                version,
            }),
            _ => Err(Error::format("sweep header", line.to_string())),
        }
    }
}

fn render_line(v: &LogDerivValue) -> String {
    format!(
        "{} {} {} {}",
        v.discriminant,
        v.value,
        v.consistency_gap,
        u8::from(v.flagged)
    )
}

fn parse_line(line: &str, lambda: f64) -> Option<LogDerivValue> {
    let mut it = line.split(' ');
    let d: i64 = it.next()?.parse().ok()?;
    let value: f64 = it.next()?.parse().ok()?;
    let consistency_gap: f64 = it.next()?.parse().ok()?;
    let flagged = match it.next()? {
        "0" => false,
        "1" => true,
        _ => return None,
    };
    if it.next().is_some() {
        return None;
    }
    Some(LogDerivValue {
        discriminant: FundamentalDiscriminant::new(d).ok()?,
        value,
        lambda_used: lambda,
        consistency_gap,
        flagged,
    })
}

/// Reads a complete sweep file.
pub fn read_sweep_file(path: &Path) -> Result<(SweepHeader, Vec<LogDerivValue>)> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header = SweepHeader::parse(
        &lines
            .next()
            .ok_or_else(|| Error::format("sweep file", "missing header"))??,
    )?;
    let mut values = Vec::new();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        values.push(
            parse_line(&line, header.lambda)
                .ok_or_else(|| Error::format("sweep line", line.clone()))?,
        );
    }
    Ok((header, values))
}

/// CSV mirror of the sweep file: `D,value,consistencyGap,flagged`.
pub fn write_sweep_csv<W: Write>(mut w: W, values: &[LogDerivValue]) -> Result<()> {
    writeln!(w, "D,value,consistencyGap,flagged")?;
    for v in values {
        writeln!(
            w,
            "{},{},{},{}",
            v.discriminant,
            v.value,
            v.consistency_gap,
            u8::from(v.flagged)
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Append-only cache bound to one family and parameter set.
pub(super) struct SweepCache {
    writer: BufWriter<File>,
    completed: Vec<LogDerivValue>,
}

impl SweepCache {
    /// Opens or creates the cache. An existing file must carry the same
    /// header; its longest valid prefix (in family order) is kept and any
    /// torn trailing line is cut off.
    pub(super) fn open(
        path: &Path,
        family: &FamilySlice,
        params: &TruncationParams,
    ) -> Result<Self> {
        let header = SweepHeader::new(family.bound(), params);
        let mut completed = Vec::new();
        let mut keep_bytes = 0u64;
        if path.exists() {
            let mut text = String::new();
            File::open(path)?.read_to_string(&mut text)?;
            let mut offset = 0usize;
            let mut first = true;
            for piece in text.split_inclusive('\n') {
                if !piece.ends_with('\n') {
                    break;
                }
                let line = &piece[..piece.len() - 1];
                if first {
                    let found = SweepHeader::parse(line)?;
                    if found != header {
                        return Err(Error::format(
                            "sweep cache",
                            format!("header `{line}` does not match `{}`", header.render()),
                        ));
                    }
                    first = false;
                } else {
                    let expected = family.members().get(completed.len());
                    match parse_line(line, params.lambda()) {
                        Some(v) if Some(&v.discriminant) == expected => completed.push(v),
                        _ => break,
                    }
                }
                offset += piece.len();
            }
            if !first {
                keep_bytes = offset as u64;
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .read(true)
            .write(true)
            .open(path)?;
        file.set_len(keep_bytes)?;
        let mut writer = BufWriter::new(file);
        use std::io::Seek;
        writer.seek(std::io::SeekFrom::Start(keep_bytes))?;
        if keep_bytes == 0 {
            writeln!(writer, "{}", header.render())?;
            writer.flush()?;
        }
        Ok(Self { writer, completed })
    }

    pub(super) fn take_completed(&mut self) -> Vec<LogDerivValue> {
        std::mem::take(&mut self.completed)
    }

    pub(super) fn append(&mut self, values: &[LogDerivValue]) -> Result<()> {
        for v in values {
            writeln!(self.writer, "{}", render_line(v))?;
        }
        self.writer.flush()?;
        Ok(())
    }
}
