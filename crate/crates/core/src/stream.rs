//! Observed event streams and their plain-text file format.
//!
//! ```text
//! # hawkes-stream T=<float> seed=<int>
//! 1.2345678901234567e0
//! ...
//! ```
//! One event time per line with 17 significant digits.

use std::io::{BufRead, Write};

use crate::error::{HawkesError, Result};
use crate::scalar::Real;

const HEADER_TAG: &str = "# hawkes-stream";

/// Event times `0 < t_1 < … < t_n ≤ T` observed on the window `(0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventStream<T> {
    times: Vec<T>,
    horizon: T,
    seed: u64,
}

impl<T: Real> EventStream<T> {
    pub fn new(times: Vec<T>, horizon: T, seed: u64) -> Result<Self> {
        if !(horizon > T::zero()) || !horizon.is_finite() {
            return Err(HawkesError::param(
                "T",
                format!("horizon must be finite and > 0, got {horizon}"),
            ));
        }
        let mut prev = T::zero();
        for (i, &t) in times.iter().enumerate() {
            if !t.is_finite() || t <= prev {
                return Err(HawkesError::InvalidInput(format!(
                    "event {} at {t} is not strictly after the previous time {prev}",
                    i + 1
                )));
            }
            prev = t;
        }
        if prev > horizon {
            return Err(HawkesError::InvalidInput(format!(
                "last event {prev} lies beyond the horizon {horizon}"
            )));
        }
        Ok(Self { times, horizon, seed })
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `n / T`.
    pub fn empirical_rate(&self) -> T {
        T::from_usize_lossy(self.len()) / self.horizon
    }

    /// The stream restricted to `(0, horizon]`.
    pub fn truncated(&self, horizon: T) -> Result<Self> {
        let times = self.times.iter().copied().take_while(|&t| t <= horizon).collect();
        Self::new(times, horizon, self.seed)
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "{HEADER_TAG} T={:.16e} seed={}",
            self.horizon.to_f64_lossy(),
            self.seed
        )?;
        for t in &self.times {
            writeln!(out, "{:.16e}", t.to_f64_lossy())?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let (horizon, seed) = loop {
            let Some((idx, line)) = lines.next() else {
                return Err(HawkesError::Parse {
                    line: 1,
                    message: "missing stream header".into(),
                });
            };
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            break parse_header(&line).map_err(|message| HawkesError::Parse { line: idx + 1, message })?;
        };
        let mut times = Vec::new();
        for (idx, line) in lines {
            let line = line?;
            let s = line.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            let v: f64 = s.parse().map_err(|e| HawkesError::Parse {
                line: idx + 1,
                message: format!("bad event time `{s}`: {e}"),
            })?;
            times.push(T::lit(v));
        }
        Self::new(times, T::lit(horizon), seed)
    }
}

fn parse_header(line: &str) -> std::result::Result<(f64, u64), String> {
    let rest = line
        .trim()
        .strip_prefix(HEADER_TAG)
        .ok_or_else(|| format!("expected header starting with `{HEADER_TAG}`"))?;
    let mut horizon = None;
    let mut seed = 0;
    for field in rest.split_whitespace() {
        match field.split_once('=') {
            Some(("T", v)) => horizon = Some(v.parse::<f64>().map_err(|e| format!("bad T `{v}`: {e}"))?),
            Some(("seed", v)) => seed = v.parse::<u64>().map_err(|e| format!("bad seed `{v}`: {e}"))?,
            _ => return Err(format!("unrecognised header field `{field}`")),
        }
    }
    horizon
        .map(|h| (h, seed))
        .ok_or_else(|| "header lacks T=<float>".to_string())
}
