//! Seeded synthetic datasets.
//!
//! Rows are produced in blocks of [`BLOCK_ROWS`], each from its own ChaCha
//! stream, so the output does not depend on how many threads generate it.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::leverage::exact_scores;
use crate::linalg::DataMatrix;

pub const BLOCK_ROWS: usize = 4096;

/// Largest leverage a power-law target may ask for.
const LEVERAGE_CAP: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// Uniform direction, radius `|Cauchy|`.
    RotatedCauchy,
    /// Entries `exp(N(0, sigma^2))`.
    Lognormal,
    /// Entries `N(0, 1)`.
    Gaussian,
    /// Rows scaled so the sorted leverage decays like `i^{-(1 + eta)}`.
    PowerLawLeverage,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::RotatedCauchy,
        Family::Lognormal,
        Family::Gaussian,
        Family::PowerLawLeverage,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Family::RotatedCauchy => "rotated-cauchy",
            Family::Lognormal => "lognormal",
            Family::Gaussian => "gaussian",
            Family::PowerLawLeverage => "power-law-leverage",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn format_error(message: String) -> Error {
    Error::Format {
        line: 0,
        column: 0,
        message,
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rotated-cauchy" | "cauchy" => Ok(Family::RotatedCauchy),
            "lognormal" => Ok(Family::Lognormal),
            "gaussian" => Ok(Family::Gaussian),
            "power-law-leverage" | "power-law" => Ok(Family::PowerLawLeverage),
            other => Err(format_error(format!("unknown dataset family {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetSpec {
    pub family: Family,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    /// Lognormal log-scale.
    pub sigma: f64,
    /// Power-law decay exponent offset.
    pub eta: f64,
}

impl DatasetSpec {
    pub fn new(family: Family, n: usize, d: usize, seed: u64) -> Self {
        Self {
            family,
            n,
            d,
            seed,
            sigma: 2.0,
            eta: 1.0,
        }
    }

    /// Sets a family parameter by name (`sigma` or `eta`).
    pub fn with_param(mut self, key: &str, value: f64) -> Result<Self> {
        match key {
            "sigma" => self.sigma = value,
            "eta" => self.eta = value,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown dataset parameter {other:?}"
                )))
            }
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n < self.d {
            return Err(Error::Dimension(format!(
                "need n >= d >= 1, got n = {}, d = {}",
                self.n, self.d
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("sigma = {}", self.sigma)));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidArgument(format!("eta = {}", self.eta)));
        }
        Ok(())
    }
}

/// One-line summary, e.g. `gaussian n=1000 d=10 seed=7`. Parsed back by
/// `DatasetSpec::from_str`.
pub fn describe(spec: &DatasetSpec) -> String {
    spec.to_string()
}

impl fmt::Display for DatasetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} n={} d={} seed={}", self.family, self.n, self.d, self.seed)?;
        match self.family {
            Family::Lognormal => write!(f, " sigma={}", self.sigma),
            Family::PowerLawLeverage => write!(f, " eta={}", self.eta),
            _ => Ok(()),
        }
    }
}

impl FromStr for DatasetSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut words = s.split_whitespace();
        let family: Family = words
            .next()
            .ok_or_else(|| format_error("empty dataset description".into()))?
            .parse()?;
        let mut spec = DatasetSpec::new(family, 0, 0, 0);
        let (mut has_n, mut has_d) = (false, false);
        for word in words {
            let (key, value) = word
                .split_once('=')
                .ok_or_else(|| format_error(format!("expected key=value, got {word:?}")))?;
            let bad = |_| format_error(format!("bad value in {word:?}"));
            match key {
                "n" => {
                    spec.n = value.parse().map_err(bad)?;
                    has_n = true;
                }
                "d" => {
                    spec.d = value.parse().map_err(bad)?;
                    has_d = true;
                }
                "seed" => spec.seed = value.parse().map_err(bad)?,
                "sigma" | "eta" => {
                    let v: f64 = value.parse().map_err(|_| format_error(format!("bad value in {word:?}")))?;
                    spec = spec.with_param(key, v)?;
                }
                other => return Err(format_error(format!("unknown field {other:?}"))),
            }
        }
        if !(has_n && has_d) {
            return Err(format_error(format!("{s:?} is missing n or d")));
        }
        Ok(spec)
    }
}

pub fn generate(spec: &DatasetSpec) -> Result<DataMatrix> {
    spec.validate()?;
    let (n, d) = (spec.n, spec.d);
    let mut values = vec![0.0; n * d];
    values
        .par_chunks_mut(BLOCK_ROWS * d)
        .enumerate()
        .for_each(|(block, chunk)| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(block as u64);
            fill_block(spec, chunk, &mut rng);
        });
    let x = DataMatrix::new(n, d, values)?;
    match spec.family {
        Family::PowerLawLeverage => shape_power_law(&x, spec),
        _ => Ok(x),
    }
}

fn fill_block(spec: &DatasetSpec, chunk: &mut [f64], rng: &mut ChaCha8Rng) {
    let d = spec.d;
    match spec.family {
        Family::Gaussian | Family::PowerLawLeverage => {
            chunk.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        }
        Family::Lognormal => {
            chunk.iter_mut().for_each(|v| {
                let z: f64 = rng.sample(StandardNormal);
                *v = (spec.sigma * z).exp();
            });
        }
        Family::RotatedCauchy => {
            for row in chunk.chunks_mut(d) {
                let mut norm2 = 0.0;
                for v in row.iter_mut() {
                    *v = rng.sample(StandardNormal);
                    norm2 += *v * *v;
                }
                let u: f64 = rng.random();
                let radius = (PI * (u - 0.5)).tan().abs();
                let scale = radius / norm2.sqrt();
                row.iter_mut().for_each(|v| *v *= scale);
            }
        }
    }
}

/// Target scores `c i^{-(1 + eta)}` summing to `d`, capped at
/// [`LEVERAGE_CAP`] with the excess spread over the uncapped tail.
pub fn power_law_targets(n: usize, d: usize, eta: f64) -> Vec<f64> {
    let raw: Vec<f64> = (1..=n).map(|i| (i as f64).powf(-(1.0 + eta))).collect();
    let mut capped = 0;
    loop {
        let free: f64 = raw[capped..].iter().sum();
        let c = (d as f64 - LEVERAGE_CAP * capped as f64) / free;
        if capped < n && c * raw[capped] > LEVERAGE_CAP {
            capped += 1;
            continue;
        }
        return (0..n)
            .map(|i| if i < capped { LEVERAGE_CAP } else { c * raw[i] })
            .collect();
    }
}

/// Rescales rows of a Gaussian matrix until its leverage matches the
/// power-law targets, assigns targets to rows in a seeded random order, and
/// applies a random rotation on the right.
fn shape_power_law(x: &DataMatrix, spec: &DatasetSpec) -> Result<DataMatrix> {
    let (n, d) = (spec.n, spec.d);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(u64::MAX);

    let sorted = power_law_targets(n, d, spec.eta);
    let mut slots: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        slots.swap(i, j);
    }
    let mut target = vec![0.0; n];
    for (rank, &row) in slots.iter().enumerate() {
        target[row] = sorted[rank];
    }

    let mut y = x.clone();
    for _ in 0..2000 {
        let lev = exact_scores(&y)?;
        let mut worst: f64 = 0.0;
        let scales: Vec<f64> = lev
            .iter()
            .zip(&target)
            .map(|(l, t)| {
                worst = worst.max((l / t - 1.0).abs());
                (t / l).sqrt()
            })
            .collect();
        if worst < 1e-8 {
            break;
        }
        y = y.scale_rows(&scales)?;
        // Keep the overall magnitude near one; leverage is scale invariant.
        let max = y.as_slice().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        y = y.scaled(1.0 / max)?;
    }

    let g = DMatrix::<f64>::from_fn(d, d, |_, _| rng.sample(StandardNormal));
    let rotation = g.qr().q();
    y.mul_right(&rotation)
}
