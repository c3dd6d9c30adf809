//! End-to-end sampled pipeline and the experiment harness around it.

mod sweep;
mod verify;

pub use sweep::{load_sweep_config, run_sweep, run_sweep_to_path, SweepConfig, SweepDataset};
pub use verify::{check_bounds, read_records, verify_bounds, BoundCheck, BoundsReport};

use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::datagen::{describe, generate, DatasetSpec};
use crate::error::{Error, Result};
use crate::io::{load_matrix, MatrixFormat};
use crate::leverage::{approx_leverage, exact_leverage, exact_scores, LeverageMode, LeverageProfile};
use crate::linalg::{gram, log_det, DataMatrix};
use crate::sampling::{
    sample_deterministic, sample_deterministic_approx, sample_proportional, sample_top,
    sample_uniform, SampleSelection, SamplingMethod,
};
use crate::solver::{
    bound_final_gap, bound_initial_gap, centered_ellipsoid, init_kumar_yildirim,
    solve_wolfe_atwood, SolveOptions,
};

/// Where the pipeline reads its points from.
#[derive(Clone, Debug, PartialEq)]
pub enum DataSource {
    Path(PathBuf),
    Generated(DatasetSpec),
}

impl DataSource {
    pub fn name(&self) -> String {
        match self {
            DataSource::Path(p) => p.display().to_string(),
            DataSource::Generated(spec) => describe(spec),
        }
    }

    pub fn load(&self) -> Result<DataMatrix> {
        match self {
            DataSource::Path(p) => load_matrix(p, MatrixFormat::from_path(p)),
            DataSource::Generated(spec) => generate(spec),
        }
    }
}

/// How many rows to keep: a leverage threshold or a fraction of `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SampleSize {
    Epsilon(f64),
    Fraction(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub source: DataSource,
    pub size: SampleSize,
    pub delta: f64,
    pub method: SamplingMethod,
    /// Leverage used by `prop`; `det-approx` always uses sketched scores.
    pub leverage: LeverageMode,
    pub alpha: f64,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn new(source: DataSource, method: SamplingMethod, size: SampleSize) -> Self {
        Self {
            source,
            size,
            delta: 1e-9,
            method,
            leverage: LeverageMode::Exact,
            alpha: 0.5,
            seed: 0,
            out_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} = {v} not in (0, 1)")))
            }
        };
        unit("delta", self.delta)?;
        match self.size {
            SampleSize::Epsilon(e) => unit("epsilon", e)?,
            SampleSize::Fraction(f) if !(f > 0.0 && f <= 1.0) => {
                return Err(Error::InvalidArgument(format!("s_fraction = {f} not in (0, 1]")))
            }
            SampleSize::Fraction(_) => {}
        }
        if matches!(self.size, SampleSize::Epsilon(_))
            && matches!(self.method, SamplingMethod::Uniform | SamplingMethod::Proportional)
        {
            return Err(Error::InvalidArgument(format!(
                "{} sampling needs a sample fraction, not epsilon",
                self.method
            )));
        }
        if self.method == SamplingMethod::DeterministicApprox || self.leverage == LeverageMode::Approximate {
            unit("alpha", self.alpha)?;
        }
        Ok(())
    }
}

/// One pipeline run. Objectives are `log det` of the weighted second-moment
/// matrix; `gap = g_full - g_sampled`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub dataset: String,
    pub method: String,
    pub n: usize,
    pub d: usize,
    pub s: usize,
    /// Threshold used for the bounds: the configured one, or the exact
    /// leverage mass of the rows left out when the run was size driven.
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub g_full: f64,
    pub g_sampled: f64,
    pub gap: f64,
    /// Objective at equal weights on the sampled rows.
    pub g_init: f64,
    pub bound_thm2: f64,
    pub bound_thm3: f64,
    /// Largest `x^T Q x / d - 1` over all `n` rows for the sampled ellipsoid.
    pub max_violation: f64,
    pub iterations: usize,
    pub time_lev_ms: f64,
    pub time_sample_ms: f64,
    pub time_solve_ms: f64,
    pub time_total_ms: f64,
    pub time_full_ms: f64,
    pub error: String,
}

impl BenchRecord {
    /// Copy with every timing column zeroed, for comparing runs.
    pub fn without_times(&self) -> Self {
        Self {
            time_lev_ms: 0.0,
            time_sample_ms: 0.0,
            time_solve_ms: 0.0,
            time_total_ms: 0.0,
            time_full_ms: 0.0,
            ..self.clone()
        }
    }

    /// True when some point lies outside the sampled ellipsoid by more than
    /// the certificate allows.
    pub fn containment_warning(&self) -> bool {
        self.max_violation > self.delta + 1e-9
    }

    fn failed(dataset: String, method: SamplingMethod, cfg: &PipelineConfig, x: Option<&DataMatrix>, err: &Error) -> Self {
        let nan = f64::NAN;
        Self {
            dataset,
            method: method.to_string(),
            n: x.map_or(0, |x| x.nrows()),
            d: x.map_or(0, |x| x.ncols()),
            s: 0,
            epsilon: match cfg.size {
                SampleSize::Epsilon(e) => e,
                SampleSize::Fraction(_) => nan,
            },
            delta: cfg.delta,
            seed: cfg.seed,
            g_full: nan,
            g_sampled: nan,
            gap: nan,
            g_init: nan,
            bound_thm2: nan,
            bound_thm3: nan,
            max_violation: nan,
            iterations: 0,
            time_lev_ms: 0.0,
            time_sample_ms: 0.0,
            time_solve_ms: 0.0,
            time_total_ms: 0.0,
            time_full_ms: 0.0,
            error: err.to_string(),
        }
    }
}

/// Optimal value of the full problem, solved by Wolfe-Atwood from a
/// Kumar-Yildirim start.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FullReference {
    pub objective: f64,
    pub time_ms: f64,
    pub iterations: usize,
}

pub fn full_reference(x: &DataMatrix, delta: f64, seed: u64) -> Result<FullReference> {
    let start = Instant::now();
    let u0 = init_kumar_yildirim(x, seed)?;
    let sol = solve_wolfe_atwood(x, u0, &SolveOptions::new(delta))?;
    Ok(FullReference {
        objective: sol.objective(),
        time_ms: ms(start),
        iterations: sol.certificate.iterations,
    })
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Loads the data, solves the full problem for reference, and runs the
/// sampled pipeline.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<BenchRecord> {
    cfg.validate()?;
    let x = cfg.source.load()?;
    let full = full_reference(&x, cfg.delta, cfg.seed)?;
    let exact = exact_scores(&x)?;
    let record = run_pipeline_on(&x, &cfg.source.name(), cfg, &full, &exact)?;
    if let Some(dir) = &cfg.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join("pipeline.csv");
        let mut w = csv::Writer::from_path(&path)?;
        w.serialize(&record)?;
        w.flush().map_err(|e| Error::io(&path, e))?;
    }
    Ok(record)
}

/// The sampled pipeline on an already loaded matrix: leverage, selection,
/// Wolfe-Atwood on the selected rows, and a containment check of every row
/// against the resulting ellipsoid.
///
/// `exact` holds the exact leverage scores of `x`; they only feed the
/// reported `epsilon` and are never timed.
pub fn run_pipeline_on(
    x: &DataMatrix,
    dataset: &str,
    cfg: &PipelineConfig,
    full: &FullReference,
    exact: &[f64],
) -> Result<BenchRecord> {
    cfg.validate()?;
    let (n, d) = (x.nrows(), x.ncols());
    let start = Instant::now();

    let profile = match cfg.method {
        SamplingMethod::Uniform => None,
        SamplingMethod::DeterministicApprox => Some(approx_leverage(x, cfg.alpha, cfg.seed)?),
        SamplingMethod::Proportional if cfg.leverage == LeverageMode::Approximate => {
            Some(approx_leverage(x, cfg.alpha, cfg.seed)?)
        }
        _ => Some(exact_leverage(x)?),
    };
    let time_lev_ms = ms(start);

    let t = Instant::now();
    let selection = select(cfg, profile.as_ref(), n, d)?;
    let time_sample_ms = ms(t);

    let t = Instant::now();
    let xs = x.select_rows(&selection.indices)?;
    let u0 = init_kumar_yildirim(&xs, cfg.seed)?;
    let sol = solve_wolfe_atwood(&xs, u0, &SolveOptions::new(cfg.delta))?;
    let ellipsoid = centered_ellipsoid(&sol.state)?;
    let time_solve_ms = ms(t);
    let time_total_ms = ms(start);

    let s = selection.len();
    let epsilon = match cfg.size {
        SampleSize::Epsilon(e) => e,
        SampleSize::Fraction(_) => left_out_mass(exact, &selection.indices, d),
    };
    let g_init = log_det(&gram(&xs, None)?)? - d as f64 * (s as f64).ln();
    let g_sampled = sol.objective();
    let record = BenchRecord {
        dataset: dataset.to_string(),
        method: cfg.method.to_string(),
        n,
        d,
        s,
        epsilon,
        delta: cfg.delta,
        seed: cfg.seed,
        g_full: full.objective,
        g_sampled,
        gap: full.objective - g_sampled,
        g_init,
        bound_thm2: bound_initial_gap(d, s, epsilon),
        bound_thm3: bound_final_gap(d, epsilon, cfg.delta),
        max_violation: ellipsoid.max_violation(x),
        iterations: sol.certificate.iterations,
        time_lev_ms,
        time_sample_ms,
        time_solve_ms,
        time_total_ms,
        time_full_ms: full.time_ms,
        error: String::new(),
    };
    if let Some(dir) = &cfg.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        selection.save_csv(dir.join("selection.csv"))?;
        if let Some(p) = &profile {
            p.save_csv(dir.join("leverage.csv"))?;
        }
    }
    Ok(record)
}

fn select(
    cfg: &PipelineConfig,
    profile: Option<&LeverageProfile>,
    n: usize,
    d: usize,
) -> Result<SampleSelection> {
    let size = |f: f64| ((f * n as f64).round() as usize).clamp(d, n);
    match (cfg.method, cfg.size, profile) {
        (SamplingMethod::Uniform, SampleSize::Fraction(f), _) => sample_uniform(n, d, size(f), cfg.seed),
        (SamplingMethod::Proportional, SampleSize::Fraction(f), Some(p)) => {
            sample_proportional(p, size(f), cfg.seed)
        }
        (SamplingMethod::Deterministic, SampleSize::Epsilon(e), Some(p)) => sample_deterministic(p, e),
        (SamplingMethod::DeterministicApprox, SampleSize::Epsilon(e), Some(p)) => {
            sample_deterministic_approx(p, e)
        }
        (_, SampleSize::Fraction(f), Some(p)) => sample_top(p, size(f)),
        (method, _, _) => Err(Error::InvalidArgument(format!(
            "{method} sampling needs a sample fraction"
        ))),
    }
}

/// `d - sum_{i in S} l_i`, the exact leverage carried by the rows not kept,
/// clamped at zero.
fn left_out_mass(exact: &[f64], kept: &[usize], d: usize) -> f64 {
    let inside: f64 = kept.iter().map(|&i| exact[i]).sum();
    (d as f64 - inside).max(0.0)
}
