use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use super::{full_reference, run_pipeline_on, BenchRecord, DataSource, PipelineConfig, SampleSize};
use crate::datagen::{DatasetSpec, Family};
use crate::error::{Error, Result};
use crate::leverage::exact_scores;
use crate::sampling::SamplingMethod;

/// Grid description, read from TOML:
///
/// ```toml
/// delta = 1e-9
/// methods = ["det", "uniform"]
/// s_fractions = [0.001, 0.01]
/// seeds = [1, 2]
///
/// [[datasets]]
/// family = "rotated-cauchy"
/// n = 10000
/// d = 10
/// ```
///
/// A dataset either names a generator `family` (seeded by each sweep seed) or
/// a matrix `path`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub methods: Vec<String>,
    #[serde(default)]
    pub s_fractions: Vec<f64>,
    #[serde(default)]
    pub epsilons: Vec<f64>,
    pub seeds: Vec<u64>,
    pub datasets: Vec<SweepDataset>,
    #[serde(default)]
    pub out_csv: Option<PathBuf>,
}

fn default_delta() -> f64 {
    1e-9
}

fn default_alpha() -> f64 {
    0.5
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepDataset {
    #[serde(default)]
    pub family: Option<String>,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub n: usize,
    #[serde(default)]
    pub d: usize,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub eta: Option<f64>,
}

impl SweepDataset {
    fn source(&self, seed: u64) -> Result<DataSource> {
        match (&self.family, &self.path) {
            (Some(family), None) => {
                let mut spec = DatasetSpec::new(family.parse::<Family>()?, self.n, self.d, seed);
                if let Some(sigma) = self.sigma {
                    spec = spec.with_param("sigma", sigma)?;
                }
                if let Some(eta) = self.eta {
                    spec = spec.with_param("eta", eta)?;
                }
                Ok(DataSource::Generated(spec))
            }
            (None, Some(path)) => Ok(DataSource::Path(path.clone())),
            _ => Err(Error::InvalidArgument(
                "a sweep dataset needs exactly one of `family` or `path`".into(),
            )),
        }
    }
}

pub fn load_sweep_config(path: impl AsRef<Path>) -> Result<SweepConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::Format {
        line: 0,
        column: 0,
        message: format!("{}: {e}", path.display()),
    })
}

impl SweepConfig {
    fn cells(&self) -> Result<Vec<(SamplingMethod, SampleSize)>> {
        let methods = self
            .methods
            .iter()
            .map(|m| m.parse())
            .collect::<Result<Vec<SamplingMethod>>>()?;
        let sizes: Vec<SampleSize> = self
            .s_fractions
            .iter()
            .map(|&f| SampleSize::Fraction(f))
            .chain(self.epsilons.iter().map(|&e| SampleSize::Epsilon(e)))
            .collect();
        let cells: Vec<_> = methods
            .iter()
            .flat_map(|&m| sizes.iter().map(move |&s| (m, s)))
            .collect();
        if cells.is_empty() || self.seeds.is_empty() || self.datasets.is_empty() {
            return Err(Error::InvalidArgument("sweep grid is empty".into()));
        }
        Ok(cells)
    }
}

/// Runs every dataset x seed x method x size cell and streams the records to
/// `out` as CSV, in grid order.
///
/// The full problem is solved once per dataset and seed. Cells of one group
/// run in parallel (at most `MVCE_THREADS` threads when set); each group is
/// flushed before the next starts. A failing cell becomes a record with the
/// `error` column filled in.
pub fn run_sweep<W: Write>(cfg: &SweepConfig, out: W) -> Result<Vec<BenchRecord>> {
    let cells = cfg.cells()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(threads) = std::env::var("MVCE_THREADS").ok().and_then(|v| v.parse().ok()) {
        pool = pool.num_threads(threads);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;

    let mut writer = csv::Writer::from_writer(out);
    let mut records = Vec::new();
    for dataset in &cfg.datasets {
        for &seed in &cfg.seeds {
            let source = dataset.source(seed)?;
            let name = source.name();
            let prepared = source.load().and_then(|x| {
                let full = full_reference(&x, cfg.delta, seed)?;
                let exact = exact_scores(&x)?;
                Ok((x, full, exact))
            });
            let group: Vec<BenchRecord> = pool.install(|| {
                cells
                    .par_iter()
                    .map(|&(method, size)| {
                        let mut pc = PipelineConfig::new(source.clone(), method, size);
                        pc.delta = cfg.delta;
                        pc.alpha = cfg.alpha;
                        pc.seed = seed;
                        match &prepared {
                            Ok((x, full, exact)) => run_pipeline_on(x, &name, &pc, full, exact)
                                .unwrap_or_else(|e| {
                                    BenchRecord::failed(name.clone(), method, &pc, Some(x), &e)
                                }),
                            Err(e) => BenchRecord::failed(name.clone(), method, &pc, None, e),
                        }
                    })
                    .collect()
            });
            for r in &group {
                writer.serialize(r)?;
            }
            writer.flush().map_err(|e| Error::io("<sweep output>", e))?;
            records.extend(group);
        }
    }
    Ok(records)
}

pub fn run_sweep_to_path(cfg: &SweepConfig, path: impl AsRef<Path>) -> Result<Vec<BenchRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    run_sweep(cfg, file)
}
