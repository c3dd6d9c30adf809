use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mvce::bench::{
    check_bounds, load_sweep_config, read_records, run_pipeline, run_sweep_to_path, DataSource,
    PipelineConfig, SampleSize,
};
use mvce::datagen::{generate, DatasetSpec, Family};
use mvce::io::{load_matrix, save_matrix, MatrixFormat};
use mvce::leverage::{approx_leverage, exact_leverage, LeverageMode};
use mvce::sampling::{
    sample_deterministic, sample_deterministic_approx, sample_proportional, sample_top,
    sample_uniform, SamplingMethod,
};
use mvce::solver::{
    init_khachiyan, init_kumar_yildirim, solve_fixed_point, solve_wolfe_atwood, SolveOptions,
};
use mvce::{DataMatrix, Error, Result};

#[derive(Parser)]
#[command(name = "mvce", version, about = "Minimum volume covering ellipsoids via leverage-score coresets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset.
    Gen {
        #[command(flatten)]
        data: GenArgs,
        /// Output path; `.csv` for CSV, anything else for binary.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute leverage scores.
    Lev {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Select coreset rows.
    Sample {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_parser = parse_method)]
        method: SamplingMethod,
        #[arg(long, conflicts_with = "s_frac")]
        epsilon: Option<f64>,
        #[arg(long)]
        s_frac: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the centred problem on a matrix.
    Solve {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-7)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = Init::Ky)]
        init: Init,
        #[arg(long, value_enum, default_value_t = Algo::Wa)]
        algo: Algo,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the sampled pipeline once against a full solve.
    Pipeline {
        #[arg(long = "in", conflicts_with = "family")]
        input: Option<PathBuf>,
        #[command(flatten)]
        data: OptGenArgs,
        #[arg(long, value_parser = parse_method, default_value = "det")]
        method: SamplingMethod,
        #[arg(long, conflicts_with = "s_frac")]
        epsilon: Option<f64>,
        #[arg(long)]
        s_frac: Option<f64>,
        #[arg(long, default_value_t = 1e-9)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        leverage: Mode,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run a grid of pipelines from a TOML file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_csv: Option<PathBuf>,
    },
    /// Check sweep records against the gap bounds.
    VerifyBounds {
        #[arg(long)]
        csv: PathBuf,
    },
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long, value_parser = parse_family)]
    family: Family,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Family parameter, e.g. `sigma=2` or `eta=1`.
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
}

#[derive(clap::Args)]
struct OptGenArgs {
    #[arg(long, value_parser = parse_family, requires_all = ["n", "d"])]
    family: Option<Family>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Approx,
}

#[derive(Clone, Copy, ValueEnum)]
enum Init {
    Ky,
    Khachiyan,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Wa,
    Fp,
}

fn parse_family(s: &str) -> std::result::Result<Family, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_method(s: &str) -> std::result::Result<SamplingMethod, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_param(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected key=value")?;
    let v = v.parse().map_err(|_| format!("bad number in {s:?}"))?;
    Ok((k.to_string(), v))
}

fn spec(family: Family, n: usize, d: usize, seed: u64, params: &[(String, f64)]) -> Result<DatasetSpec> {
    params
        .iter()
        .try_fold(DatasetSpec::new(family, n, d, seed), |s, (k, v)| s.with_param(k, *v))
}

fn load(path: &PathBuf) -> Result<DataMatrix> {
    load_matrix(path, MatrixFormat::from_path(path))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Gen { data, out } => {
            let spec = spec(data.family, data.n, data.d, data.seed, &data.params)?;
            let x = generate(&spec)?;
            save_matrix(&x, &out, MatrixFormat::from_path(&out))?;
            println!("{spec}");
        }
        Command::Lev { input, mode, alpha, seed, out } => {
            let x = load(&input)?;
            let profile = match mode {
                Mode::Exact => exact_leverage(&x)?,
                Mode::Approx => approx_leverage(&x, alpha, seed)?,
            };
            profile.save_csv(&out)?;
            println!("rows={} sum={}", profile.len(), profile.sum());
        }
        Command::Sample { input, method, epsilon, s_frac, alpha, seed, out } => {
            let x = load(&input)?;
            let (n, d) = (x.nrows(), x.ncols());
            let size = s_frac.map(|f| ((f * n as f64).round() as usize).clamp(d, n));
            let selection = match (method, epsilon, size) {
                (SamplingMethod::Uniform, _, Some(s)) => sample_uniform(n, d, s, seed)?,
                (SamplingMethod::Proportional, _, Some(s)) => {
                    sample_proportional(&exact_leverage(&x)?, s, seed)?
                }
                (SamplingMethod::Deterministic, Some(e), _) => sample_deterministic(&exact_leverage(&x)?, e)?,
                (SamplingMethod::Deterministic, None, Some(s)) => sample_top(&exact_leverage(&x)?, s)?,
                (SamplingMethod::DeterministicApprox, Some(e), _) => {
                    sample_deterministic_approx(&approx_leverage(&x, alpha, seed)?, e)?
                }
                (SamplingMethod::DeterministicApprox, None, Some(s)) => {
                    sample_top(&approx_leverage(&x, alpha, seed)?, s)?
                }
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "{method} sampling needs {}",
                        if method.is_deterministic() { "--epsilon or --s-frac" } else { "--s-frac" }
                    )))
                }
            };
            selection.save_csv(&out)?;
            println!("s={}", selection.len());
        }
        Command::Solve { input, delta, init, algo, seed, report } => {
            let x = load(&input)?;
            let u0 = match init {
                Init::Ky => init_kumar_yildirim(&x, seed)?,
                Init::Khachiyan => init_khachiyan(x.nrows()),
            };
            let opts = SolveOptions::new(delta);
            let sol = match algo {
                Algo::Wa => solve_wolfe_atwood(&x, u0, &opts)?,
                Algo::Fp => solve_fixed_point(&x, u0, &opts)?,
            };
            let text = sol.report();
            print!("{text}");
            if let Some(path) = report {
                std::fs::write(&path, text).map_err(|e| mvce::Error::Io { path, source: e })?;
            }
        }
        Command::Pipeline { input, data, method, epsilon, s_frac, delta, leverage, alpha, out_dir } => {
            let source = match (input, data.family) {
                (Some(p), _) => DataSource::Path(p),
                (None, Some(f)) => DataSource::Generated(spec(
                    f,
                    data.n.unwrap_or(0),
                    data.d.unwrap_or(0),
                    data.seed,
                    &data.params,
                )?),
                (None, None) => return Err(Error::InvalidArgument("need --in or --family".into())),
            };
            let size = match (epsilon, s_frac) {
                (Some(e), _) => SampleSize::Epsilon(e),
                (None, Some(f)) => SampleSize::Fraction(f),
                (None, None) => return Err(Error::InvalidArgument("need --epsilon or --s-frac".into())),
            };
            let mut cfg = PipelineConfig::new(source, method, size);
            cfg.delta = delta;
            cfg.alpha = alpha;
            cfg.seed = data.seed;
            cfg.out_dir = out_dir;
            cfg.leverage = match leverage {
                Mode::Exact => LeverageMode::Exact,
                Mode::Approx => LeverageMode::Approximate,
            };
            let r = run_pipeline(&cfg)?;
            println!(
                "dataset={}\nmethod={}\nn={}\nd={}\ns={}\nepsilon={}\ng_full={}\ng_sampled={}\ngap={}\nbound_thm2={}\nbound_thm3={}\nmax_violation={}\ntime_total_ms={:.3}\ntime_full_ms={:.3}",
                r.dataset, r.method, r.n, r.d, r.s, r.epsilon, r.g_full, r.g_sampled, r.gap,
                r.bound_thm2, r.bound_thm3, r.max_violation, r.time_total_ms, r.time_full_ms
            );
            if r.containment_warning() {
                eprintln!("warning: some point lies outside the sampled ellipsoid (max violation {})", r.max_violation);
            }
        }
        Command::Sweep { config, out_csv } => {
            let cfg = load_sweep_config(&config)?;
            let out = out_csv
                .or_else(|| cfg.out_csv.clone())
                .ok_or_else(|| Error::InvalidArgument("need --out-csv or out_csv in the config".into()))?;
            let records = run_sweep_to_path(&cfg, &out)?;
            let failed = records.iter().filter(|r| !r.error.is_empty()).count();
            println!("records={} failed={} out={}", records.len(), failed, out.display());
        }
        Command::VerifyBounds { csv } => {
            let report = check_bounds(&read_records(&csv)?);
            println!("{report}");
            if !report.passed() {
                return Err(Error::BoundViolation(format!(
                    "{} record(s) exceed their bounds",
                    report.violations().count()
                )));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::BoundViolation(_) => ExitCode::from(3),
                Error::InvalidArgument(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
