//! Threshold coresets and the spectral guarantee they carry.

use mvce::datagen::{generate, DatasetSpec, Family};
use mvce::leverage::exact_leverage;
use mvce::linalg::{extreme_gen_eigs, gram};
use mvce::sampling::{predict_sample_size, sample_deterministic, sample_uniform};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let x = generate(&DatasetSpec::new(Family::Lognormal, 10_000, 6, 3))?;
    let full = gram(&x, None)?;
    let profile = exact_leverage(&x)?;

    println!("epsilon      s   lambda_min  lambda_max");
    for epsilon in [0.9, 0.5, 0.1, 0.01] {
        let sel = sample_deterministic(&profile, epsilon)?;
        let xs = x.select_rows(&sel.indices)?;
        let (lo, hi) = extreme_gen_eigs(&gram(&xs, None)?, &full)?;
        println!("{epsilon:>7} {:>6} {lo:>11.6} {hi:>11.6}", sel.len());
        assert!(lo > 1.0 - epsilon && hi <= 1.0 + 1e-10);
    }

    // A uniform sample of the same size keeps far less of the spectrum.
    let det = sample_deterministic(&profile, 0.1)?;
    let uni = sample_uniform(x.nrows(), x.ncols(), det.len(), 11)?;
    let xu = x.select_rows(&uni.indices)?;
    let (lo, _) = extreme_gen_eigs(&gram(&xu, None)?, &full)?;
    println!("uniform sample of {} rows: lambda_min {lo:.6}", uni.len());

    println!(
        "predicted size for d = 100, epsilon = 0.5 under l(i) ~ 1/i^2: {}",
        predict_sample_size(100, 0.5, 1.0, 0.0)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
