//! Sampled versus full optimal values and the gap bounds that cover them.

use mvce::bench::{full_reference, run_pipeline_on, DataSource, PipelineConfig, SampleSize};
use mvce::datagen::{generate, DatasetSpec, Family};
use mvce::leverage::exact_scores;
use mvce::sampling::SamplingMethod;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let spec = DatasetSpec::new(Family::RotatedCauchy, 50_000, 10, 5);
    let x = generate(&spec)?;
    let full = full_reference(&x, 1e-9, 0)?;
    let exact = exact_scores(&x)?;
    println!("full solve: g = {:.6} in {:.1} ms", full.objective, full.time_ms);

    println!("epsilon      s          gap   final bound  initial gap  initial bound   ms");
    for epsilon in [0.9, 0.5, 0.1] {
        let cfg = PipelineConfig::new(
            DataSource::Generated(spec.clone()),
            SamplingMethod::Deterministic,
            SampleSize::Epsilon(epsilon),
        );
        let r = run_pipeline_on(&x, "cauchy", &cfg, &full, &exact)?;
        println!(
            "{epsilon:>7} {:>6} {:>12.3e} {:>13.4} {:>12.4} {:>14.4} {:>5.1}",
            r.s,
            r.gap,
            r.bound_thm3,
            r.g_full - r.g_init,
            r.bound_thm2,
            r.time_total_ms
        );
        assert!(r.gap < r.bound_thm3 && r.g_full - r.g_init < r.bound_thm2);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
