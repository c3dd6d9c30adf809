//! Exact and sketched leverage scores of a heavy-tailed point cloud.

use mvce::datagen::{generate, DatasetSpec, Family};
use mvce::leverage::{approx_leverage, exact_leverage, scaled_row_leverage};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let x = generate(&DatasetSpec::new(Family::RotatedCauchy, 20_000, 8, 1))?;
    let exact = exact_leverage(&x)?;
    println!("sum of scores: {:.6} (d = {})", exact.sum(), x.ncols());

    let top: Vec<String> = exact.order()[..5]
        .iter()
        .map(|&i| format!("row {i}: {:.4}", exact.scores()[i]))
        .collect();
    println!("largest scores: {}", top.join(", "));
    let top_percent: f64 = exact.sorted_scores().take(200).sum();
    println!("top 1% of rows carry {:.1}% of the leverage", 100.0 * top_percent / exact.sum());

    for alpha in [0.5, 0.25] {
        let approx = approx_leverage(&x, alpha, 7)?;
        let worst = exact
            .scores()
            .iter()
            .zip(approx.scores())
            .map(|(e, a)| (a - e).abs() / e)
            .fold(0.0, f64::max);
        println!("alpha = {alpha}: worst relative error {worst:.3}");
    }

    // Doubling the most influential row raises its score and lowers the others.
    let i = exact.order()[0];
    let scaled = scaled_row_leverage(&x, i, 2.0)?;
    println!(
        "row {i} scaled by 2: leverage {:.4} -> {:.4}",
        exact.scores()[i],
        scaled.own
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
