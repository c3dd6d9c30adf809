//! The generator families and how concentrated their leverage is.

use mvce::datagen::{describe, generate, DatasetSpec, Family};
use mvce::leverage::exact_leverage;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for family in Family::ALL {
        let spec = DatasetSpec::new(family, 5_000, 10, 1);
        let x = generate(&spec)?;
        let lev = exact_leverage(&x)?;
        let top: f64 = lev.sorted_scores().take(50).sum();
        let rows_for_90: usize = lev
            .sorted_scores()
            .scan(0.0, |acc, l| {
                *acc += l;
                Some(*acc)
            })
            .take_while(|&acc| acc < 9.0)
            .count()
            + 1;
        println!(
            "{:<50} top 1%: {:>5.1}% of leverage, 90% reached after {rows_for_90} rows",
            describe(&spec),
            10.0 * top
        );
    }

    let spec: DatasetSpec = "power-law-leverage n=2000 d=5 seed=3 eta=0.5".parse()?;
    println!("parsed back: {}", describe(&spec));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
