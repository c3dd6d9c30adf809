//! A small grid of sampled runs written to CSV and checked against the bounds.

use mvce::bench::{check_bounds, read_records, run_sweep_to_path, SweepConfig};

const CONFIG: &str = r#"
delta = 1e-9
methods = ["det", "uniform", "prop"]
s_fractions = [0.005, 0.02, 0.1]
seeds = [1, 2]

[[datasets]]
family = "rotated-cauchy"
n = 20000
d = 8

[[datasets]]
family = "lognormal"
n = 20000
d = 8
"#;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg: SweepConfig = toml::from_str(CONFIG)?;
    let dir = std::env::temp_dir().join(format!("mvce-sweep-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("sweep.csv");
    run_sweep_to_path(&cfg, &path)?;

    let records = read_records(&path)?;
    println!("{} records in {}", records.len(), path.display());
    println!("dataset                                         method   s      gap");
    for r in records.iter().filter(|r| r.seed == 1) {
        println!("{:<47} {:<8} {:<6} {:.3e}", r.dataset, r.method, r.s, r.gap);
    }
    println!("{}", check_bounds(&records));
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
