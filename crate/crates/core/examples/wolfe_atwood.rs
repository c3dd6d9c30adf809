//! Solving the design problem with Wolfe-Atwood steps and reading the
//! certificate, next to the multiplicative fixed-point baseline.

use mvce::datagen::{generate, DatasetSpec, Family};
use mvce::solver::{
    init_khachiyan, init_kumar_yildirim, solve_fixed_point, solve_wolfe_atwood, SolveOptions,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let x = generate(&DatasetSpec::new(Family::Gaussian, 2_000, 5, 4))?;
    let opts = SolveOptions::new(1e-6);

    let ky = solve_wolfe_atwood(&x, init_kumar_yildirim(&x, 0)?, &opts)?;
    println!("Wolfe-Atwood from a spanning start:");
    print!("{}", ky.report());

    let kh = solve_wolfe_atwood(&x, init_khachiyan(x.nrows()), &opts)?;
    println!(
        "from uniform weights: {} iterations, objective {:.9}",
        kh.certificate.iterations,
        kh.objective()
    );

    let fp = solve_fixed_point(&x, init_khachiyan(x.nrows()), &opts.with_max_iter(200_000))?;
    println!(
        "fixed point: {} iterations, objective {:.9}",
        fp.certificate.iterations,
        fp.objective()
    );
    println!(
        "objectives agree within d log(1 + delta) = {:.2e}: {}",
        ky.certificate.gap_bound,
        (ky.objective() - kh.objective()).abs() <= ky.certificate.gap_bound
    );
    assert_eq!(ky.worst_decrease(), 0.0);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
