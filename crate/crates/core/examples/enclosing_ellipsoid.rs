//! Smallest ellipse around a planar point set, with an arbitrary centre.

use mvce::solver::{minimum_volume_ellipsoid, volume};
use mvce::DataMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let rows: Vec<[f64; 2]> = (0..40)
        .map(|_| {
            let (a, b): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            [5.0 + 3.0 * a + b, -2.0 + 0.5 * b]
        })
        .collect();
    let x = DataMatrix::from_rows(&rows)?;

    let e = minimum_volume_ellipsoid(&x, 1e-9, 0)?;
    println!("centre: ({:.4}, {:.4})", e.center[0], e.center[1]);
    println!("shape:\n{}", e.q.matrix());
    println!("area: {:.6}", volume(&e)?);
    println!("largest x^T Q x / d - 1 over the points: {:.2e}", e.max_violation(&x));

    let on_boundary = x
        .rows()
        .filter(|r| (e.quad_form(r) / 2.0 - 1.0).abs() < 1e-6)
        .count();
    println!("points on the boundary: {on_boundary}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
