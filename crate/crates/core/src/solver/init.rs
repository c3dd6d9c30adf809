use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::DesignVector;
use crate::error::{Error, Result};
use crate::linalg::DataMatrix;

/// Equal weight `1/m` on every point.
pub fn init_khachiyan(m: usize) -> DesignVector {
    DesignVector::uniform(m.max(1))
}

/// Kumar-Yildirim style start: equal weight on at most `2d` points that span
/// `R^d`.
///
/// Keeps an orthonormal basis of the span picked so far. Each round draws a
/// seeded random direction in its orthogonal complement, takes the points with
/// the largest and smallest projection onto it, and extends the basis with the
/// residual of the more extreme of the two.
pub fn init_kumar_yildirim(x: &DataMatrix, seed: u64) -> Result<DesignVector> {
    let (n, d) = (x.nrows(), x.ncols());
    if n <= 2 * d {
        return Ok(DesignVector::uniform(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = x.as_slice().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut chosen: Vec<usize> = Vec::with_capacity(2 * d);

    for _ in 0..d {
        let mut b: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        project_out(&mut b, &basis);
        normalize(&mut b);

        let (mut hi, mut lo) = ((0, f64::NEG_INFINITY), (0, f64::INFINITY));
        for (i, row) in x.rows().enumerate() {
            let p = dot(row, &b);
            if p > hi.1 {
                hi = (i, p);
            }
            if p < lo.1 {
                lo = (i, p);
            }
        }
        let (pick, reach) = if hi.1.abs() >= lo.1.abs() { hi } else { lo };
        if !(reach.abs() > 1e-12 * scale.max(f64::MIN_POSITIVE)) {
            return Err(Error::RankDeficient(format!(
                "points span only {} of {d} dimensions",
                basis.len()
            )));
        }
        for i in [hi.0, lo.0] {
            if !chosen.contains(&i) {
                chosen.push(i);
            }
        }
        let mut r = x.row(pick).to_vec();
        project_out(&mut r, &basis);
        // Re-orthogonalise once for stability.
        project_out(&mut r, &basis);
        normalize(&mut r);
        basis.push(r);
    }
    chosen.sort_unstable();
    let mut weights = vec![0.0; n];
    let w = 1.0 / chosen.len() as f64;
    for i in chosen {
        weights[i] = w;
    }
    DesignVector::normalized(weights)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for q in basis {
        let c = dot(v, q);
        v.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
    }
}

fn normalize(v: &mut [f64]) {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|a| *a /= norm);
    }
}
