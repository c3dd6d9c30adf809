use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::{DesignVector, DualState};
use crate::error::{Error, Result};
use crate::linalg::{DataMatrix, SpdMatrix};

/// `{ x : (x - center)^T Q (x - center) <= d }`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ellipsoid {
    pub q: SpdMatrix,
    pub center: Vec<f64>,
}

impl Ellipsoid {
    pub fn new(q: SpdMatrix, center: Vec<f64>) -> Result<Self> {
        if q.dim() != center.len() {
            return Err(Error::Dimension(format!(
                "shape is {0}x{0} but center has {1} entries",
                q.dim(),
                center.len()
            )));
        }
        Ok(Self { q, center })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// `(x - c)^T Q (x - c)`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let q = self.q.matrix();
        let diff: Vec<f64> = x.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        let mut acc = 0.0;
        for a in 0..diff.len() {
            for b in 0..diff.len() {
                acc += diff[a] * q[(a, b)] * diff[b];
            }
        }
        acc
    }

    /// Largest `quad_form(x_i) / d - 1` over the rows; nonpositive when every
    /// point is covered.
    pub fn max_violation(&self, x: &DataMatrix) -> f64 {
        let d = self.dim() as f64;
        x.rows()
            .map(|row| self.quad_form(row) / d - 1.0)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn log_volume(&self) -> Result<f64> {
        let d = self.dim() as f64;
        let log_det = self.q.cholesky()?.log_det();
        Ok(0.5 * d * d.ln() + unit_ball_volume(self.dim()).ln() - 0.5 * log_det)
    }
}

/// Volume of the unit ball in `R^d`, `pi^{d/2} / Gamma(d/2 + 1)`, via the
/// recurrence `V_d = (2 pi / d) V_{d-2}`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let (mut v, mut k) = if d % 2 == 0 { (1.0, 0) } else { (2.0, 1) };
    while k < d {
        k += 2;
        v *= 2.0 * PI / k as f64;
    }
    v
}

/// `d^{d/2} V_d det(Q)^{-1/2}`.
pub fn volume(e: &Ellipsoid) -> Result<f64> {
    Ok(e.log_volume()?.exp())
}

/// Appends a constant coordinate `1` to every row, turning the general MVCE
/// into a centred problem in `d + 1` dimensions.
pub fn lift_and_center(x: &DataMatrix) -> Result<DataMatrix> {
    let d = x.ncols();
    let mut values = Vec::with_capacity(x.nrows() * (d + 1));
    for row in x.rows() {
        values.extend_from_slice(row);
        values.push(1.0);
    }
    DataMatrix::new(x.nrows(), d + 1, values)
}

/// Recovers the (uncentred) ellipsoid from a design on the lifted problem.
///
/// `center = sum_i u_i x_i`, `Q0 = (X^T U X - c c^T)^{-1}`, then `Q0` is
/// rescaled so the worst point lies exactly on the boundary.
pub fn recover_ellipsoid(x: &DataMatrix, u: &DesignVector) -> Result<Ellipsoid> {
    let (n, d) = (x.nrows(), x.ncols());
    if u.len() != n {
        return Err(Error::Dimension(format!("design of length {} for {n} rows", u.len())));
    }
    let mut center = vec![0.0; d];
    let mut second = DMatrix::<f64>::zeros(d, d);
    for (row, &w) in x.rows().zip(u.weights()) {
        if w == 0.0 {
            continue;
        }
        for a in 0..d {
            center[a] += w * row[a];
            for b in 0..d {
                second[(a, b)] += w * row[a] * row[b];
            }
        }
    }
    for a in 0..d {
        for b in 0..d {
            second[(a, b)] -= center[a] * center[b];
        }
    }
    let scatter = SpdMatrix::new(second)?;
    let q0 = SpdMatrix::new(scatter.cholesky()?.inverse())?;
    let trial = Ellipsoid::new(q0, center)?;
    let worst = x
        .rows()
        .map(|row| trial.quad_form(row))
        .fold(0.0_f64, f64::max);
    if !(worst > 0.0) {
        return Err(Error::RankDeficient("all points coincide with the center".into()));
    }
    let q = trial.q.scaled(d as f64 / worst)?;
    Ellipsoid::new(q, trial.center)
}

/// Minimum volume ellipsoid (not necessarily centred at the origin) covering
/// the rows of `x`: lift, solve the centred problem, recover.
pub fn minimum_volume_ellipsoid(x: &DataMatrix, delta: f64, seed: u64) -> Result<Ellipsoid> {
    let lifted = lift_and_center(x)?;
    let u0 = super::init_kumar_yildirim(&lifted, seed)?;
    let sol = super::solve_wolfe_atwood(&lifted, u0, &super::SolveOptions::new(delta))?;
    recover_ellipsoid(x, sol.state.design())
}

/// Centred ellipsoid `E(Q(u), 0)` of a dual state.
pub fn centered_ellipsoid(state: &DualState) -> Result<Ellipsoid> {
    Ellipsoid::new(SpdMatrix::new(state.shape())?, vec![0.0; state.dim()])
}
