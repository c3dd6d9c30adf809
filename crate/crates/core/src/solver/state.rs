use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{gram_unchecked, Cholesky, DataMatrix, PIVOT_TOL};

/// Weights at or below this are treated as zero.
pub const SUPPORT_TOL: f64 = 1e-14;

/// Probability weights over the rows of a data matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignVector {
    weights: Vec<f64>,
}

impl DesignVector {
    /// Validates nonnegativity and unit sum (to `1e-12`).
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Dimension("empty design vector".into()));
        }
        if let Some(i) = weights.iter().position(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "weight {i} = {} is not a finite nonnegative number",
                weights[i]
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(Self { weights })
    }

    /// Rescales arbitrary nonnegative weights onto the simplex.
    pub fn normalized(mut weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "cannot normalise weights with total {total}"
            )));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Self::new(weights)
    }

    pub fn uniform(m: usize) -> Self {
        Self {
            weights: vec![1.0 / m as f64; m],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len())
            .filter(|&i| self.weights[i] > SUPPORT_TOL)
            .collect()
    }

    pub(crate) fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }
}

/// Dual iterate with its moment matrix, inverse, objective and variances
/// `xi_i = x_i^T M^{-1} x_i`, kept consistent through rank-one updates.
///
/// Internally the state works on `Y = X R^{-1}`, where `R` is the triangular
/// factor of a QR decomposition of `X`. The variances are unchanged by this
/// change of basis and the objective moves by the constant `2 log |det R|`,
/// but the moment matrices of `Y` stay well conditioned near the optimum,
/// which keeps the variances accurate enough to certify tiny `delta`.
#[derive(Clone, Debug)]
pub struct DualState {
    u: DesignVector,
    y: DataMatrix,
    r: DMatrix<f64>,
    log_det_r: f64,
    m: DMatrix<f64>,
    minv: DMatrix<f64>,
    g: f64,
    xi: Vec<f64>,
}

impl DualState {
    pub fn new(x: &DataMatrix, u: DesignVector) -> Result<Self> {
        if u.len() != x.nrows() {
            return Err(Error::Dimension(format!(
                "design of length {} for {} rows",
                u.len(),
                x.nrows()
            )));
        }
        let (y, r) = precondition(x)?;
        let log_det_r = r.diagonal().iter().map(|v| v.abs().ln()).sum::<f64>();
        let d = x.ncols();
        let mut state = Self {
            u,
            y,
            r,
            log_det_r,
            m: DMatrix::zeros(d, d),
            minv: DMatrix::zeros(d, d),
            g: 0.0,
            xi: Vec::new(),
        };
        state.refresh()?;
        Ok(state)
    }

    /// Recomputes everything from the weights, zeroing weights at or below
    /// `SUPPORT_TOL` and renormalising.
    pub fn refresh(&mut self) -> Result<()> {
        let w = self.u.weights_mut();
        for v in w.iter_mut() {
            if *v <= SUPPORT_TOL {
                *v = 0.0;
            }
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= total);

        let m = gram_unchecked(&self.y, Some(self.u.weights()))?.into_inner();
        let chol = Cholesky::factor(&m)?;
        self.minv = chol.inverse();
        self.g = chol.log_det();
        self.m = m;
        let mut scratch = vec![0.0; self.y.ncols()];
        self.xi.clear();
        self.xi
            .extend(self.y.rows().map(|row| chol.inv_quad_form(row, &mut scratch)));
        Ok(())
    }

    pub fn design(&self) -> &DesignVector {
        &self.u
    }

    pub fn into_design(self) -> DesignVector {
        self.u
    }

    /// `M = X^T U X`.
    pub fn moment(&self) -> DMatrix<f64> {
        self.r.transpose() * &self.m * &self.r
    }

    /// `Q(u) = M(u)^{-1}`.
    pub fn shape(&self) -> DMatrix<f64> {
        let mut q = self.minv.clone();
        // Q = R^{-1} Q_Y R^{-T}: two triangular solves.
        for mut col in q.column_iter_mut() {
            upper_solve(&self.r, col.as_mut_slice());
        }
        let mut q = q.transpose();
        for mut col in q.column_iter_mut() {
            upper_solve(&self.r, col.as_mut_slice());
        }
        (&q + q.transpose()) * 0.5
    }

    /// `g(u) = log det M`.
    pub fn objective(&self) -> f64 {
        self.g + 2.0 * self.log_det_r
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    /// `sum_i u_i xi_i`, which equals `d` for a consistent state.
    pub fn trace_identity(&self) -> f64 {
        self.u
            .weights()
            .iter()
            .zip(&self.xi)
            .map(|(u, xi)| u * xi)
            .sum()
    }

    /// Index and value of the largest `xi`.
    pub fn argmax_xi(&self) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, &v) in self.xi.iter().enumerate() {
            if v > best.1 {
                best = (i, v);
            }
        }
        best
    }

    /// Index and value of the smallest `xi` over the support.
    pub fn argmin_support_xi(&self) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, (&v, &w)) in self.xi.iter().zip(self.u.weights()).enumerate() {
            if w > 0.0 && v < best.1 {
                best = (i, v);
            }
        }
        best
    }

    /// Moves to `(1 - lambda) u + lambda e_j` by rank-one updates of `M`,
    /// `M^{-1}`, `g` and every `xi_i`.
    ///
    /// With `w = M^{-1} y_j` and `c = 1 - lambda + lambda xi_j`:
    /// `M'^{-1} = (M^{-1} - (lambda / c) w w^T) / (1 - lambda)` and
    /// `g' = g + (d - 1) log(1 - lambda) + log c`.
    pub(crate) fn step(&mut self, j: usize, lambda: f64, drop: bool) -> Result<()> {
        let d = self.y.ncols();
        let yj = self.y.row(j);
        let xij = self.xi[j];
        let c = 1.0 - lambda + lambda * xij;
        if !(c > 1e-14) || !(lambda < 1.0) {
            return Err(Error::RankDeficient(format!(
                "step on row {j} with lambda {lambda:e} collapses the moment matrix"
            )));
        }
        let w: Vec<f64> = (0..d)
            .map(|a| (0..d).map(|b| self.minv[(a, b)] * yj[b]).sum())
            .collect();
        let keep = 1.0 - lambda;
        let coef = lambda / c;

        for a in 0..d {
            for b in 0..d {
                self.minv[(a, b)] = (self.minv[(a, b)] - coef * w[a] * w[b]) / keep;
                self.m[(a, b)] = keep * self.m[(a, b)] + lambda * yj[a] * yj[b];
            }
        }
        self.g += (d as f64 - 1.0) * keep.ln() + c.ln();
        for (xi, row) in self.xi.iter_mut().zip(self.y.rows()) {
            let t: f64 = row.iter().zip(&w).map(|(p, q)| p * q).sum();
            *xi = (*xi - coef * t * t) / keep;
        }

        let weights = self.u.weights_mut();
        weights.iter_mut().for_each(|v| *v *= keep);
        weights[j] += lambda;
        if drop {
            weights[j] = 0.0;
        }
        Ok(())
    }

    /// Multiplicative update `u_i <- u_i xi_i / d` followed by a full
    /// recomputation.
    pub(crate) fn multiplicative_step(&mut self) -> Result<()> {
        let d = self.dim() as f64;
        let xi = &self.xi;
        for (w, v) in self.u.weights_mut().iter_mut().zip(xi) {
            *w *= v / d;
        }
        self.refresh()
    }

    pub(crate) fn weight_below_tol(&self) -> bool {
        self.u
            .weights()
            .iter()
            .any(|&w| w > 0.0 && w <= SUPPORT_TOL)
    }
}

/// `(X R^{-1}, R)` from a Householder QR of `X`.
fn precondition(x: &DataMatrix) -> Result<(DataMatrix, DMatrix<f64>)> {
    let (n, d) = (x.nrows(), x.ncols());
    let r = DMatrix::from_row_slice(n, d, x.as_slice()).qr().r();
    let scale = (0..d)
        .map(|k| x.rows().map(|row| row[k] * row[k]).sum::<f64>())
        .fold(0.0, f64::max)
        .sqrt();
    if let Some(k) = (0..d).find(|&k| !(r[(k, k)].abs() > PIVOT_TOL.sqrt() * scale)) {
        return Err(Error::RankDeficient(format!(
            "column {k} is numerically dependent on the ones before it"
        )));
    }
    // Row i of Y solves y^T R = x^T, a forward substitution with R^T.
    let mut values = x.as_slice().to_vec();
    for row in values.chunks_mut(d) {
        for k in 0..d {
            let mut acc = row[k];
            for p in 0..k {
                acc -= r[(p, k)] * row[p];
            }
            row[k] = acc / r[(k, k)];
        }
    }
    Ok((DataMatrix::new(n, d, values)?, r))
}

/// Solves `R z = b` in place for upper-triangular `R`.
fn upper_solve(r: &DMatrix<f64>, b: &mut [f64]) {
    let d = b.len();
    for k in (0..d).rev() {
        let mut acc = b[k];
        for p in k + 1..d {
            acc -= r[(k, p)] * b[p];
        }
        b[k] = acc / r[(k, k)];
    }
}
