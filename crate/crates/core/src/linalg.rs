//! Dense linear algebra on tall data matrices and small SPD matrices.
//!
//! Data matrices are stored row-major because every hot loop in the crate
//! walks over observations. The `d x d` matrices use `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative pivot threshold below which a Cholesky factorization is declared
/// rank deficient.
pub const PIVOT_TOL: f64 = 1e-12;

/// Dense `n x d` matrix of observations, one row per point.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix {
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    pub fn new(n: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        if d == 0 || n < d {
            return Err(Error::Dimension(format!(
                "data matrix needs n >= d >= 1, got n = {n}, d = {d}"
            )));
        }
        if values.len() != n * d {
            return Err(Error::Dimension(format!(
                "expected {} values for a {n}x{d} matrix, got {}",
                n * d,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite entry at row {}, column {}",
                pos / d,
                pos % d
            )));
        }
        Ok(Self { n, d, values })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * d);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != d {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {d}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::new(rows.len(), d, values)
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.d)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Stacks the listed rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            if i >= self.n {
                return Err(Error::Dimension(format!(
                    "row index {i} out of range for {} rows",
                    self.n
                )));
            }
            values.extend_from_slice(self.row(i));
        }
        Self::new(indices.len(), self.d, values)
    }

    /// Left-multiplies by `diag(scales)`.
    pub fn scale_rows(&self, scales: &[f64]) -> Result<Self> {
        if scales.len() != self.n {
            return Err(Error::Dimension(format!(
                "{} row scales for {} rows",
                scales.len(),
                self.n
            )));
        }
        let values = self
            .rows()
            .zip(scales)
            .flat_map(|(row, &c)| row.iter().map(move |v| v * c))
            .collect();
        Self::new(self.n, self.d, values)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.n, self.d, self.values.iter().map(|v| v * c).collect())
    }

    /// Right-multiplies by a `d x k` matrix.
    pub fn mul_right(&self, t: &DMatrix<f64>) -> Result<Self> {
        if t.nrows() != self.d {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.n,
                self.d,
                t.nrows(),
                t.ncols()
            )));
        }
        let k = t.ncols();
        let mut values = vec![0.0; self.n * k];
        for (row, out) in self.rows().zip(values.chunks_exact_mut(k)) {
            for (c, o) in out.iter_mut().enumerate() {
                *o = row.iter().enumerate().map(|(r, v)| v * t[(r, c)]).sum();
            }
        }
        Self::new(self.n, k, values)
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.d, &self.values)
    }

    pub fn permute_rows(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.n {
            return Err(Error::Dimension("permutation length mismatch".into()));
        }
        self.select_rows(order)
    }
}

/// Symmetric positive definite `d x d` matrix.
///
/// Symmetry is enforced on construction by averaging with the transpose;
/// definiteness is checked lazily by [`SpdMatrix::cholesky`].
#[derive(Clone, Debug, PartialEq)]
pub struct SpdMatrix(DMatrix<f64>);

impl SpdMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "SPD matrix must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite matrix entry".into()));
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(Self(sym))
    }

    pub fn identity(d: usize) -> Self {
        Self(DMatrix::identity(d, d))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn cholesky(&self) -> Result<Cholesky> {
        Cholesky::factor(&self.0)
    }

    /// Sorted ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.0.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(&self.0 * c)
    }
}

/// Lower-triangular Cholesky factor `A = L L^T`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    l: DMatrix<f64>,
}

impl Cholesky {
    /// Factors the lower triangle of `a`. A squared pivot at or below
    /// `PIVOT_TOL * max(diag(a))` is reported as rank deficiency.
    pub fn factor(a: &DMatrix<f64>) -> Result<Self> {
        let d = a.nrows();
        let max_diag = (0..d).map(|i| a[(i, i)]).fold(0.0_f64, f64::max);
        if !(max_diag > 0.0) {
            return Err(Error::RankDeficient("non-positive diagonal".into()));
        }
        let floor = PIVOT_TOL * max_diag;
        let mut l = DMatrix::<f64>::zeros(d, d);
        for j in 0..d {
            let mut pivot = a[(j, j)];
            for k in 0..j {
                pivot -= l[(j, k)] * l[(j, k)];
            }
            if !(pivot > floor) {
                return Err(Error::RankDeficient(format!(
                    "pivot {j} is {pivot:e}, threshold {floor:e}"
                )));
            }
            let ljj = pivot.sqrt();
            l[(j, j)] = ljj;
            for i in j + 1..d {
                let mut v = a[(i, j)];
                for k in 0..j {
                    v -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = v / ljj;
            }
        }
        Ok(Self { l })
    }

    /// Wraps an already computed lower-triangular factor with a positive
    /// diagonal.
    pub(crate) fn from_lower(l: DMatrix<f64>) -> Self {
        Self { l }
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    pub fn factor_l(&self) -> &DMatrix<f64> {
        &self.l
    }

    /// Solves `L y = b` in place.
    pub fn forward_solve(&self, b: &mut [f64]) {
        let d = self.dim();
        for i in 0..d {
            let mut v = b[i];
            for k in 0..i {
                v -= self.l[(i, k)] * b[k];
            }
            b[i] = v / self.l[(i, i)];
        }
    }

    /// Solves `L^T y = b` in place.
    pub fn backward_solve(&self, b: &mut [f64]) {
        let d = self.dim();
        for i in (0..d).rev() {
            let mut v = b[i];
            for k in i + 1..d {
                v -= self.l[(k, i)] * b[k];
            }
            b[i] = v / self.l[(i, i)];
        }
    }

    /// `x^T A^{-1} x`, i.e. `||L^{-1} x||^2`.
    pub fn inv_quad_form(&self, x: &[f64], scratch: &mut [f64]) -> f64 {
        scratch.copy_from_slice(x);
        self.forward_solve(scratch);
        scratch.iter().map(|v| v * v).sum()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut y = b.to_vec();
        self.forward_solve(&mut y);
        self.backward_solve(&mut y);
        y
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut inv = DMatrix::<f64>::zeros(d, d);
        let mut e = vec![0.0; d];
        for j in 0..d {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e);
            for i in 0..d {
                inv[(i, j)] = col[i];
            }
        }
        (&inv + inv.transpose()) * 0.5
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.dim()).map(|i| self.l[(i, i)].ln()).sum::<f64>()
    }
}

/// `X^T X`, or `sum_i w_i x_i x_i^T` when weights are given.
pub fn gram(x: &DataMatrix, weights: Option<&[f64]>) -> Result<SpdMatrix> {
    let g = gram_unchecked(x, weights)?;
    g.cholesky()?;
    Ok(g)
}

/// Weighted Gram matrix without the rank check.
pub(crate) fn gram_unchecked(x: &DataMatrix, weights: Option<&[f64]>) -> Result<SpdMatrix> {
    let d = x.ncols();
    if let Some(w) = weights {
        if w.len() != x.nrows() {
            return Err(Error::Dimension(format!(
                "{} weights for {} rows",
                w.len(),
                x.nrows()
            )));
        }
        if let Some(i) = w.iter().position(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "weight {i} is negative or NaN"
            )));
        }
    }
    let mut acc = vec![0.0; d * d];
    for (i, row) in x.rows().enumerate() {
        let wi = weights.map_or(1.0, |w| w[i]);
        if wi == 0.0 {
            continue;
        }
        for a in 0..d {
            let va = wi * row[a];
            let dst = &mut acc[a * d..(a + 1) * d];
            for b in a..d {
                dst[b] += va * row[b];
            }
        }
    }
    let mut m = DMatrix::<f64>::zeros(d, d);
    for a in 0..d {
        for b in a..d {
            m[(a, b)] = acc[a * d + b];
            m[(b, a)] = acc[a * d + b];
        }
    }
    SpdMatrix::new(m)
}

/// `log det(A)` from the Cholesky pivots.
pub fn log_det(a: &SpdMatrix) -> Result<f64> {
    Ok(a.cholesky()?.log_det())
}

/// Smallest and largest `lambda` with `det(A - lambda B) = 0`.
///
/// Whitens with the Cholesky factor of `B` and runs a dense symmetric
/// eigensolver on `L^{-1} A L^{-T}`.
pub fn extreme_gen_eigs(a: &SpdMatrix, b: &SpdMatrix) -> Result<(f64, f64)> {
    let d = a.dim();
    if b.dim() != d {
        return Err(Error::Dimension(format!(
            "pencil dimensions differ: {d} vs {}",
            b.dim()
        )));
    }
    let chol = b.cholesky()?;
    // C = L^{-1} A L^{-T}: first W = L^{-1} A (column by column), then
    // C = L^{-1} W^T since A is symmetric.
    let mut w = DMatrix::<f64>::zeros(d, d);
    let mut col = vec![0.0; d];
    for j in 0..d {
        col.copy_from_slice(a.matrix().column(j).as_slice());
        chol.forward_solve(&mut col);
        w.set_column(j, &DVector::from_column_slice(&col));
    }
    let wt = w.transpose();
    let mut c = DMatrix::<f64>::zeros(d, d);
    for j in 0..d {
        col.copy_from_slice(wt.column(j).as_slice());
        chol.forward_solve(&mut col);
        c.set_column(j, &DVector::from_column_slice(&col));
    }
    let c = SpdMatrix::new(c)?;
    let ev = c.eigenvalues();
    Ok((ev[0], ev[d - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, d: usize, seed: u64) -> DataMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect();
        DataMatrix::new(n, d, values).unwrap()
    }

    fn random_spd(d: usize, seed: u64) -> SpdMatrix {
        let x = random_matrix(d + 3, d, seed);
        gram(&x, None).unwrap()
    }

    // Laplace expansion along the first row.
    fn cofactor_det(m: &DMatrix<f64>) -> f64 {
        let n = m.nrows();
        if n == 1 {
            return m[(0, 0)];
        }
        (0..n)
            .map(|j| {
                let minor = m.clone().remove_row(0).remove_column(j);
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * m[(0, j)] * cofactor_det(&minor)
            })
            .sum()
    }

    #[test]
    fn gram_of_unit_rows() {
        let x = DataMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).unwrap();
        let g = gram(&x, None).unwrap();
        assert_eq!(g.matrix(), &DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]));
    }

    #[test]
    fn gram_of_square_corners_is_identity() {
        let x = DataMatrix::from_rows(&[[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])
            .unwrap();
        let g = gram(&x, Some(&[0.25; 4])).unwrap();
        assert_eq!(g.matrix(), &DMatrix::identity(2, 2));
    }

    #[test]
    fn gram_matches_outer_product_loop() {
        let x = random_matrix(50, 5, 3);
        let w = vec![1.0 / 50.0; 50];
        let g = gram(&x, Some(&w)).unwrap();
        let mut brute = DMatrix::<f64>::zeros(5, 5);
        for row in x.rows() {
            let v = DVector::from_column_slice(row);
            brute += (&v * v.transpose()) / 50.0;
        }
        for (a, b) in g.matrix().iter().zip(brute.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn gram_rejects_negative_weight_and_rank_loss() {
        let x = random_matrix(4, 2, 1);
        assert!(matches!(
            gram(&x, Some(&[0.5, -0.1, 0.3, 0.3])),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            gram(&x, Some(&[1.0, 0.0, 0.0, 0.0])),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn log_det_simple_cases() {
        assert_eq!(log_det(&SpdMatrix::identity(4)).unwrap(), 0.0);
        let a = SpdMatrix::from_diagonal(&[2.0, 1.0]).unwrap();
        assert_abs_diff_eq!(log_det(&a).unwrap(), 2f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn log_det_matches_cofactor_expansion() {
        let a = random_spd(6, 11);
        let oracle = cofactor_det(a.matrix()).ln();
        assert_abs_diff_eq!(log_det(&a).unwrap(), oracle, epsilon = 1e-10);
    }

    #[test]
    fn log_det_rejects_singular() {
        let a = SpdMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        assert!(matches!(log_det(&a), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn generalized_eigs_of_identity_and_scaled_pencils() {
        let b = random_spd(4, 5);
        let (lo, hi) = extreme_gen_eigs(&b, &b).unwrap();
        assert_abs_diff_eq!(lo, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 1.0, epsilon = 1e-12);
        let a = b.scaled(2.0).unwrap();
        let (lo, hi) = extreme_gen_eigs(&a, &b).unwrap();
        assert_abs_diff_eq!(lo, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn generalized_eigs_bracket_dense_oracle() {
        // Oracle: eigenvalues of B^{-1} A through a general (non-symmetric)
        // eigen decomposition.
        let a = random_spd(4, 21);
        let b = random_spd(4, 22);
        let binv = b.matrix().clone().try_inverse().unwrap();
        let product = binv * a.matrix();
        let ev = product.complex_eigenvalues();
        let (lo, hi) = extreme_gen_eigs(&a, &b).unwrap();
        for e in ev.iter() {
            assert!(e.im.abs() < 1e-9);
            assert!(e.re >= lo - 1e-9 && e.re <= hi + 1e-9);
        }
        let min = ev.iter().map(|e| e.re).fold(f64::INFINITY, f64::min);
        let max = ev.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
        assert_abs_diff_eq!(lo, min, epsilon = 1e-9);
        assert_abs_diff_eq!(hi, max, epsilon = 1e-9);
    }

    #[test]
    fn data_matrix_validation() {
        assert!(DataMatrix::new(1, 2, vec![1.0, 2.0]).is_err());
        assert!(DataMatrix::new(2, 1, vec![1.0, f64::NAN]).is_err());
        assert!(DataMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0]]).is_err());
    }
}
