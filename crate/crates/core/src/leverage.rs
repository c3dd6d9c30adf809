//! Statistical leverage scores: exact, sketched, and the closed forms for
//! rescaling a single row.
//!
//! The leverage of row `i` is the `i`-th diagonal entry of the hat matrix
//! `X (X^T X)^{-1} X^T`. Scores lie in `[0, 1]` and sum to `rank(X)`.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, QR};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{gram, Cholesky, DataMatrix, PIVOT_TOL};
use crate::solver::DesignVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeverageMode {
    Exact,
    Approximate,
}

/// Per-row leverage scores together with their descending sort order.
#[derive(Clone, Debug, PartialEq)]
pub struct LeverageProfile {
    scores: Vec<f64>,
    order: Vec<usize>,
    mode: LeverageMode,
    alpha: f64,
    seed: Option<u64>,
    dim: usize,
}

impl LeverageProfile {
    /// Builds a profile from precomputed scores. `dim` is the column count of
    /// the matrix the scores belong to.
    pub fn from_scores(
        scores: Vec<f64>,
        dim: usize,
        mode: LeverageMode,
        alpha: f64,
        seed: Option<u64>,
    ) -> Result<Self> {
        if scores.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(Error::InvalidArgument(
                "leverage scores must be finite and nonnegative".into(),
            ));
        }
        if dim == 0 || scores.len() < dim {
            return Err(Error::Dimension(format!(
                "{} scores for dimension {dim}",
                scores.len()
            )));
        }
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidArgument(format!("alpha = {alpha} not in [0, 1)")));
        }
        let order = descending_order(&scores);
        Ok(Self {
            scores,
            order,
            mode,
            alpha,
            seed,
            dim,
        })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Row indices sorted by descending score, ties by ascending index.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn mode(&self) -> LeverageMode {
        self.mode
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.sorted_scores().sum()
    }

    pub fn sorted_scores(&self) -> impl Iterator<Item = f64> + '_ {
        self.order.iter().map(|&i| self.scores[i])
    }

    /// Total score outside the top `s` rows.
    pub fn tail_sum(&self, s: usize) -> f64 {
        self.sorted_scores().skip(s).sum()
    }

    /// Writes `row_index,score,rank` lines in row order; rank 1 is the
    /// highest score.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let mut rank = vec![0; self.len()];
        for (r, &i) in self.order.iter().enumerate() {
            rank[i] = r + 1;
        }
        writeln!(w, "row_index,score,rank")?;
        for (i, s) in self.scores.iter().enumerate() {
            writeln!(w, "{i},{},{}", crate::io::format_f64(*s), rank[i])?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = std::io::BufWriter::new(
            std::fs::File::create(path).map_err(|e| Error::io(path, e))?,
        );
        self.write_csv(&mut f)
            .and_then(|_| f.flush())
            .map_err(|e| Error::io(path, e))
    }
}

pub(crate) fn descending_order(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

/// Diagonal of the hat matrix, via the Cholesky factor of `X^T X`.
pub fn exact_scores(x: &DataMatrix) -> Result<Vec<f64>> {
    let chol = gram(x, None)?.cholesky()?;
    let mut scratch = vec![0.0; x.ncols()];
    Ok(x.rows()
        .map(|row| chol.inv_quad_form(row, &mut scratch))
        .collect())
}

pub fn exact_leverage(x: &DataMatrix) -> Result<LeverageProfile> {
    LeverageProfile::from_scores(exact_scores(x)?, x.ncols(), LeverageMode::Exact, 0.0, None)
}

/// Sketch parameters used by [`approx_leverage`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SketchShape {
    /// Rows of the sparse embedding.
    pub rows: usize,
    /// Nonzeros per column of the embedding.
    pub nnz_per_column: usize,
    /// Gaussian projection width; `None` when projecting would cost more than
    /// forming the preconditioned row norms directly.
    pub projection: Option<usize>,
}

impl SketchShape {
    pub fn for_problem(n: usize, d: usize, alpha: f64) -> Self {
        let log_n = (n.max(2) as f64).ln();
        let rows = (20 * d).max((40.0 * log_n / (alpha * alpha)).ceil() as usize);
        let width = (32.0 * log_n / (alpha * alpha)).ceil() as usize;
        Self {
            rows,
            nnz_per_column: 4.min(rows),
            projection: (width < d).then_some(width),
        }
    }
}

/// Sketched leverage scores with relative error at most `alpha` with high
/// probability.
///
/// A sparse sign embedding `S` compresses `X` to `SX`, whose R factor
/// preconditions the rows: `l_i ~ ||x_i^T R^{-1}||^2`. When `d` is large
/// relative to `log n / alpha^2` the row norms are further estimated through
/// a Gaussian projection. Scores are clipped to `[0, 1]`.
pub fn approx_leverage(x: &DataMatrix, alpha: f64, seed: u64) -> Result<LeverageProfile> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} not in (0, 1)")));
    }
    let (n, d) = (x.nrows(), x.ncols());
    let shape = SketchShape::for_problem(n, d, alpha);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let sx = sparse_embed(x, &shape, &mut rng);
    let r = QR::new(sx).r();
    let max_col = (0..d).map(|j| r.column(j).norm_squared()).fold(0.0, f64::max);
    let singular = (0..d).any(|j| !(r[(j, j)] * r[(j, j)] > PIVOT_TOL * max_col));
    if singular {
        // Distinguish a bad sketch from a bad input.
        gram(x, None)?;
        return Err(Error::SketchTooSmall {
            rows: shape.rows,
            n,
            d,
        });
    }
    // R^T R = (SX)^T SX, so L = R^T (with positive diagonal) is its Cholesky
    // factor and x^T (R^T R)^{-1} x = ||L^{-1} x||^2.
    let mut l = r.transpose();
    for j in 0..d {
        if l[(j, j)] < 0.0 {
            for i in j..d {
                l[(i, j)] = -l[(i, j)];
            }
        }
    }
    let chol = Cholesky::from_lower(l);

    let scores: Vec<f64> = match shape.projection {
        None => {
            let mut scratch = vec![0.0; d];
            x.rows()
                .map(|row| chol.inv_quad_form(row, &mut scratch).clamp(0.0, 1.0))
                .collect()
        }
        Some(p) => {
            // Pi = R^{-1} G / sqrt(p) with G standard Gaussian d x p; since
            // R = L^T this is a backward solve per column.
            let scale = 1.0 / (p as f64).sqrt();
            let mut pi = DMatrix::<f64>::zeros(d, p);
            let mut col = vec![0.0; d];
            for c in 0..p {
                for v in col.iter_mut() {
                    *v = rng.sample::<f64, _>(StandardNormal) * scale;
                }
                chol.backward_solve(&mut col);
                pi.set_column(c, &nalgebra::DVector::from_column_slice(&col));
            }
            x.rows()
                .map(|row| {
                    (0..p)
                        .map(|c| {
                            let v: f64 = row.iter().enumerate().map(|(k, xv)| xv * pi[(k, c)]).sum();
                            v * v
                        })
                        .sum::<f64>()
                        .clamp(0.0, 1.0)
                })
                .collect()
        }
    };
    LeverageProfile::from_scores(scores, d, LeverageMode::Approximate, alpha, Some(seed))
}

fn sparse_embed(x: &DataMatrix, shape: &SketchShape, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let d = x.ncols();
    let k = shape.rows;
    let nnz = shape.nnz_per_column;
    let weight = 1.0 / (nnz as f64).sqrt();
    let mut sx = DMatrix::<f64>::zeros(k, d);
    let mut buckets = Vec::with_capacity(nnz);
    for row in x.rows() {
        buckets.clear();
        while buckets.len() < nnz {
            let b = rng.random_range(0..k);
            if !buckets.contains(&b) {
                buckets.push(b);
            }
        }
        for &b in &buckets {
            let sign = if rng.random::<bool>() { weight } else { -weight };
            for (j, v) in row.iter().enumerate() {
                sx[(b, j)] += sign * v;
            }
        }
    }
    sx
}

/// Leverage of every row after multiplying row `i` by `a`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledRowLeverage {
    pub own: f64,
    pub cross: Vec<f64>,
}

/// Closed-form leverage scores of `Sigma X` where `Sigma` is the identity
/// except `Sigma_ii = a`. A Sherman-Morrison update of `(X^T X)^{-1}` gives
///
/// ```text
/// l_j' = l_j - (a^2 - 1) (x_j^T (X^T X)^{-1} x_i)^2 / (1 + (a^2 - 1) l_i)
/// l_i' = a^2 l_i / (1 + (a^2 - 1) l_i)
/// ```
pub fn scaled_row_leverage(x: &DataMatrix, i: usize, a: f64) -> Result<ScaledRowLeverage> {
    if i >= x.nrows() {
        return Err(Error::Dimension(format!(
            "row {i} out of range for {} rows",
            x.nrows()
        )));
    }
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::InvalidArgument(format!("scale {a} must be >= 0")));
    }
    let chol = gram(x, None)?.cholesky()?;
    let z = chol.solve(x.row(i));
    let mut scratch = vec![0.0; x.ncols()];
    let li = chol.inv_quad_form(x.row(i), &mut scratch);
    let c = a * a - 1.0;
    let denominator = 1.0 + c * li;
    if denominator <= 1e-14 {
        return Err(Error::DegenerateScale { row: i, denominator });
    }
    let own = a * a * li / denominator;
    let cross = x
        .rows()
        .enumerate()
        .map(|(j, row)| {
            if j == i {
                return own;
            }
            let lj = chol.inv_quad_form(row, &mut scratch);
            let h: f64 = row.iter().zip(&z).map(|(p, q)| p * q).sum();
            lj - c * h * h / denominator
        })
        .collect();
    Ok(ScaledRowLeverage { own, cross })
}

/// Tail leverage mass beyond the first `s` rows, for `sqrt(U) X` and for `X`.
///
/// Rows are expected to be sorted by descending plain leverage already.
pub fn weighted_tail_leverage(x: &DataMatrix, u: &DesignVector, s: usize) -> Result<(f64, f64)> {
    if u.len() != x.nrows() {
        return Err(Error::Dimension(format!(
            "design of length {} for {} rows",
            u.len(),
            x.nrows()
        )));
    }
    if s > x.nrows() {
        return Err(Error::Dimension(format!("cut {s} beyond {} rows", x.nrows())));
    }
    let roots: Vec<f64> = u.weights().iter().map(|w| w.sqrt()).collect();
    let y = x.scale_rows(&roots)?;
    let weighted = exact_scores(&y)?;
    let plain = exact_scores(x)?;
    Ok((weighted[s..].iter().sum(), plain[s..].iter().sum()))
}
