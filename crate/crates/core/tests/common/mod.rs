#![allow(dead_code)]

use mvce::DataMatrix;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Hat-matrix diagonal from a Householder QR, independent of the Cholesky
/// path the library uses.
pub fn qr_leverage(x: &DataMatrix) -> Vec<f64> {
    let q = x.to_dmatrix().qr().q();
    q.row_iter().map(|r| r.norm_squared()).collect()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize) -> DataMatrix {
    DataMatrix::new(n, d, (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Smallest-area ellipse around planar points, by enumeration.
///
/// The optimal ellipse touches three to five hull vertices. Triples give the
/// centroid-centred ellipse through a triangle; quadruples give the conics
/// through four points, a one-parameter pencil scanned for its smallest
/// ellipse; quintuples fix a single conic. The answer is the smallest
/// candidate covering every point. Shares no code with the library solver.
pub fn brute_force_min_area(points: &[[f64; 2]]) -> f64 {
    let hull = convex_hull(points);
    let h = hull.len();
    let mut best = f64::INFINITY;
    let mut consider = |e: Option<Conic>| {
        if let Some(e) = e {
            if e.covers(points) {
                best = best.min(e.area());
            }
        }
    };
    for i in 0..h {
        for j in i + 1..h {
            for k in j + 1..h {
                consider(triangle_ellipse([hull[i], hull[j], hull[k]]));
                for l in k + 1..h {
                    let quad = [hull[i], hull[j], hull[k], hull[l]];
                    let basis = conic_null_space(&quad);
                    let (c1, c2) = (basis.column(0).into_owned(), basis.column(1).into_owned());
                    let steps = 4000;
                    let eval = |t: f64| Conic::from_coefficients(&(&c1 * t.cos() + &c2 * t.sin()));
                    let mut local = (f64::INFINITY, 0.0);
                    for s in 0..steps {
                        let t = std::f64::consts::PI * s as f64 / steps as f64;
                        if let Some(e) = eval(t) {
                            if e.area() < local.0 {
                                local = (e.area(), t);
                            }
                        }
                    }
                    if local.0.is_finite() {
                        // Golden-section refinement inside the bracketing cells.
                        let width = std::f64::consts::PI / steps as f64;
                        let area = |t: f64| eval(t).map_or(f64::INFINITY, |e| e.area());
                        let (mut lo, mut hi) = (local.1 - width, local.1 + width);
                        let g = 0.5 * (5f64.sqrt() - 1.0);
                        for _ in 0..60 {
                            let (p, q) = (hi - g * (hi - lo), lo + g * (hi - lo));
                            if area(p) < area(q) {
                                hi = q;
                            } else {
                                lo = p;
                            }
                        }
                        consider(eval(0.5 * (lo + hi)));
                        consider(eval(local.1));
                    }
                    for m in l + 1..h {
                        let five = [hull[i], hull[j], hull[k], hull[l], hull[m]];
                        let basis = conic_null_space(&five);
                        consider(Conic::from_coefficients(&basis.column(0).into_owned()));
                    }
                }
            }
        }
    }
    best
}

/// `{x : (x - c)^T A (x - c) <= 1}`.
struct Conic {
    centre: [f64; 2],
    a: [[f64; 2]; 2],
}

impl Conic {
    /// From `a x^2 + b xy + c y^2 + d x + e y + f = 0`, if it bounds an ellipse.
    fn from_coefficients(v: &nalgebra::DVector<f64>) -> Option<Self> {
        let (a, b, c, d, e, f) = (v[0], v[1] / 2.0, v[2], v[3], v[4], v[5]);
        let det = a * c - b * b;
        if !(det > 0.0) {
            return None;
        }
        let centre = [-(c * d - b * e) / (2.0 * det), -(a * e - b * d) / (2.0 * det)];
        let k = a * centre[0] * centre[0] + 2.0 * b * centre[0] * centre[1] + c * centre[1] * centre[1] - f;
        if k == 0.0 {
            return None;
        }
        let m = [[a / k, b / k], [b / k, c / k]];
        if !(m[0][0] > 0.0) {
            return None;
        }
        Some(Self { centre, a: m })
    }

    fn area(&self) -> f64 {
        std::f64::consts::PI / (self.a[0][0] * self.a[1][1] - self.a[0][1] * self.a[1][0]).sqrt()
    }

    fn covers(&self, points: &[[f64; 2]]) -> bool {
        points.iter().all(|p| {
            let (x, y) = (p[0] - self.centre[0], p[1] - self.centre[1]);
            self.a[0][0] * x * x + 2.0 * self.a[0][1] * x * y + self.a[1][1] * y * y <= 1.0 + 1e-9
        })
    }
}

/// Right null space of the conic constraint rows for up to five points
/// (columns ordered by increasing singular value).
fn conic_null_space(points: &[[f64; 2]]) -> DMatrix<f64> {
    let mut rows = DMatrix::<f64>::zeros(6, 6);
    for (r, p) in points.iter().enumerate() {
        let (x, y) = (p[0], p[1]);
        for (c, v) in [x * x, x * y, y * y, x, y, 1.0].into_iter().enumerate() {
            rows[(r, c)] = v;
        }
    }
    let svd = rows.svd(false, true);
    let vt = svd.v_t.unwrap();
    let mut order: Vec<usize> = (0..6).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    // The zero padding rows add no constraints.
    let keep = 6 - points.len();
    DMatrix::from_fn(6, keep, |r, c| vt[(order[c], r)])
}

/// Centroid-centred ellipse through the vertices of a triangle.
fn triangle_ellipse(t: [[f64; 2]; 3]) -> Option<Conic> {
    let g = [(t[0][0] + t[1][0] + t[2][0]) / 3.0, (t[0][1] + t[1][1] + t[2][1]) / 3.0];
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in &t {
        let (x, y) = (p[0] - g[0], p[1] - g[1]);
        sxx += x * x / 3.0;
        sxy += x * y / 3.0;
        syy += y * y / 3.0;
    }
    let det = sxx * syy - sxy * sxy;
    if !(det > 0.0) {
        return None;
    }
    // (x - g)^T S^{-1} (x - g) <= 2.
    let s = 2.0 * det;
    Some(Conic {
        centre: g,
        a: [[syy / s, -sxy / s], [-sxy / s, sxx / s]],
    })
}

fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut p = points.to_vec();
    p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut hull: Vec<[f64; 2]> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    hull
}

pub fn dmatrix_log_det(m: &DMatrix<f64>) -> f64 {
    m.determinant().ln()
}
