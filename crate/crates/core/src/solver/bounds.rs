use super::{Certificate, CertificateKind, DualState};
use crate::error::{Error, Result};

/// Classifies `state` against the `delta`-relaxed optimality conditions.
///
/// Fails with `NotFeasible` when some `xi_i` exceeds `(1 + delta) d`.
pub fn certify(state: &DualState, delta: f64) -> Result<Certificate> {
    let d = state.dim();
    let df = d as f64;
    let max_xi = state.argmax_xi().1;
    let min_xi = state.argmin_support_xi().1;
    if max_xi > (1.0 + delta) * df {
        return Err(Error::NotFeasible { max_xi, delta, d });
    }
    let kind = if min_xi >= (1.0 - delta) * df {
        CertificateKind::ApproxOptimal
    } else {
        CertificateKind::PrimalFeasible
    };
    Ok(Certificate {
        kind,
        delta,
        gap_bound: df * delta.ln_1p(),
        iterations: 0,
        runtime_ms: 0.0,
        max_ratio: max_xi / df,
        min_support_ratio: min_xi / df,
    })
}

/// Upper bound on `g* - g_s(e/s)` for a threshold coreset of size `s`:
/// `d log(s / (1 - epsilon))`. Returns `+inf` when `epsilon >= 1`.
pub fn bound_initial_gap(d: usize, s: usize, epsilon: f64) -> f64 {
    if epsilon >= 1.0 {
        return f64::INFINITY;
    }
    d as f64 * (s as f64 / (1.0 - epsilon)).ln()
}

/// Upper bound on `g* - g_s*`: `d log((1 + delta) / (1 - epsilon))`.
/// With `delta = 0` this is `d log(1 / (1 - epsilon))`.
///
/// Returns `+inf` when `epsilon >= 1`, where no bound applies.
pub fn bound_final_gap(d: usize, epsilon: f64, delta: f64) -> f64 {
    if epsilon >= 1.0 {
        return f64::INFINITY;
    }
    d as f64 * (delta.ln_1p() - (-epsilon).ln_1p())
}
