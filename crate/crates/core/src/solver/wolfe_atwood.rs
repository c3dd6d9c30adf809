use std::time::Instant;

use super::{certify, DesignVector, DualState, Solution, SolveOptions};
use crate::error::{Error, Result};
use crate::linalg::DataMatrix;

/// Frank-Wolfe ascent with away steps (Wolfe-Atwood) on the D-optimal
/// design dual.
///
/// Each iteration compares the most violated point `j+ = argmax xi` with the
/// least useful support point `j- = argmin_{support} xi` and moves along the
/// vertex with the larger `|xi_j / d - 1|`. The line search is exact:
/// `lambda = (xi_j - d) / (d (xi_j - 1))`, clipped at `-u_j / (1 - u_j)` for
/// away steps, in which case the point leaves the support.
///
/// Stops once the iterate is `delta`-approximately optimal.
pub fn solve_wolfe_atwood(
    x: &DataMatrix,
    u0: DesignVector,
    opts: &SolveOptions,
) -> Result<Solution> {
    if !(opts.delta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "delta = {} must be positive",
            opts.delta
        )));
    }
    let start = Instant::now();
    let d = x.ncols() as f64;
    let mut state = DualState::new(x, u0)?;
    let mut trace = vec![state.objective()];
    let mut since_refactor = 0;
    let mut iterations = 0;

    loop {
        let (jp, xi_max) = state.argmax_xi();
        let (jm, xi_min) = state.argmin_support_xi();
        let up = xi_max / d - 1.0;
        let down = 1.0 - xi_min / d;
        if up <= opts.delta && down <= opts.delta {
            // Confirm on freshly factored quantities before stopping.
            if since_refactor == 0 {
                break;
            }
            state.refresh()?;
            since_refactor = 0;
            continue;
        }
        if iterations >= opts.max_iter {
            let certificate = certify_or_unconverged(&state, opts.delta, iterations, start);
            return Err(Error::MaxIterations(Box::new(Solution {
                state,
                certificate,
                objective_trace: trace,
            })));
        }

        let wm = state.design().weights()[jm];
        let away_possible = wm < 1.0;
        let stepped = if up >= down || !away_possible {
            let lambda = (xi_max - d) / (d * (xi_max - 1.0));
            state.step(jp, lambda, false)
        } else {
            let lower = -wm / (1.0 - wm);
            let lambda = (xi_min - d) / (d * (xi_min - 1.0));
            // For xi_j <= 1 the stationary point lies on the wrong side of
            // zero and the objective keeps rising down to the bound.
            if xi_min <= 1.0 || !(lambda > lower) {
                state.step(jm, lower, true)
            } else {
                state.step(jm, lambda, false)
            }
        };
        if let Err(e) = stepped {
            // A collapse seen on drifted quantities gets one retry after a
            // refactorisation.
            if since_refactor == 0 {
                return Err(e);
            }
            state.refresh()?;
            since_refactor = 0;
            continue;
        }
        iterations += 1;
        since_refactor += 1;

        let drifted = (state.trace_identity() - d).abs() > 1e-8 * d;
        if since_refactor >= opts.refactor_every || drifted || state.weight_below_tol() {
            state.refresh()?;
            since_refactor = 0;
        }
        trace.push(state.objective());
    }

    let mut certificate = certify(&state, opts.delta)?;
    certificate.iterations = iterations;
    certificate.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(Solution {
        state,
        certificate,
        objective_trace: trace,
    })
}

/// Certificate for a state that ran out of iterations: classify if possible,
/// otherwise report the raw ratios under the primal-feasible label.
pub(super) fn certify_or_unconverged(
    state: &DualState,
    delta: f64,
    iterations: usize,
    start: Instant,
) -> super::Certificate {
    let d = state.dim() as f64;
    let mut c = certify(state, delta).unwrap_or_else(|_| super::Certificate {
        kind: super::CertificateKind::PrimalFeasible,
        delta,
        gap_bound: f64::INFINITY,
        iterations,
        runtime_ms: 0.0,
        max_ratio: state.argmax_xi().1 / d,
        min_support_ratio: state.argmin_support_xi().1 / d,
    });
    c.iterations = iterations;
    c.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    c
}
