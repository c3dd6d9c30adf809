use std::time::Instant;

use super::wolfe_atwood::certify_or_unconverged;
use super::{certify, DesignVector, DualState, Solution, SolveOptions};
use crate::error::{Error, Result};
use crate::linalg::DataMatrix;

/// Plain multiplicative fixed-point iteration `u_i <- u_i xi_i / d`.
///
/// The update keeps `u` on the simplex because `sum_i u_i xi_i = d`, and the
/// objective is non-decreasing along it. Stops as soon as the iterate is
/// `delta`-primal feasible; the optimality side is not driven.
pub fn solve_fixed_point(
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
    let mut iterations = 0;
    while state.argmax_xi().1 > (1.0 + opts.delta) * d {
        if iterations >= opts.max_iter {
            let certificate = certify_or_unconverged(&state, opts.delta, iterations, start);
            return Err(Error::MaxIterations(Box::new(Solution {
                state,
                certificate,
                objective_trace: trace,
            })));
        }
        state.multiplicative_step()?;
        trace.push(state.objective());
        iterations += 1;
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
