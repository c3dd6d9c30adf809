//! D-optimal design / centred MVCE solvers.
//!
//! The dual problem maximises `g(u) = log det(sum_i u_i x_i x_i^T)` over the
//! probability simplex. Everything here works on the dual and reads the
//! primal shape matrix off as `Q(u) = M(u)^{-1}`.

mod bounds;
mod ellipsoid;
mod fixed_point;
mod init;
mod state;
mod wolfe_atwood;

pub use bounds::{bound_final_gap, bound_initial_gap, certify};
pub use ellipsoid::{
    centered_ellipsoid, lift_and_center, minimum_volume_ellipsoid, recover_ellipsoid, unit_ball_volume, volume, Ellipsoid,
};
pub use fixed_point::solve_fixed_point;
pub use init::{init_khachiyan, init_kumar_yildirim};
pub use state::{DesignVector, DualState, SUPPORT_TOL};
pub use wolfe_atwood::solve_wolfe_atwood;

/// Classification of a dual iterate against the relaxed optimality
/// conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertificateKind {
    /// `max_i xi_i <= (1 + delta) d`.
    PrimalFeasible,
    /// Primal feasible and `xi_i >= (1 - delta) d` on the support.
    ApproxOptimal,
}

impl CertificateKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CertificateKind::PrimalFeasible => "primal-feasible",
            CertificateKind::ApproxOptimal => "approx-optimal",
        }
    }
}

impl std::fmt::Display for CertificateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub delta: f64,
    /// `d log(1 + delta)`: the certified distance to the optimal value.
    pub gap_bound: f64,
    pub iterations: usize,
    pub runtime_ms: f64,
    /// `max_i xi_i / d`.
    pub max_ratio: f64,
    /// `min_{i in support} xi_i / d`.
    pub min_support_ratio: f64,
}

/// Result of a solve: the final state, its certificate, and the objective
/// value after each iteration.
#[derive(Clone, Debug)]
pub struct Solution {
    pub state: DualState,
    pub certificate: Certificate,
    pub objective_trace: Vec<f64>,
}

impl Solution {
    pub fn objective(&self) -> f64 {
        self.state.objective()
    }

    /// `key=value` lines describing the objective and certificate.
    pub fn report(&self) -> String {
        let c = &self.certificate;
        format!(
            "objective={}\ncertificate={}\ndelta={}\ngap_bound={}\niterations={}\nruntime_ms={:.3}\nmax_ratio={}\nmin_support_ratio={}\nsupport_size={}\n",
            self.objective(),
            c.kind,
            c.delta,
            c.gap_bound,
            c.iterations,
            c.runtime_ms,
            c.max_ratio,
            c.min_support_ratio,
            self.state.design().support().len()
        )
    }

    /// Largest decrease of the objective between consecutive iterations
    /// (zero for a monotone run).
    pub fn worst_decrease(&self) -> f64 {
        self.objective_trace
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub delta: f64,
    pub max_iter: usize,
    /// Full refactorisation of `M` after this many rank-one updates.
    pub refactor_every: usize,
}

impl SolveOptions {
    pub fn new(delta: f64) -> Self {
        Self {
            delta,
            ..Self::default()
        }
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            delta: 1e-7,
            max_iter: 1_000_000,
            refactor_every: 500,
        }
    }
}
