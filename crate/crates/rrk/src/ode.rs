//! Contract between time integrators and right-hand sides.

use crate::error::Result;

/// A semidiscrete system `u'(t) = f(t, u)` together with finitely many convex
/// entropy functionals, one per partition (e.g. one per mesh element).
///
/// `entropy_rate` must be the exact directional derivative of `entropy` along
/// `du`, evaluated with the same quadrature, so that stagewise summation of
/// rates reproduces the semidiscrete entropy evolution.
pub trait OdeSystem: Sync {
    /// Number of state entries.
    fn dim(&self) -> usize;

    /// Number of entropy partitions K.
    fn n_partitions(&self) -> usize;

    /// Evaluates `du = f(t, u)`.
    fn rhs(&self, t: f64, u: &[f64], du: &mut [f64]) -> Result<()>;

    /// Evaluates all K partition entropies at `u`.
    fn entropy(&self, u: &[f64], eta: &mut [f64]) -> Result<()>;

    /// Evaluates all K directional entropy rates `eta_k'(u) . du`.
    fn entropy_rate(&self, t: f64, u: &[f64], du: &[f64], rate: &mut [f64]) -> Result<()>;

    /// Linearly conserved functionals (e.g. total mass/momentum/energy).
    /// May be empty.
    fn linear_invariants(&self, u: &[f64]) -> Vec<f64> {
        let _ = u;
        Vec::new()
    }

    /// Entropy of partition `kappa` at the point `u + gamma * d`.
    ///
    /// Must equal `entropy(u + gamma * d)[kappa]`; systems with spatially
    /// local partitions override this to touch only the owning block.
    fn partition_entropy_at(&self, kappa: usize, u: &[f64], d: &[f64], gamma: f64) -> Result<f64> {
        let combined: Vec<f64> = u.iter().zip(d).map(|(ui, di)| ui + gamma * di).collect();
        let mut eta = vec![0.0; self.n_partitions()];
        self.entropy(&combined, &mut eta)?;
        Ok(eta[kappa])
    }
}

/// One explicit Runge-Kutta step before relaxation.
#[derive(Debug, Clone)]
pub struct StepResult {
    /// Updated state at `t + dt`.
    pub u_new: Vec<f64>,
    /// `t + dt` exactly.
    pub t_new: f64,
    /// Step size used.
    pub dt: f64,
    /// Partition entropies of the old state.
    pub eta_old: Vec<f64>,
    /// Stagewise partition entropy estimates
    /// `e_k = eta_k(u_old) + dt * sum_i b_i (eta_k' f)(y_i)`.
    pub e: Vec<f64>,
    /// Weighted RMS error estimate from the embedded weights, scaled so that
    /// a mixed absolute/relative tolerance `tol` accepts iff `err <= tol`.
    pub err_embedded: Option<f64>,
    /// Number of rhs evaluations spent on this step.
    pub stage_rhs_evals: usize,
}
