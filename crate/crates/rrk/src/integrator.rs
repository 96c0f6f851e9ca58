//! Explicit Runge-Kutta stepping with per-partition entropy estimates,
//! embedded error control, and optional relaxation of every accepted step.

use crate::error::{Error, Result};
use crate::ode::{OdeSystem, StepResult};
use crate::relaxation::{self, RelaxationConfig, RelaxationMode, RelaxationReport};
use crate::tableaux::ButcherTableau;

/// One explicit RK step from `(t, u)` with step size `dt`.
///
/// Every stage rhs is evaluated exactly once and reused for both the update
/// and the entropy estimates.
pub fn rk_step(
    sys: &dyn OdeSystem,
    tab: &ButcherTableau,
    t: f64,
    u: &[f64],
    dt: f64,
) -> Result<StepResult> {
    assert!(dt > 0.0, "step size must be positive");
    let n = sys.dim();
    let s = tab.stages();
    let k_part = sys.n_partitions();

    let mut eta_old = vec![0.0; k_part];
    sys.entropy(u, &mut eta_old)?;

    let mut k = vec![vec![0.0; n]; s];
    let mut stage = vec![0.0; n];
    let mut rate = vec![0.0; k_part];
    let mut e = eta_old.clone();
    let mut u_new = u.to_vec();
    let mut u_embedded = tab.b_embedded.as_ref().map(|_| u.to_vec());

    for i in 0..s {
        stage.copy_from_slice(u);
        for j in 0..i {
            let aij = tab.a[i][j];
            if aij != 0.0 {
                let kj = &k[j];
                for (sv, kv) in stage.iter_mut().zip(kj) {
                    *sv += dt * aij * kv;
                }
            }
        }
        let ti = t + tab.c[i] * dt;
        sys.rhs(ti, &stage, &mut k[i])?;
        check_finite(&k[i], ti, n, k_part)?;

        sys.entropy_rate(ti, &stage, &k[i], &mut rate)?;
        let bi = tab.b[i];
        for (ek, rk) in e.iter_mut().zip(&rate) {
            *ek += dt * bi * rk;
        }
        if bi != 0.0 {
            for (uv, kv) in u_new.iter_mut().zip(&k[i]) {
                *uv += dt * bi * kv;
            }
        }
        if let (Some(ue), Some(be)) = (u_embedded.as_mut(), tab.b_embedded.as_ref()) {
            if be[i] != 0.0 {
                for (uv, kv) in ue.iter_mut().zip(&k[i]) {
                    *uv += dt * be[i] * kv;
                }
            }
        }
    }
    check_finite(&u_new, t + dt, n, k_part)?;

    let err_embedded = u_embedded.map(|ue| {
        let mut acc = 0.0;
        for ((&v, &ve), &v0) in u_new.iter().zip(&ue).zip(u) {
            let w = 1.0 + v0.abs().max(v.abs());
            let r = (v - ve) / w;
            acc += r * r;
        }
        (acc / n as f64).sqrt()
    });

    Ok(StepResult {
        u_new,
        t_new: t + dt,
        dt,
        eta_old,
        e,
        err_embedded,
        stage_rhs_evals: s,
    })
}

fn check_finite(v: &[f64], t: f64, n: usize, k_part: usize) -> Result<()> {
    if let Some(idx) = v.iter().position(|x| !x.is_finite()) {
        // map the offending entry to its partition assuming equal blocks
        let partition = if k_part > 0 { idx * k_part / n.max(1) } else { 0 };
        return Err(Error::NonFinite { t, partition });
    }
    Ok(())
}

/// Elementary step-size controller: `dt * clamp(0.9 (tol/err)^(1/(p+1)), 0.2, 5)`.
pub fn adapt_dt(err: f64, tol: f64, p_embedded: usize, dt: f64) -> f64 {
    assert!(tol > 0.0 && dt > 0.0 && err >= 0.0);
    const SAFETY: f64 = 0.9;
    const GROWTH_MIN: f64 = 0.2;
    const GROWTH_MAX: f64 = 5.0;
    let factor = if err == 0.0 {
        GROWTH_MAX
    } else {
        (SAFETY * (tol / err).powf(1.0 / (p_embedded as f64 + 1.0))).clamp(GROWTH_MIN, GROWTH_MAX)
    };
    dt * factor
}

/// Step-size selection mode for [`advance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepMode {
    /// Constant `dt0` (final step clipped onto `t_end`).
    Fixed,
    /// Embedded-pair error control with mixed absolute/relative tolerance.
    Adaptive { tol: f64 },
}

/// Everything an observer sees about one accepted step.
#[derive(Debug, Clone)]
pub struct StepRecord<'a> {
    pub step: usize,
    /// Time of the accepted state (after relaxation).
    pub t: f64,
    /// Step size attempted for this step (before the gamma rescaling).
    pub dt: f64,
    pub gamma: f64,
    pub gamma_local: &'a [f64],
    /// Partition entropies of the accepted state.
    pub eta: &'a [f64],
    pub invariants: &'a [f64],
    pub relaxation: Option<&'a RelaxationReport>,
    /// Accepted state (after relaxation).
    pub u: &'a [f64],
    /// State the step started from.
    pub u_old: &'a [f64],
    /// The raw Runge-Kutta step (update and estimates before relaxation).
    pub rk: &'a StepResult,
}

/// Per-trajectory counters returned by [`advance`].
#[derive(Debug, Clone)]
pub struct TrajectorySummary {
    pub t_final: f64,
    pub u_final: Vec<f64>,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub rhs_evals: usize,
}

/// Upper bound on accepted plus rejected steps.
pub const DEFAULT_MAX_STEPS: usize = 50_000_000;

/// Integrates from `(t0, u0)` to `t_end`, relaxing every accepted step
/// according to `cfg.mode`, and reports each accepted step to `observer`.
///
/// With relaxation the time actually advances by `gamma * dt` per step; the
/// loop therefore clips trailing steps until `t_end` is met to within
/// `1e-12 * (t_end - t0)`.
#[allow(clippy::too_many_arguments)]
pub fn advance(
    sys: &dyn OdeSystem,
    tab: &ButcherTableau,
    cfg: &RelaxationConfig,
    u0: &[f64],
    t0: f64,
    t_end: f64,
    dt0: f64,
    mode: StepMode,
    max_steps: usize,
    mut observer: impl FnMut(&StepRecord),
) -> Result<TrajectorySummary> {
    assert!(t_end >= t0, "t_end must not precede t0");
    assert!(dt0 > 0.0, "dt0 must be positive");
    if let StepMode::Adaptive { .. } = mode {
        assert!(
            tab.b_embedded.is_some(),
            "adaptive stepping needs embedded weights"
        );
    }
    if cfg.mode != RelaxationMode::None && !crate::tableaux::has_nonnegative_weights(tab) {
        return Err(Error::InvalidArgument(format!(
            "tableau {} has negative weights; the entropy estimate is not an \
             admissible relaxation target",
            tab.name
        )));
    }

    let horizon = t_end - t0;
    let clip_tol = 1e-12 * horizon;
    let k_part = sys.n_partitions();

    let mut t = t0;
    let mut u = u0.to_vec();
    let mut dt = dt0;
    let mut steps_accepted = 0usize;
    let mut steps_rejected = 0usize;
    let mut rhs_evals = 0usize;
    let mut eta_accepted = vec![0.0; k_part];
    let ones = vec![1.0; k_part];

    while t_end - t > clip_tol {
        if steps_accepted + steps_rejected >= max_steps {
            return Err(Error::MaxSteps {
                max_steps,
                t,
            });
        }
        let dt_step = dt.min(t_end - t);
        let step = rk_step(sys, tab, t, &u, dt_step)?;
        rhs_evals += step.stage_rhs_evals;

        if let StepMode::Adaptive { tol } = mode {
            let err = step.err_embedded.expect("embedded estimate");
            if err > tol {
                // rejected trial steps are retried and never relaxed
                steps_rejected += 1;
                dt = adapt_dt(err, tol, tab.order_embedded.unwrap(), dt_step);
                continue;
            }
        }

        let u_old = std::mem::take(&mut u);
        let (gamma, t_new, report) = match cfg.mode {
            RelaxationMode::None => {
                u = step.u_new.clone();
                (1.0, step.t_new, None)
            }
            RelaxationMode::Global | RelaxationMode::Local => {
                let (u_gamma, t_gamma, report) =
                    relaxation::local_relax_step(sys, &u_old, t, &step, cfg)?;
                u = u_gamma;
                (report.gamma, t_gamma, Some(report))
            }
        };
        t = t_new;
        steps_accepted += 1;

        sys.entropy(&u, &mut eta_accepted)?;
        let invariants = sys.linear_invariants(&u);
        let gamma_local: &[f64] = report
            .as_ref()
            .map(|r| r.gamma_local.as_slice())
            .unwrap_or(&ones);
        observer(&StepRecord {
            step: steps_accepted,
            t,
            dt: dt_step,
            gamma,
            gamma_local,
            eta: &eta_accepted,
            invariants: &invariants,
            relaxation: report.as_ref(),
            u: &u,
            u_old: &u_old,
            rk: &step,
        });

        if let StepMode::Adaptive { tol } = mode {
            let err = step.err_embedded.expect("embedded estimate");
            dt = adapt_dt(err, tol, tab.order_embedded.unwrap(), dt_step);
        }
    }

    Ok(TrajectorySummary {
        t_final: t,
        u_final: u,
        steps_accepted,
        steps_rejected,
        rhs_evals,
    })
}
