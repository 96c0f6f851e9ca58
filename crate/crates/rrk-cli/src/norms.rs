//! Quadrature-weighted discrete error norms against exact solutions.

use crate::config::{CliError, CliResult};
use rrk::euler::EulerSystem;
use rrk::problems::{evaluate_exact, ProblemSpec};

/// L1/L2/Linf of one error field, normalized by the total quadrature volume
/// so values are comparable across resolutions.
#[derive(Debug, Clone, Copy)]
pub struct Norms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// Norms of the nodal error in each conservative component at time `t`;
/// index 0 is the density.
pub fn error_norms_all(
    sys: &EulerSystem,
    spec: &ProblemSpec,
    u: &[f64],
    t: f64,
) -> CliResult<Vec<Norms>> {
    if !spec.has_exact() {
        return Err(CliError::Config(format!(
            "problem `{}` has no exact solution",
            spec.name
        )));
    }
    let nc = sys.n_cons();
    let jvol = sys.mesh.volume_jacobian();
    let nn = sys.op.n_nodes();
    let mut acc1 = vec![0.0; nc];
    let mut acc2 = vec![0.0; nc];
    let mut linf = vec![0.0f64; nc];
    let mut volume = 0.0;
    for elem in 0..sys.mesh.n_elements() {
        for node in 0..sys.nodes_per_element() {
            let w = jvol
                * sys.op.weights[node % nn]
                * if sys.mesh.dim == 2 {
                    sys.op.weights[node / nn]
                } else {
                    1.0
                };
            let pos = sys.node_position(elem, node);
            let exact = evaluate_exact(spec, &pos, t)?.to_cons(&sys.gas, nc);
            let q = &u[(elem * sys.nodes_per_element() + node) * nc..][..nc];
            volume += w;
            for c in 0..nc {
                let e = q[c] - exact[c];
                acc1[c] += w * e.abs();
                acc2[c] += w * e * e;
                linf[c] = linf[c].max(e.abs());
            }
        }
    }
    Ok((0..nc)
        .map(|c| Norms {
            l1: acc1[c] / volume,
            l2: (acc2[c] / volume).sqrt(),
            linf: linf[c],
        })
        .collect())
}

/// Density-only error norms.
pub fn error_norms(sys: &EulerSystem, spec: &ProblemSpec, u: &[f64], t: f64) -> CliResult<Norms> {
    Ok(error_norms_all(sys, spec, u, t)?[0])
}

/// Convergence rate between successive resolutions:
/// `rate = log(e_prev / e) / log(n / n_prev)`.
pub fn convergence_rate(e_prev: f64, e: f64, n_prev: usize, n: usize) -> f64 {
    (e_prev / e).ln() / (n as f64 / n_prev as f64).ln()
}
