//! Flux-differencing volume terms and interface coupling.
//!
//! Per element and coordinate line, node `i` receives
//!
//! ```text
//! du_i = -(1/J) sum_j 2 D_ij F_ec(q_i, q_j)
//! ```
//!
//! plus boundary corrections at the line endpoints that penalize against the
//! neighbor trace (periodic) or a prescribed exterior state (Dirichlet):
//! the right endpoint subtracts `(f* - f)/(J w_end)`, the left endpoint adds
//! the mirrored term.

use super::flux::{self, PrimState};
use super::EulerSystem;
use crate::error::Result;

#[derive(Clone, Copy)]
enum Side {
    Lo,
    Hi,
}

impl EulerSystem {
    pub(super) fn element_rhs_1d(
        &self,
        elem: usize,
        t: f64,
        u: &[f64],
        out: &mut [f64],
    ) -> Result<()> {
        let nn = self.op.n_nodes();
        let mut prims = Vec::with_capacity(nn);
        for node in 0..nn {
            prims.push(flux::prim_from_cons(
                self.node_state(u, elem, node),
                &self.gas,
                elem,
                node,
            )?);
        }
        let line: Vec<usize> = (0..nn).collect();
        self.line_terms(elem, t, u, &prims, &line, 0, 0, out)
    }

    pub(super) fn element_rhs_2d(
        &self,
        elem: usize,
        t: f64,
        u: &[f64],
        out: &mut [f64],
    ) -> Result<()> {
        let nn = self.op.n_nodes();
        let mut prims = Vec::with_capacity(nn * nn);
        for node in 0..nn * nn {
            prims.push(flux::prim_from_cons(
                self.node_state(u, elem, node),
                &self.gas,
                elem,
                node,
            )?);
        }
        let mut line = vec![0usize; nn];
        for j in 0..nn {
            for (i, slot) in line.iter_mut().enumerate() {
                *slot = j * nn + i;
            }
            self.line_terms(elem, t, u, &prims, &line, 0, j, out)?;
        }
        for i in 0..nn {
            for (j, slot) in line.iter_mut().enumerate() {
                *slot = j * nn + i;
            }
            self.line_terms(elem, t, u, &prims, &line, 1, i, out)?;
        }
        Ok(())
    }

    /// Adds the `dir`-direction terms of one coordinate line: `line[k]` is the
    /// node index of the k-th node along the line, `transverse` the index of
    /// the line in the other direction.
    #[allow(clippy::too_many_arguments)]
    fn line_terms(
        &self,
        elem: usize,
        t: f64,
        u: &[f64],
        prims: &[PrimState],
        line: &[usize],
        dir: usize,
        transverse: usize,
        out: &mut [f64],
    ) -> Result<()> {
        let nn = line.len();
        let nc = self.n_cons;
        let inv_j = 1.0 / self.mesh.jacobian(dir);
        let mut f = vec![0.0; nc];
        let mut f_phys = vec![0.0; nc];

        // volume flux differencing, using the symmetry of the two-point flux
        for (ki, &ni) in line.iter().enumerate() {
            let dii = self.op.d[ki][ki];
            if dii != 0.0 {
                flux::physical_flux_prim(
                    &prims[ni],
                    self.node_state(u, elem, ni),
                    dir,
                    &self.gas,
                    &mut f,
                );
                for c in 0..nc {
                    out[ni * nc + c] -= inv_j * 2.0 * dii * f[c];
                }
            }
            for (kj, &nj) in line.iter().enumerate().skip(ki + 1) {
                flux::ec_flux_prim(&prims[ni], &prims[nj], dir, &self.gas, &mut f);
                let dij = self.op.d[ki][kj];
                let dji = self.op.d[kj][ki];
                for c in 0..nc {
                    out[ni * nc + c] -= inv_j * 2.0 * dij * f[c];
                    out[nj * nc + c] -= inv_j * 2.0 * dji * f[c];
                }
            }
        }

        // interface terms at the two line endpoints
        let n_lo = line[0];
        let n_hi = line[nn - 1];
        let (q_ext, prim_ext) = self.exterior_trace(elem, t, u, dir, transverse, Side::Lo)?;
        flux::interface_flux_prim(
            &prim_ext,
            &prims[n_lo],
            &q_ext,
            self.node_state(u, elem, n_lo),
            dir,
            self.mode,
            &self.gas,
            &mut f,
        );
        flux::physical_flux_prim(
            &prims[n_lo],
            self.node_state(u, elem, n_lo),
            dir,
            &self.gas,
            &mut f_phys,
        );
        let coeff = inv_j / self.op.weights[0];
        for c in 0..nc {
            out[n_lo * nc + c] += coeff * (f[c] - f_phys[c]);
        }

        let (q_ext, prim_ext) = self.exterior_trace(elem, t, u, dir, transverse, Side::Hi)?;
        flux::interface_flux_prim(
            &prims[n_hi],
            &prim_ext,
            self.node_state(u, elem, n_hi),
            &q_ext,
            dir,
            self.mode,
            &self.gas,
            &mut f,
        );
        flux::physical_flux_prim(
            &prims[n_hi],
            self.node_state(u, elem, n_hi),
            dir,
            &self.gas,
            &mut f_phys,
        );
        let coeff = inv_j / self.op.weights[nn - 1];
        for c in 0..nc {
            out[n_hi * nc + c] -= coeff * (f[c] - f_phys[c]);
        }
        Ok(())
    }

    /// State seen across the `side` face of `elem` in direction `dir`: the
    /// adjacent trace node of the neighbor element, or the prescribed
    /// exterior state on a Dirichlet boundary.
    fn exterior_trace(
        &self,
        elem: usize,
        t: f64,
        u: &[f64],
        dir: usize,
        transverse: usize,
        side: Side,
    ) -> Result<(Vec<f64>, PrimState)> {
        let nx = self.mesh.n_elem[0];
        let (ex, ey) = (elem % nx, elem / nx);
        let n_dir = self.mesh.n_elem[dir];
        let coord = if dir == 0 { ex } else { ey };
        let at_boundary = match side {
            Side::Lo => coord == 0,
            Side::Hi => coord == n_dir - 1,
        };
        let use_dirichlet = at_boundary && self.mesh.bc == super::BoundaryKind::DirichletExterior;

        if use_dirichlet {
            // the boundary trace node sits exactly on the face
            let node = self.trace_node(dir, transverse, side, true);
            let pos = self.node_position(elem, node);
            let prim = self.exterior_state(&pos, t)?;
            let q = prim.to_cons(&self.gas, self.n_cons);
            return Ok((q, prim));
        }

        let neighbor_coord = match side {
            Side::Lo => (coord + n_dir - 1) % n_dir,
            Side::Hi => (coord + 1) % n_dir,
        };
        let (nex, ney) = if dir == 0 {
            (neighbor_coord, ey)
        } else {
            (ex, neighbor_coord)
        };
        let neighbor = ney * nx + nex;
        // the neighbor's adjacent node is on its opposite face
        let node = self.trace_node(dir, transverse, side, false);
        let q = self.node_state(u, neighbor, node).to_vec();
        let prim = flux::prim_from_cons(&q, &self.gas, neighbor, node)?;
        Ok((q, prim))
    }

    /// Node index of a trace node: for `own = true` the node of this element
    /// on the `side` face, otherwise the facing node of the neighbor.
    fn trace_node(&self, dir: usize, transverse: usize, side: Side, own: bool) -> usize {
        let nn = self.op.n_nodes();
        let end = match (side, own) {
            (Side::Lo, true) | (Side::Hi, false) => 0,
            (Side::Hi, true) | (Side::Lo, false) => nn - 1,
        };
        if self.mesh.dim == 1 {
            end
        } else if dir == 0 {
            transverse * nn + end
        } else {
            end * nn + transverse
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{
        lgl_operator, BoundaryKind, EulerSystem, GasModel, InterfaceMode, Mesh, PrimState,
    };
    use crate::ode::OdeSystem;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn periodic_1d(p: usize, n: usize, mode: InterfaceMode) -> EulerSystem {
        EulerSystem::new(
            GasModel::air(),
            Mesh::line(n, 0.0, 2.0, BoundaryKind::Periodic).unwrap(),
            lgl_operator(p).unwrap(),
            mode,
        )
        .unwrap()
    }

    fn periodic_2d(p: usize, n: usize, mode: InterfaceMode) -> EulerSystem {
        EulerSystem::new(
            GasModel::air(),
            Mesh::square(n, -1.0, 1.0, BoundaryKind::Periodic).unwrap(),
            lgl_operator(p).unwrap(),
            mode,
        )
        .unwrap()
    }

    fn smooth_field_1d(sys: &EulerSystem) -> Vec<f64> {
        sys.init_field(|x| {
            PrimState::new_1d(
                1.0 + 0.3 * (std::f64::consts::PI * x[0]).sin(),
                0.4 * (std::f64::consts::PI * x[0]).cos(),
                1.0 + 0.2 * (2.0 * std::f64::consts::PI * x[0]).cos(),
            )
        })
        .data
    }

    fn smooth_field_2d(sys: &EulerSystem) -> Vec<f64> {
        use std::f64::consts::PI;
        sys.init_field(|x| {
            PrimState::new_2d(
                1.0 + 0.25 * (PI * x[0]).sin() * (PI * x[1]).cos(),
                0.3 * (PI * x[1]).sin(),
                -0.2 * (PI * x[0]).cos(),
                1.0 + 0.2 * (PI * x[0]).cos() * (PI * x[1]).sin(),
            )
        })
        .data
    }

    #[test]
    fn free_stream_preservation() {
        for (dim, mode) in [
            (1, InterfaceMode::Ec),
            (1, InterfaceMode::EsRusanov),
            (2, InterfaceMode::Ec),
            (2, InterfaceMode::EsRusanov),
        ] {
            let sys = if dim == 1 {
                periodic_1d(4, 6, mode)
            } else {
                periodic_2d(3, 4, mode)
            };
            let u = if dim == 1 {
                sys.init_field(|_| PrimState::new_1d(1.1, 0.4, 0.9)).data
            } else {
                sys.init_field(|_| PrimState::new_2d(1.1, 0.4, -0.3, 0.9)).data
            };
            let du = sys.semidiscrete_rhs(&u, 0.0).unwrap();
            let worst = du.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(worst < 1e-13, "dim {dim}, {mode:?}: {worst}");
        }
    }

    #[test]
    fn periodic_primary_conservation() {
        let sys = periodic_1d(3, 8, InterfaceMode::EsRusanov);
        let u = smooth_field_1d(&sys);
        let du = sys.semidiscrete_rhs(&u, 0.0).unwrap();
        let sums = sys.linear_invariants(&du);
        for (c, s) in sums.iter().enumerate() {
            assert!(s.abs() < 1e-12, "component {c}: {s}");
        }

        let sys = periodic_2d(2, 4, InterfaceMode::EsRusanov);
        let u = smooth_field_2d(&sys);
        let du = sys.semidiscrete_rhs(&u, 0.0).unwrap();
        let sums = sys.linear_invariants(&du);
        for (c, s) in sums.iter().enumerate() {
            assert!(s.abs() < 1e-12, "2d component {c}: {s}");
        }
    }

    #[test]
    fn periodic_ec_entropy_conservation() {
        let sys = periodic_1d(3, 8, InterfaceMode::Ec);
        let u = smooth_field_1d(&sys);
        let du = sys.semidiscrete_rhs(&u, 0.0).unwrap();
        let rates = sys.local_entropy_rate(&u, &du).unwrap();
        let total: f64 = rates.iter().sum();
        let scale: f64 = 1.0 + rates.iter().map(|r| r.abs()).sum::<f64>();
        assert!(total.abs() < 1e-11 * scale, "total {total}");

        let sys = periodic_2d(2, 4, InterfaceMode::Ec);
        let u = smooth_field_2d(&sys);
        let du = sys.semidiscrete_rhs(&u, 0.0).unwrap();
        let rates = sys.local_entropy_rate(&u, &du).unwrap();
        let total: f64 = rates.iter().sum();
        let scale: f64 = 1.0 + rates.iter().map(|r| r.abs()).sum::<f64>();
        assert!(total.abs() < 1e-11 * scale, "2d total {total}");
    }

    #[test]
    fn rusanov_entropy_rate_nonpositive() {
        let sys = periodic_1d(3, 8, InterfaceMode::EsRusanov);
        let u = smooth_field_1d(&sys);
        let du = sys.semidiscrete_rhs(&u, 0.0).unwrap();
        let rates = sys.local_entropy_rate(&u, &du).unwrap();
        let total: f64 = rates.iter().sum();
        let scale: f64 = 1.0 + rates.iter().map(|r| r.abs()).sum::<f64>();
        assert!(total <= 1e-11 * scale, "total {total}");
    }

    #[test]
    fn local_entropy_additivity_and_scaling() {
        let sys = periodic_1d(2, 5, InterfaceMode::Ec);
        // constant reference state has S = 0
        let u0 = sys.init_field(|_| PrimState::new_1d(1.0, 0.0, 1.0)).data;
        for eta in sys.local_entropy(&u0).unwrap() {
            assert!(eta.abs() < 1e-15);
        }
        // doubling the element volume doubles each per-element entropy
        let wide = EulerSystem::new(
            GasModel::air(),
            Mesh::line(5, 0.0, 4.0, BoundaryKind::Periodic).unwrap(),
            lgl_operator(2).unwrap(),
            InterfaceMode::Ec,
        )
        .unwrap();
        let cst = PrimState::new_1d(0.7, 0.2, 1.3);
        let ua = sys.init_field(|_| cst).data;
        let ub = wide.init_field(|_| cst).data;
        let ea = sys.local_entropy(&ua).unwrap();
        let eb = wide.local_entropy(&ub).unwrap();
        for (a, b) in ea.iter().zip(&eb) {
            assert!((2.0 * a - b).abs() < 1e-13 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn entropy_rate_matches_finite_difference() {
        let sys = periodic_1d(3, 6, InterfaceMode::EsRusanov);
        let u = smooth_field_1d(&sys);
        let du = sys.semidiscrete_rhs(&u, 0.0).unwrap();
        let rates = sys.local_entropy_rate(&u, &du).unwrap();
        let unorm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let dnorm = du.iter().map(|x| x * x).sum::<f64>().sqrt();
        let eps = 1e-6 * unorm / dnorm;
        let up: Vec<f64> = u.iter().zip(&du).map(|(a, b)| a + eps * b).collect();
        let um: Vec<f64> = u.iter().zip(&du).map(|(a, b)| a - eps * b).collect();
        let ep = sys.local_entropy(&up).unwrap();
        let em = sys.local_entropy(&um).unwrap();
        for ((r, p), m) in rates.iter().zip(&ep).zip(&em) {
            let fd = (p - m) / (2.0 * eps);
            assert!(
                (r - fd).abs() <= 1e-6 * (1.0 + r.abs()),
                "rate {r} vs fd {fd}"
            );
        }
    }

    #[test]
    fn zero_tendency_zero_rate() {
        let sys = periodic_1d(2, 4, InterfaceMode::Ec);
        let u = smooth_field_1d(&sys);
        let du = vec![0.0; u.len()];
        for r in sys.local_entropy_rate(&u, &du).unwrap() {
            assert_eq!(r, 0.0);
        }
    }

    #[test]
    fn partition_entropy_matches_full_evaluation() {
        let sys = periodic_2d(2, 3, InterfaceMode::Ec);
        let u = smooth_field_2d(&sys);
        let mut rng = StdRng::seed_from_u64(5);
        let d: Vec<f64> = u.iter().map(|_| rng.gen_range(-1e-3..1e-3)).collect();
        for gamma in [0.0, 0.45, 1.0, 1.2] {
            let combined: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a + gamma * b).collect();
            let full = sys.local_entropy(&combined).unwrap();
            for kappa in 0..sys.n_partitions() {
                let fast = sys.partition_entropy_at(kappa, &u, &d, gamma).unwrap();
                assert!(
                    (fast - full[kappa]).abs() < 1e-14 * (1.0 + full[kappa].abs()),
                    "kappa {kappa}, gamma {gamma}"
                );
            }
        }
    }

    #[test]
    fn parallel_rhs_is_bitwise_identical() {
        let mut sys = periodic_2d(3, 4, InterfaceMode::EsRusanov);
        let u = smooth_field_2d(&sys);
        let serial = sys.semidiscrete_rhs(&u, 0.0).unwrap();
        sys.parallel = true;
        let parallel = sys.semidiscrete_rhs(&u, 0.0).unwrap();
        assert_eq!(serial, parallel);
    }

    #[test]
    fn positivity_violation_reports_location() {
        let sys = periodic_1d(2, 4, InterfaceMode::Ec);
        let mut u = sys.init_field(|_| PrimState::new_1d(1.0, 0.0, 1.0)).data;
        u[0] = -0.5; // density of element 0, node 0
        let err = sys.semidiscrete_rhs(&u, 0.0).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("density") && msg.contains("element 0"), "{msg}");
    }
}
