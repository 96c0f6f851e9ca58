//! Entropy-conservative/entropy-stable discontinuous collocation
//! semidiscretization of the compressible Euler equations on uniform
//! Cartesian meshes (1D and tensor-product 2D), one entropy partition per
//! element.

pub mod flux;
mod rhs;
pub mod sbp;

pub use flux::{
    ec_flux, entropy_quantities, interface_flux, log_mean, physical_flux, prim_from_cons,
    GasModel, InterfaceMode, PrimState,
};
pub use sbp::{lgl_operator, SbpOperator};

use crate::error::{Error, Result};
use crate::ode::OdeSystem;
use rayon::prelude::*;
use std::sync::Arc;

/// Boundary treatment of the mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    Periodic,
    /// Weak Dirichlet data imposed through the interface flux against a
    /// prescribed exterior state.
    DirichletExterior,
}

/// Uniform Cartesian mesh; elements are equal intervals/rectangles.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub dim: usize,
    /// Elements per direction (`[n, 1]` in 1D).
    pub n_elem: [usize; 2],
    /// Domain bounds per direction.
    pub bounds: [[f64; 2]; 2],
    pub bc: BoundaryKind,
}

impl Mesh {
    pub fn line(n: usize, lo: f64, hi: f64, bc: BoundaryKind) -> Result<Self> {
        Self::validate(Self {
            dim: 1,
            n_elem: [n, 1],
            bounds: [[lo, hi], [0.0, 1.0]],
            bc,
        })
    }

    pub fn square(n: usize, lo: f64, hi: f64, bc: BoundaryKind) -> Result<Self> {
        Self::validate(Self {
            dim: 2,
            n_elem: [n, n],
            bounds: [[lo, hi], [lo, hi]],
            bc,
        })
    }

    fn validate(self) -> Result<Self> {
        if self.dim != 1 && self.dim != 2 {
            return Err(Error::InvalidArgument(format!("mesh dim {} not in {{1, 2}}", self.dim)));
        }
        for d in 0..self.dim {
            if self.n_elem[d] < 1 {
                return Err(Error::InvalidArgument("need at least one element".into()));
            }
            if !(self.bounds[d][1] > self.bounds[d][0]) {
                return Err(Error::InvalidArgument(format!(
                    "degenerate bounds in direction {d}"
                )));
            }
        }
        Ok(self)
    }

    pub fn n_elements(&self) -> usize {
        self.n_elem[0] * if self.dim == 2 { self.n_elem[1] } else { 1 }
    }

    /// Element width in direction `dir`.
    pub fn dx(&self, dir: usize) -> f64 {
        (self.bounds[dir][1] - self.bounds[dir][0]) / self.n_elem[dir] as f64
    }

    /// Per-direction mapping Jacobian (half the element width).
    pub fn jacobian(&self, dir: usize) -> f64 {
        0.5 * self.dx(dir)
    }

    /// Volume Jacobian (product over directions).
    pub fn volume_jacobian(&self) -> f64 {
        (0..self.dim).map(|d| self.jacobian(d)).product()
    }
}

/// Element-blocked conservative variables: all values of element `e` are
/// contiguous, nodes in lexicographic order, components innermost.
#[derive(Debug, Clone)]
pub struct EulerField {
    pub data: Vec<f64>,
    pub n_elements: usize,
    pub nodes_per_element: usize,
    pub n_cons: usize,
}

type ExteriorFn = Arc<dyn Fn(&[f64; 2], f64) -> PrimState + Send + Sync>;

/// The semidiscrete Euler operator: volume flux differencing with a two-point
/// entropy-conservative flux plus interface/boundary coupling terms, exposed
/// through the [`OdeSystem`] contract with one entropy partition per element.
pub struct EulerSystem {
    pub gas: GasModel,
    pub mesh: Mesh,
    pub op: SbpOperator,
    pub mode: InterfaceMode,
    /// Exterior state for Dirichlet boundaries, as a function of face
    /// position and time.
    exterior: Option<ExteriorFn>,
    /// Parallelize element loops (results are independent of thread count).
    pub parallel: bool,
    n_cons: usize,
    nodes_per_element: usize,
    /// Tensor-product quadrature weight per node.
    node_weights: Vec<f64>,
}

impl EulerSystem {
    pub fn new(gas: GasModel, mesh: Mesh, op: SbpOperator, mode: InterfaceMode) -> Result<Self> {
        let nn = op.n_nodes();
        let (n_cons, nodes_per_element) = match mesh.dim {
            1 => (3, nn),
            2 => (4, nn * nn),
            _ => unreachable!(),
        };
        let mut node_weights = Vec::with_capacity(nodes_per_element);
        match mesh.dim {
            1 => node_weights.extend_from_slice(&op.weights),
            _ => {
                for j in 0..nn {
                    for i in 0..nn {
                        node_weights.push(op.weights[i] * op.weights[j]);
                    }
                }
            }
        }
        Ok(Self {
            gas,
            mesh,
            op,
            mode,
            exterior: None,
            parallel: false,
            n_cons,
            nodes_per_element,
            node_weights,
        })
    }

    /// Sets the exterior state used by Dirichlet boundaries.
    pub fn with_exterior(
        mut self,
        f: impl Fn(&[f64; 2], f64) -> PrimState + Send + Sync + 'static,
    ) -> Self {
        self.exterior = Some(Arc::new(f));
        self
    }

    pub fn n_cons(&self) -> usize {
        self.n_cons
    }

    pub fn nodes_per_element(&self) -> usize {
        self.nodes_per_element
    }

    pub(crate) fn exterior_state(&self, pos: &[f64; 2], t: f64) -> Result<PrimState> {
        match &self.exterior {
            Some(f) => Ok(f(pos, t)),
            None => Err(Error::InvalidArgument(
                "Dirichlet boundary requires an exterior state function".into(),
            )),
        }
    }

    /// Physical position of a node, by element and node index.
    pub fn node_position(&self, elem: usize, node: usize) -> [f64; 2] {
        let nn = self.op.n_nodes();
        let nx = self.mesh.n_elem[0];
        let (ex, ey) = (elem % nx, elem / nx);
        let (i, j) = if self.mesh.dim == 1 {
            (node, 0)
        } else {
            (node % nn, node / nn)
        };
        let x = self.mesh.bounds[0][0]
            + (ex as f64 + 0.5 * (self.op.nodes[i] + 1.0)) * self.mesh.dx(0);
        let y = if self.mesh.dim == 2 {
            self.mesh.bounds[1][0] + (ey as f64 + 0.5 * (self.op.nodes[j] + 1.0)) * self.mesh.dx(1)
        } else {
            0.0
        };
        [x, y]
    }

    /// Center of an element.
    pub fn element_center(&self, elem: usize) -> [f64; 2] {
        let nx = self.mesh.n_elem[0];
        let (ex, ey) = (elem % nx, elem / nx);
        let x = self.mesh.bounds[0][0] + (ex as f64 + 0.5) * self.mesh.dx(0);
        let y = if self.mesh.dim == 2 {
            self.mesh.bounds[1][0] + (ey as f64 + 0.5) * self.mesh.dx(1)
        } else {
            0.0
        };
        [x, y]
    }

    /// Samples an initial condition at the collocation nodes.
    pub fn init_field(&self, f: impl Fn(&[f64; 2]) -> PrimState) -> EulerField {
        let n_elements = self.mesh.n_elements();
        let mut data = vec![0.0; n_elements * self.nodes_per_element * self.n_cons];
        for elem in 0..n_elements {
            for node in 0..self.nodes_per_element {
                let prim = f(&self.node_position(elem, node));
                let q = prim.to_cons(&self.gas, self.n_cons);
                let base = (elem * self.nodes_per_element + node) * self.n_cons;
                data[base..base + self.n_cons].copy_from_slice(&q);
            }
        }
        EulerField {
            data,
            n_elements,
            nodes_per_element: self.nodes_per_element,
            n_cons: self.n_cons,
        }
    }

    #[inline]
    pub(crate) fn node_state<'a>(&self, u: &'a [f64], elem: usize, node: usize) -> &'a [f64] {
        let base = (elem * self.nodes_per_element + node) * self.n_cons;
        &u[base..base + self.n_cons]
    }

    /// Semidiscrete tendency `du = f(t, u)`.
    pub fn semidiscrete_rhs(&self, u: &[f64], t: f64) -> Result<Vec<f64>> {
        let mut du = vec![0.0; u.len()];
        self.rhs_into(t, u, &mut du)?;
        Ok(du)
    }

    fn rhs_into(&self, t: f64, u: &[f64], du: &mut [f64]) -> Result<()> {
        assert_eq!(u.len(), self.dim());
        assert_eq!(du.len(), self.dim());
        let block = self.nodes_per_element * self.n_cons;
        if self.parallel {
            du.par_chunks_mut(block)
                .enumerate()
                .try_for_each(|(elem, out)| self.element_rhs(elem, t, u, out))
        } else {
            du.chunks_mut(block)
                .enumerate()
                .try_for_each(|(elem, out)| self.element_rhs(elem, t, u, out))
        }
    }

    fn element_rhs(&self, elem: usize, t: f64, u: &[f64], out: &mut [f64]) -> Result<()> {
        out.fill(0.0);
        match self.mesh.dim {
            1 => self.element_rhs_1d(elem, t, u, out),
            _ => self.element_rhs_2d(elem, t, u, out),
        }
    }

    /// Quadrature of the entropy density over element `kappa`.
    fn element_entropy(&self, u: &[f64], kappa: usize) -> Result<f64> {
        let jvol = self.mesh.volume_jacobian();
        let mut acc = 0.0;
        for node in 0..self.nodes_per_element {
            let prim = prim_from_cons(self.node_state(u, kappa, node), &self.gas, kappa, node)?;
            acc += self.node_weights[node] * flux::entropy_density_prim(&prim, &self.gas);
        }
        Ok(jvol * acc)
    }

    /// Per-element entropies `eta_k(u)`.
    pub fn local_entropy(&self, u: &[f64]) -> Result<Vec<f64>> {
        (0..self.mesh.n_elements())
            .map(|kappa| self.element_entropy(u, kappa))
            .collect()
    }

    /// Per-element entropy rates `eta_k'(u) . du`.
    pub fn local_entropy_rate(&self, u: &[f64], du: &[f64]) -> Result<Vec<f64>> {
        let jvol = self.mesh.volume_jacobian();
        let mut w = vec![0.0; self.n_cons];
        let mut rates = Vec::with_capacity(self.mesh.n_elements());
        for kappa in 0..self.mesh.n_elements() {
            let mut acc = 0.0;
            for node in 0..self.nodes_per_element {
                let prim =
                    prim_from_cons(self.node_state(u, kappa, node), &self.gas, kappa, node)?;
                flux::entropy_variables_prim(&prim, &self.gas, &mut w);
                let dq = self.node_state(du, kappa, node);
                let wd: f64 = w.iter().zip(dq).map(|(wi, di)| wi * di).sum();
                acc += self.node_weights[node] * wd;
            }
            rates.push(jvol * acc);
        }
        Ok(rates)
    }
}

impl OdeSystem for EulerSystem {
    fn dim(&self) -> usize {
        self.mesh.n_elements() * self.nodes_per_element * self.n_cons
    }

    fn n_partitions(&self) -> usize {
        self.mesh.n_elements()
    }

    fn rhs(&self, t: f64, u: &[f64], du: &mut [f64]) -> Result<()> {
        self.rhs_into(t, u, du)
    }

    fn entropy(&self, u: &[f64], eta: &mut [f64]) -> Result<()> {
        for kappa in 0..self.mesh.n_elements() {
            eta[kappa] = self.element_entropy(u, kappa)?;
        }
        Ok(())
    }

    fn entropy_rate(&self, _t: f64, u: &[f64], du: &[f64], rate: &mut [f64]) -> Result<()> {
        let rates = self.local_entropy_rate(u, du)?;
        rate.copy_from_slice(&rates);
        Ok(())
    }

    fn linear_invariants(&self, u: &[f64]) -> Vec<f64> {
        let jvol = self.mesh.volume_jacobian();
        let mut sums = vec![0.0; self.n_cons];
        for elem in 0..self.mesh.n_elements() {
            for node in 0..self.nodes_per_element {
                let q = self.node_state(u, elem, node);
                let wj = self.node_weights[node] * jvol;
                for (s, qv) in sums.iter_mut().zip(q) {
                    *s += wj * qv;
                }
            }
        }
        sums
    }

    /// Touches only the owning element block.
    fn partition_entropy_at(&self, kappa: usize, u: &[f64], d: &[f64], gamma: f64) -> Result<f64> {
        let jvol = self.mesh.volume_jacobian();
        let mut acc = 0.0;
        let mut q = vec![0.0; self.n_cons];
        for node in 0..self.nodes_per_element {
            let base = (kappa * self.nodes_per_element + node) * self.n_cons;
            for c in 0..self.n_cons {
                q[c] = u[base + c] + gamma * d[base + c];
            }
            let prim = prim_from_cons(&q, &self.gas, kappa, node)?;
            acc += self.node_weights[node] * flux::entropy_density_prim(&prim, &self.gas);
        }
        Ok(jvol * acc)
    }
}
