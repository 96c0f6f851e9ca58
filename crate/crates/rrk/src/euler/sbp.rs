//! Diagonal-norm collocation operators on Legendre-Gauss-Lobatto nodes.

use crate::error::{Error, Result};

/// Degree-`p` collocation operator on the reference interval `[-1, 1]`.
///
/// `weights` is the diagonal norm (quadrature) matrix and `d` the collocation
/// derivative of the Lagrange basis. Together they satisfy the
/// summation-by-parts identity `P D + D^T P = B` with
/// `B = diag(-1, 0, ..., 0, 1)`.
#[derive(Debug, Clone)]
pub struct SbpOperator {
    pub p: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub d: Vec<Vec<f64>>,
}

impl SbpOperator {
    pub fn n_nodes(&self) -> usize {
        self.p + 1
    }

    /// Max-norm defect of `P D + D^T P - B`.
    pub fn sbp_defect(&self) -> f64 {
        let n = self.n_nodes();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut m = self.weights[i] * self.d[i][j] + self.weights[j] * self.d[j][i];
                if i == j && i == 0 {
                    m += 1.0;
                }
                if i == j && i == n - 1 {
                    m -= 1.0;
                }
                worst = worst.max(m.abs());
            }
        }
        worst
    }
}

/// Legendre polynomial value and first derivative at `x`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = p_next;
    }
    // (1 - x^2) P_n' = n (P_{n-1} - x P_n)
    let dp = if x.abs() < 1.0 {
        n as f64 * (p_prev - x * p) / (1.0 - x * x)
    } else {
        // |P_n'(+-1)| = n(n+1)/2 with sign (+-1)^(n-1)
        let sign = if x > 0.0 { 1.0 } else { (-1.0f64).powi(n as i32 - 1) };
        sign * n as f64 * (n as f64 + 1.0) / 2.0
    };
    (p, dp)
}

/// Builds the degree-`p` LGL operator, `1 <= p <= 8`.
///
/// Interior nodes are the roots of `P_p'`, found by Newton iteration from
/// Chebyshev-Gauss-Lobatto starting values; weights are
/// `2 / (p (p+1) P_p(x_i)^2)`.
pub fn lgl_operator(p: usize) -> Result<SbpOperator> {
    if !(1..=8).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "lgl_operator supports 1 <= p <= 8, got {p}"
        )));
    }
    let n = p + 1;
    let mut nodes = vec![0.0; n];
    nodes[0] = -1.0;
    nodes[n - 1] = 1.0;
    for j in 1..n - 1 {
        // Newton on P_p'(x) = 0; the second derivative comes from the
        // Legendre ODE (1-x^2) P'' = 2 x P' - p(p+1) P
        let mut x = -(std::f64::consts::PI * j as f64 / p as f64).cos();
        for _ in 0..100 {
            let (pp, dp) = legendre(p, x);
            let ddp = (2.0 * x * dp - (p * (p + 1)) as f64 * pp) / (1.0 - x * x);
            let dx = dp / ddp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[j] = x;
    }
    // enforce the symmetry x_j = -x_{n-1-j} exactly
    for j in 0..n / 2 {
        let sym = 0.5 * (nodes[j] - nodes[n - 1 - j]);
        nodes[j] = sym;
        nodes[n - 1 - j] = -sym;
    }

    let mut weights = vec![0.0; n];
    for j in 0..n {
        let (pp, _) = legendre(p, nodes[j]);
        weights[j] = 2.0 / ((p * (p + 1)) as f64 * pp * pp);
    }

    // collocation derivative via barycentric weights, with the negative-sum
    // trick so that D 1 = 0 holds exactly
    let mut bary = vec![1.0; n];
    for i in 0..n {
        for k in 0..n {
            if k != i {
                bary[i] *= nodes[i] - nodes[k];
            }
        }
        bary[i] = 1.0 / bary[i];
    }
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                d[i][j] = (bary[j] / bary[i]) / (nodes[i] - nodes[j]);
                diag -= d[i][j];
            }
        }
        d[i][i] = diag;
    }

    Ok(SbpOperator {
        p,
        nodes,
        weights,
        d,
    })
}
