//! Method-of-exact-solutions consistency: sampling the vortex solution and
//! applying the semidiscrete operator must reproduce its time derivative,
//! with the defect vanishing under mesh refinement.
//!
//! The collocation residual loses one order to the solution error: it
//! converges at rate ~p in L2 (the solution itself converges at p+1, which
//! is what the acceptance convergence studies verify).

use rrk::problems::{build_euler_system, evaluate_exact, make_problem, ProblemOverrides};

fn residual_l2(p: usize, n: usize) -> f64 {
    let spec = make_problem("isentropic_vortex", &ProblemOverrides::default()).unwrap();
    let (sys, _) = build_euler_system(&spec, p, n, spec.interface).unwrap();
    let t0 = 0.37;
    let sample = |t: f64| {
        sys.init_field(|x| evaluate_exact(&spec, x, t).unwrap())
            .data
    };
    let u = sample(t0);
    let du = sys.semidiscrete_rhs(&u, t0).unwrap();
    let h = 1e-6;
    let up = sample(t0 + h);
    let um = sample(t0 - h);
    let mut acc = 0.0;
    for i in 0..du.len() {
        let dudt = (up[i] - um[i]) / (2.0 * h);
        acc += (du[i] - dudt).powi(2);
    }
    (acc / du.len() as f64).sqrt()
}

#[test]
fn vortex_residual_converges_under_refinement() {
    for p in [2usize, 3] {
        let coarse = residual_l2(p, 8);
        let fine = residual_l2(p, 16);
        let rate = (coarse / fine).log2();
        assert!(
            rate >= p as f64 - 0.6,
            "p = {p}: residual rate {rate} (coarse {coarse:.3e}, fine {fine:.3e})"
        );
    }
}
