//! Contract properties of the entropy functionals: convexity along segments
//! and agreement between the entropy rate and directional derivatives, for
//! the registered systems.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rrk::euler::{lgl_operator, BoundaryKind, EulerSystem, GasModel, InterfaceMode, Mesh, PrimState};
use rrk::ode::OdeSystem;
use rrk::problems::{ExpEntropyOde, RotationOde};

fn random_positive_field(sys: &EulerSystem, rng: &mut StdRng) -> Vec<f64> {
    let two_d = sys.mesh.dim == 2;
    let nc = sys.n_cons();
    let mut data = Vec::new();
    for _ in 0..sys.mesh.n_elements() * sys.nodes_per_element() {
        let prim = PrimState {
            rho: rng.gen_range(0.2..3.0),
            vel: [
                rng.gen_range(-2.0..2.0),
                if two_d { rng.gen_range(-2.0..2.0) } else { 0.0 },
            ],
            p: rng.gen_range(0.2..3.0),
        };
        data.extend(prim.to_cons(&sys.gas, nc));
    }
    data
}

#[test]
fn euler_partition_entropies_are_convex_along_segments() {
    // pressure is concave in the conservative variables, so any convex
    // combination of admissible states stays admissible and the entropy can
    // be sampled along the whole segment
    let mut rng = StdRng::seed_from_u64(101);
    for dim in [1usize, 2] {
        let sys = EulerSystem::new(
            GasModel::air(),
            if dim == 1 {
                Mesh::line(3, 0.0, 1.0, BoundaryKind::Periodic).unwrap()
            } else {
                Mesh::square(2, 0.0, 1.0, BoundaryKind::Periodic).unwrap()
            },
            lgl_operator(2).unwrap(),
            InterfaceMode::Ec,
        )
        .unwrap();
        let k = sys.n_partitions();
        for _ in 0..20 {
            let a = random_positive_field(&sys, &mut rng);
            let b = random_positive_field(&sys, &mut rng);
            let mut eta_a = vec![0.0; k];
            let mut eta_b = vec![0.0; k];
            sys.entropy(&a, &mut eta_a).unwrap();
            sys.entropy(&b, &mut eta_b).unwrap();
            for step in 0..=10 {
                let lambda = step as f64 / 10.0;
                let mix: Vec<f64> = a
                    .iter()
                    .zip(&b)
                    .map(|(x, y)| lambda * x + (1.0 - lambda) * y)
                    .collect();
                let mut eta_mix = vec![0.0; k];
                sys.entropy(&mix, &mut eta_mix).unwrap();
                for kappa in 0..k {
                    let chord = lambda * eta_a[kappa] + (1.0 - lambda) * eta_b[kappa];
                    let scale = eta_a[kappa].abs().max(eta_b[kappa].abs()).max(1.0);
                    assert!(
                        eta_mix[kappa] <= chord + 1e-12 * scale,
                        "dim {dim}, kappa {kappa}, lambda {lambda}: {} > {chord}",
                        eta_mix[kappa]
                    );
                }
            }
        }
    }
}

#[test]
fn toy_entropies_are_convex_along_segments() {
    let mut rng = StdRng::seed_from_u64(103);
    let systems: Vec<Box<dyn OdeSystem>> = vec![Box::new(ExpEntropyOde), Box::new(RotationOde)];
    for sys in &systems {
        for _ in 0..50 {
            let a: Vec<f64> = (0..sys.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let b: Vec<f64> = (0..sys.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let mut eta_a = vec![0.0; 1];
            let mut eta_b = vec![0.0; 1];
            sys.entropy(&a, &mut eta_a).unwrap();
            sys.entropy(&b, &mut eta_b).unwrap();
            for step in 0..=10 {
                let lambda = step as f64 / 10.0;
                let mix: Vec<f64> = a
                    .iter()
                    .zip(&b)
                    .map(|(x, y)| lambda * x + (1.0 - lambda) * y)
                    .collect();
                let mut eta_mix = vec![0.0; 1];
                sys.entropy(&mix, &mut eta_mix).unwrap();
                let chord = lambda * eta_a[0] + (1.0 - lambda) * eta_b[0];
                let scale = eta_a[0].abs().max(eta_b[0].abs()).max(1.0);
                assert!(eta_mix[0] <= chord + 1e-12 * scale);
            }
        }
    }
}

#[test]
fn euler_entropy_rate_is_the_directional_derivative() {
    // the integrator relies on rates evaluated with the same quadrature as
    // the entropies themselves; check against central differences at the
    // spec scaling eps = 1e-6 |u| / |du|
    let mut rng = StdRng::seed_from_u64(107);
    let sys = EulerSystem::new(
        GasModel::air(),
        Mesh::line(4, 0.0, 1.0, BoundaryKind::Periodic).unwrap(),
        lgl_operator(3).unwrap(),
        InterfaceMode::EsRusanov,
    )
    .unwrap();
    for _ in 0..20 {
        let u = random_positive_field(&sys, &mut rng);
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
            assert!((r - fd).abs() <= 1e-6 * (1.0 + r.abs()), "{r} vs {fd}");
        }
    }
}
