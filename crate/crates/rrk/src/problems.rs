//! Benchmark problems: initial data, exact solutions where available, and toy
//! ODE systems, all wired to the [`OdeSystem`] contract.

use crate::error::{Error, Result};
use crate::euler::{
    lgl_operator, BoundaryKind, EulerSystem, GasModel, InterfaceMode, Mesh, PrimState,
};
use crate::ode::OdeSystem;
use std::f64::consts::PI;
use std::sync::Arc;

const VALID_NAMES: &str = "isentropic_vortex, sod, sine_shock, gamma_demo, density_wave, \
                           exp_entropy_ode, quadratic_conserved_ode";

type InitFn = Arc<dyn Fn(&[f64; 2]) -> PrimState + Send + Sync>;
type ExactFn = Arc<dyn Fn(&[f64; 2], f64) -> PrimState + Send + Sync>;
type OdeExactFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// Problem-specific payload: a field problem or a small ODE.
pub enum ProblemData {
    Euler {
        dim: usize,
        gas: GasModel,
        bounds: [f64; 2],
        bc: BoundaryKind,
        init: InitFn,
        exact: Option<ExactFn>,
    },
    Ode {
        system: Arc<dyn OdeSystem + Send + Sync>,
        u0: Vec<f64>,
        exact: Option<OdeExactFn>,
    },
}

/// A fully populated problem description with solver defaults.
pub struct ProblemSpec {
    pub name: String,
    /// Default polynomial degree.
    pub degree: usize,
    /// Default elements per direction.
    pub elements: usize,
    /// Default fixed step size.
    pub dt: f64,
    pub t_end: f64,
    /// Velocity scale used to keep `u_ref dt / dx` constant in refinement
    /// studies.
    pub u_ref: f64,
    /// Default interface coupling.
    pub interface: InterfaceMode,
    pub data: ProblemData,
}

/// Optional overrides applied on top of the problem defaults.
#[derive(Debug, Clone, Default)]
pub struct ProblemOverrides {
    pub degree: Option<usize>,
    pub elements: Option<usize>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub interface: Option<InterfaceMode>,
}

impl ProblemSpec {
    pub fn is_euler(&self) -> bool {
        matches!(self.data, ProblemData::Euler { .. })
    }

    pub fn has_exact(&self) -> bool {
        match &self.data {
            ProblemData::Euler { exact, .. } => exact.is_some(),
            ProblemData::Ode { exact, .. } => exact.is_some(),
        }
    }
}

/// Builds one of the named problems, with `overrides` applied and validated.
pub fn make_problem(name: &str, overrides: &ProblemOverrides) -> Result<ProblemSpec> {
    let mut spec = match name {
        "isentropic_vortex" => isentropic_vortex(),
        "sod" => sod(),
        "sine_shock" => sine_shock(),
        "gamma_demo" => gamma_demo(),
        "density_wave" => density_wave(),
        "exp_entropy_ode" => exp_entropy_ode(),
        "quadratic_conserved_ode" => quadratic_conserved_ode(),
        _ => {
            return Err(Error::UnknownProblem {
                name: name.to_string(),
                valid: VALID_NAMES,
            })
        }
    };
    if let Some(p) = overrides.degree {
        spec.degree = p;
    }
    if let Some(n) = overrides.elements {
        spec.elements = n;
    }
    if let Some(dt) = overrides.dt {
        spec.dt = dt;
    }
    if let Some(t_end) = overrides.t_end {
        spec.t_end = t_end;
    }
    if let Some(mode) = overrides.interface {
        spec.interface = mode;
    }
    if !(1..=8).contains(&spec.degree) {
        return Err(Error::InvalidArgument(format!(
            "degree {} out of range 1..=8",
            spec.degree
        )));
    }
    if spec.elements < 1 {
        return Err(Error::InvalidArgument("need at least one element".into()));
    }
    if !(spec.dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt = {} must be positive", spec.dt)));
    }
    // t_end = 0 is allowed: a run then just evaluates the initial data
    if !(spec.t_end >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "t_end = {} must be nonnegative",
            spec.t_end
        )));
    }
    Ok(spec)
}

/// Names accepted by [`make_problem`].
pub fn problem_names() -> [&'static str; 7] {
    [
        "isentropic_vortex",
        "sod",
        "sine_shock",
        "gamma_demo",
        "density_wave",
        "exp_entropy_ode",
        "quadratic_conserved_ode",
    ]
}

/// Exact primitive state of a field problem at `(x, t)`.
pub fn evaluate_exact(spec: &ProblemSpec, x: &[f64; 2], t: f64) -> Result<PrimState> {
    match &spec.data {
        ProblemData::Euler { exact: Some(f), .. } => Ok(f(x, t)),
        _ => Err(Error::InvalidArgument(format!(
            "problem `{}` has no exact solution",
            spec.name
        ))),
    }
}

/// Instantiates the semidiscretization and initial data of a field problem
/// at resolution (`degree`, `elements`).
pub fn build_euler_system(
    spec: &ProblemSpec,
    degree: usize,
    elements: usize,
    interface: InterfaceMode,
) -> Result<(EulerSystem, Vec<f64>)> {
    let ProblemData::Euler {
        dim,
        gas,
        bounds,
        bc,
        init,
        ..
    } = &spec.data
    else {
        return Err(Error::InvalidArgument(format!(
            "problem `{}` is not a field problem",
            spec.name
        )));
    };
    let mesh = match dim {
        1 => Mesh::line(elements, bounds[0], bounds[1], *bc)?,
        _ => Mesh::square(elements, bounds[0], bounds[1], *bc)?,
    };
    let op = lgl_operator(degree)?;
    let mut sys = EulerSystem::new(*gas, mesh, op, interface)?;
    if *bc == BoundaryKind::DirichletExterior {
        // waves never reach the boundary within t_end, so the initial trace
        // doubles as the exterior state
        let f = init.clone();
        sys = sys.with_exterior(move |x, _t| f(x));
    }
    let field = sys.init_field(|x| init(x));
    Ok((sys, field.data))
}

// ---------------------------------------------------------------------------
// Field problems
// ---------------------------------------------------------------------------

/// Parameters of the translating isentropic vortex.
#[derive(Clone, Copy)]
struct Vortex {
    gas: GasModel,
    eps: f64,
    mach: f64,
    alpha: f64,
    u_inf: f64,
    half_width: f64,
}

impl Vortex {
    fn standard() -> Self {
        let gamma = 1.4;
        let mach: f64 = 0.5;
        // gas constant chosen so that the far-field sound speed is 1/M and
        // the free-stream speed U_inf = M c_inf is exactly one
        let r_gas = 1.0 / (gamma * mach * mach);
        Self {
            gas: GasModel::new(gamma, r_gas),
            eps: 5.0,
            mach,
            alpha: PI / 4.0,
            u_inf: 1.0,
            half_width: 5.0,
        }
    }

    fn eval(&self, x: &[f64; 2], t: f64) -> PrimState {
        let gm1 = self.gas.gamma - 1.0;
        let l = 2.0 * self.half_width;
        let mut dx = x[0] - self.u_inf * self.alpha.cos() * t;
        let mut dy = x[1] - self.u_inf * self.alpha.sin() * t;
        // wrap the vortex center periodically
        dx -= l * (dx / l).round();
        dy -= l * (dy / l).round();
        let g = 1.0 - (dx * dx + dy * dy);
        let temp = 1.0 - self.eps * self.eps * self.mach * self.mach * gm1 / (8.0 * PI * PI)
            * g.exp();
        let rho = temp.powf(1.0 / gm1);
        let swirl = self.eps / (2.0 * PI) * (0.5 * g).exp();
        let u = self.u_inf * self.alpha.cos() - swirl * dy;
        let v = self.u_inf * self.alpha.sin() + swirl * dx;
        let p = rho * self.gas.r_gas * temp;
        PrimState::new_2d(rho, u, v, p)
    }
}

fn isentropic_vortex() -> ProblemSpec {
    let vortex = Vortex::standard();
    let init = {
        let v = vortex;
        Arc::new(move |x: &[f64; 2]| v.eval(x, 0.0)) as InitFn
    };
    let exact = {
        let v = vortex;
        Arc::new(move |x: &[f64; 2], t: f64| v.eval(x, t)) as ExactFn
    };
    ProblemSpec {
        name: "isentropic_vortex".into(),
        degree: 2,
        elements: 10,
        dt: 0.05,
        t_end: 5.0,
        u_ref: vortex.u_inf,
        interface: InterfaceMode::EsRusanov,
        data: ProblemData::Euler {
            dim: 2,
            gas: vortex.gas,
            bounds: [-5.0, 5.0],
            bc: BoundaryKind::Periodic,
            init,
            exact: Some(exact),
        },
    }
}

fn sod() -> ProblemSpec {
    let gas = GasModel::air();
    let init = Arc::new(|x: &[f64; 2]| {
        if x[0] < 0.5 {
            PrimState::new_1d(1.0, 0.0, 1.0)
        } else {
            PrimState::new_1d(1.0 / 8.0, 0.0, 1.0 / 10.0)
        }
    }) as InitFn;
    ProblemSpec {
        name: "sod".into(),
        degree: 3,
        elements: 128,
        dt: 5.0e-5,
        t_end: 0.2,
        u_ref: 1.0 + 1.4f64.sqrt(),
        interface: InterfaceMode::EsRusanov,
        data: ProblemData::Euler {
            dim: 1,
            gas,
            bounds: [0.0, 1.0],
            bc: BoundaryKind::DirichletExterior,
            init,
            exact: None,
        },
    }
}

fn sine_shock() -> ProblemSpec {
    let gas = GasModel::air();
    let init = Arc::new(|x: &[f64; 2]| {
        if x[0] < -4.5 {
            PrimState::new_1d(1.515695, 0.523346, 1.805)
        } else {
            PrimState::new_1d(1.0 + 0.1 * (20.0 * PI * x[0]).sin(), 0.0, 1.0)
        }
    }) as InitFn;
    ProblemSpec {
        name: "sine_shock".into(),
        degree: 3,
        elements: 256,
        dt: 2.0e-4,
        t_end: 5.0,
        u_ref: 2.0,
        interface: InterfaceMode::EsRusanov,
        data: ProblemData::Euler {
            dim: 1,
            gas,
            bounds: [-5.0, 5.0],
            bc: BoundaryKind::DirichletExterior,
            init,
            exact: None,
        },
    }
}

fn gamma_demo() -> ProblemSpec {
    let gas = GasModel::air();
    let init = Arc::new(|x: &[f64; 2]| {
        if x[0] < 0.0 {
            PrimState::new_1d(1.0 + 0.5 * (2.0 * PI * x[0]).cos(), 0.5, 1.0)
        } else {
            PrimState::new_1d(0.5 + 0.25 * (2.0 * PI * x[0]).cos(), 0.5, 0.8)
        }
    }) as InitFn;
    ProblemSpec {
        name: "gamma_demo".into(),
        degree: 3,
        elements: 200,
        dt: 1.0e-4,
        t_end: 0.1,
        u_ref: 2.0,
        interface: InterfaceMode::EsRusanov,
        data: ProblemData::Euler {
            dim: 1,
            gas,
            bounds: [-2.0, 2.0],
            bc: BoundaryKind::DirichletExterior,
            init,
            exact: None,
        },
    }
}

fn density_wave() -> ProblemSpec {
    let gas = GasModel::air();
    let u0 = 0.1;
    let wave = move |x: f64, t: f64| {
        PrimState::new_1d(1.0 + 0.5 * (PI * x - t * PI * u0).sin(), u0, 1.0)
    };
    let init = Arc::new(move |x: &[f64; 2]| wave(x[0], 0.0)) as InitFn;
    let exact = Arc::new(move |x: &[f64; 2], t: f64| wave(x[0], t)) as ExactFn;
    // fastest signal: u0 + c at the density minimum rho = 0.5
    let u_ref = u0 + (1.4 / 0.5f64).sqrt();
    ProblemSpec {
        name: "density_wave".into(),
        degree: 3,
        elements: 32,
        dt: 1.0e-3,
        t_end: 1.0,
        u_ref,
        interface: InterfaceMode::EsRusanov,
        data: ProblemData::Euler {
            dim: 1,
            gas,
            bounds: [0.0, 2.0],
            bc: BoundaryKind::Periodic,
            init,
            exact: Some(exact),
        },
    }
}

// ---------------------------------------------------------------------------
// Toy ODE systems
// ---------------------------------------------------------------------------

/// Scalar `u' = -exp(u)` with entropy `eta = exp(u)`; the exact solution is
/// `u(t) = -ln(exp(-u0) + t)`.
pub struct ExpEntropyOde;

impl OdeSystem for ExpEntropyOde {
    fn dim(&self) -> usize {
        1
    }

    fn n_partitions(&self) -> usize {
        1
    }

    fn rhs(&self, _t: f64, u: &[f64], du: &mut [f64]) -> Result<()> {
        du[0] = -u[0].exp();
        Ok(())
    }

    fn entropy(&self, u: &[f64], eta: &mut [f64]) -> Result<()> {
        eta[0] = u[0].exp();
        Ok(())
    }

    fn entropy_rate(&self, _t: f64, u: &[f64], du: &[f64], rate: &mut [f64]) -> Result<()> {
        rate[0] = u[0].exp() * du[0];
        Ok(())
    }
}

/// Planar rotation `u' = (-u2, u1)` with the conserved quadratic entropy
/// `eta = |u|^2 / 2`; the stagewise estimate is exact because
/// `<y, f(y)> = 0` holds identically.
pub struct RotationOde;

impl OdeSystem for RotationOde {
    fn dim(&self) -> usize {
        2
    }

    fn n_partitions(&self) -> usize {
        1
    }

    fn rhs(&self, _t: f64, u: &[f64], du: &mut [f64]) -> Result<()> {
        du[0] = -u[1];
        du[1] = u[0];
        Ok(())
    }

    fn entropy(&self, u: &[f64], eta: &mut [f64]) -> Result<()> {
        eta[0] = 0.5 * (u[0] * u[0] + u[1] * u[1]);
        Ok(())
    }

    fn entropy_rate(&self, _t: f64, u: &[f64], du: &[f64], rate: &mut [f64]) -> Result<()> {
        rate[0] = u[0] * du[0] + u[1] * du[1];
        Ok(())
    }
}

fn exp_entropy_ode() -> ProblemSpec {
    let u0 = 0.5;
    ProblemSpec {
        name: "exp_entropy_ode".into(),
        degree: 1,
        elements: 1,
        dt: 0.01,
        t_end: 1.0,
        u_ref: 1.0,
        interface: InterfaceMode::Ec,
        data: ProblemData::Ode {
            system: Arc::new(ExpEntropyOde),
            u0: vec![u0],
            exact: Some(Arc::new(move |t: f64| vec![-(((-u0).exp() + t).ln())])),
        },
    }
}

fn quadratic_conserved_ode() -> ProblemSpec {
    ProblemSpec {
        name: "quadratic_conserved_ode".into(),
        degree: 1,
        elements: 1,
        dt: 0.01,
        t_end: 1.0,
        u_ref: 1.0,
        interface: InterfaceMode::Ec,
        data: ProblemData::Ode {
            system: Arc::new(RotationOde),
            u0: vec![1.0, 0.0],
            exact: Some(Arc::new(|t: f64| vec![t.cos(), t.sin()])),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_problem_lists_names() {
        let err = match make_problem("vortex", &ProblemOverrides::default()) {
            Err(e) => e,
            Ok(_) => panic!("expected lookup error"),
        };
        assert!(err.to_string().contains("isentropic_vortex"));
    }

    #[test]
    fn shock_tube_reference_states_pinned() {
        let sod = make_problem("sod", &ProblemOverrides::default()).unwrap();
        let ProblemData::Euler { init, .. } = &sod.data else {
            panic!()
        };
        let left = init(&[0.25, 0.0]);
        let right = init(&[0.75, 0.0]);
        assert_eq!((left.rho, left.p), (1.0, 1.0));
        assert_eq!((right.rho, right.p), (0.125, 0.1));

        let ss = make_problem("sine_shock", &ProblemOverrides::default()).unwrap();
        let ProblemData::Euler { init, .. } = &ss.data else {
            panic!()
        };
        let l = init(&[-4.75, 0.0]);
        assert_eq!((l.rho, l.vel[0], l.p), (1.515695, 0.523346, 1.805));
    }

    #[test]
    fn vortex_center_values() {
        // direct evaluation of the vortex formulas at the origin, written out
        // independently of the library implementation
        let spec = make_problem("isentropic_vortex", &ProblemOverrides::default()).unwrap();
        let prim = evaluate_exact(&spec, &[0.0, 0.0], 0.0).unwrap();
        let g: f64 = 1.0;
        let temp = 1.0 - 6.25 * (0.4 / (8.0 * PI * PI)) * g.exp();
        let rho = temp.powf(2.5);
        assert!((prim.rho - rho).abs() < 1e-14, "{} vs {rho}", prim.rho);
        assert!((temp - 0.9139313961459599).abs() < 1e-12);
        assert!((rho - 0.7985166793709778).abs() < 1e-12);
    }

    #[test]
    fn vortex_far_field() {
        let spec = make_problem("isentropic_vortex", &ProblemOverrides::default()).unwrap();
        // corner of the periodic box, maximal distance from the center
        let prim = evaluate_exact(&spec, &[5.0, 5.0], 0.0).unwrap();
        let u_inf_comp = (PI / 4.0).cos(); // U_inf = 1
        let decay = (0.5f64 * (1.0 - 50.0)).exp() * 5.0 / (2.0 * PI) * 50.0f64.sqrt();
        assert!((prim.vel[0] - u_inf_comp).abs() <= decay + 1e-12);
        assert!((prim.vel[1] - u_inf_comp).abs() <= decay + 1e-12);
        assert!((prim.rho - 1.0).abs() < 1e-8);
    }

    #[test]
    fn exact_matches_initial_condition() {
        for name in ["isentropic_vortex", "density_wave"] {
            let spec = make_problem(name, &ProblemOverrides::default()).unwrap();
            let ProblemData::Euler { init, dim, .. } = &spec.data else {
                panic!()
            };
            let points: &[[f64; 2]] = if *dim == 2 {
                &[[0.0, 0.0], [1.3, -2.7], [4.9, 4.9], [-3.3, 0.4]]
            } else {
                &[[0.1, 0.0], [0.77, 0.0], [1.5, 0.0], [1.99, 0.0]]
            };
            for x in points {
                let a = init(x);
                let b = evaluate_exact(&spec, x, 0.0).unwrap();
                assert!((a.rho - b.rho).abs() < 1e-14, "{name}");
                assert!((a.vel[0] - b.vel[0]).abs() < 1e-14, "{name}");
                assert!((a.p - b.p).abs() < 1e-14, "{name}");
            }
        }
    }

    #[test]
    fn density_wave_is_pure_advection() {
        let spec = make_problem("density_wave", &ProblemOverrides::default()).unwrap();
        for (x, t) in [(0.3, 0.7), (1.2, 2.0), (1.9, 0.05)] {
            let moved = evaluate_exact(&spec, &[x, 0.0], t).unwrap();
            let shifted = evaluate_exact(&spec, &[x - 0.1 * t, 0.0], 0.0).unwrap();
            assert!((moved.rho - shifted.rho).abs() < 1e-14);
            assert_eq!(moved.vel[0], 0.1);
            assert_eq!(moved.p, 1.0);
        }
    }

    #[test]
    fn exp_ode_exact_solution() {
        let spec = make_problem("exp_entropy_ode", &ProblemOverrides::default()).unwrap();
        let ProblemData::Ode { system, u0, exact } = &spec.data else {
            panic!()
        };
        let exact = exact.as_ref().unwrap();
        assert!((exact(0.0)[0] - u0[0]).abs() < 1e-15);
        // d/dt of the exact solution equals the rhs along the solution
        for t in [0.0, 0.4, 1.7] {
            let u = exact(t);
            let mut du = vec![0.0];
            system.rhs(t, &u, &mut du).unwrap();
            let h = 1e-6;
            let fd = (exact(t + h)[0] - exact(t - h)[0]) / (2.0 * h);
            assert!((du[0] - fd).abs() < 1e-8);
        }
        // entropy along the exact solution is 1/(exp(-u0) + t): decreasing
        let mut eta = vec![0.0];
        system.entropy(&exact(0.0), &mut eta).unwrap();
        let e0 = eta[0];
        system.entropy(&exact(1.0), &mut eta).unwrap();
        assert!(eta[0] < e0);
    }

    #[test]
    fn gamma_demo_initial_profile() {
        let spec = make_problem("gamma_demo", &ProblemOverrides::default()).unwrap();
        let ProblemData::Euler { init, .. } = &spec.data else {
            panic!()
        };
        let left = init(&[-1.0, 0.0]);
        assert!((left.rho - 1.5).abs() < 1e-15);
        assert_eq!((left.vel[0], left.p), (0.5, 1.0));
        let right = init(&[1.0, 0.0]);
        assert!((right.rho - 0.75).abs() < 1e-15);
        assert_eq!((right.vel[0], right.p), (0.5, 0.8));
    }

    #[test]
    fn overrides_are_validated() {
        let bad = ProblemOverrides {
            degree: Some(12),
            ..Default::default()
        };
        assert!(make_problem("sod", &bad).is_err());
        let bad = ProblemOverrides {
            dt: Some(-1.0),
            ..Default::default()
        };
        assert!(make_problem("sod", &bad).is_err());
    }
}
