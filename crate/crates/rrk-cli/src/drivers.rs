//! Experiment drivers behind the CLI subcommands.

use crate::config::{CliError, CliResult, ResolvedRun};
use crate::csvio::{CsvTable, CsvValue};
use crate::norms::{convergence_rate, error_norms_all, Norms};
use rrk::euler::{prim_from_cons, EulerSystem};
use rrk::integrator::{advance, StepMode, StepRecord, TrajectorySummary};
use rrk::ode::OdeSystem;
use rrk::problems::{build_euler_system, ProblemData};
use rrk::relaxation::{solve_gamma_summed, RelaxationMode};
use std::path::Path;

/// The system and initial state a run operates on.
enum Instance {
    Euler(Box<EulerSystem>, Vec<f64>),
    Ode(std::sync::Arc<dyn OdeSystem + Send + Sync>, Vec<f64>),
}

impl Instance {
    fn system(&self) -> &dyn OdeSystem {
        match self {
            Instance::Euler(sys, _) => sys.as_ref(),
            Instance::Ode(sys, _) => sys.as_ref(),
        }
    }

    fn initial(&self) -> &[f64] {
        match self {
            Instance::Euler(_, u0) => u0,
            Instance::Ode(_, u0) => u0,
        }
    }

    fn euler(&self) -> Option<&EulerSystem> {
        match self {
            Instance::Euler(sys, _) => Some(sys),
            Instance::Ode(..) => None,
        }
    }
}

fn instantiate(run: &ResolvedRun, elements: usize) -> CliResult<Instance> {
    match &run.spec.data {
        ProblemData::Euler { .. } => {
            let (mut sys, u0) =
                build_euler_system(&run.spec, run.degree, elements, run.interface)?;
            sys.parallel = run.threads > 1;
            Ok(Instance::Euler(Box::new(sys), u0))
        }
        ProblemData::Ode { system, u0, .. } => Ok(Instance::Ode(system.clone(), u0.clone())),
    }
}

fn step_mode(run: &ResolvedRun) -> (f64, StepMode) {
    match (run.dt, run.adaptive_tol) {
        (Some(dt), _) => (dt, StepMode::Fixed),
        (None, Some(tol)) => (run.spec.dt, StepMode::Adaptive { tol }),
        (None, None) => unreachable!("resolve() guarantees one of the two"),
    }
}

fn history_header(instance: &Instance) -> Vec<String> {
    let mut h: Vec<String> = ["t", "dt", "gamma", "gamma_local_min", "argmin_kappa", "eta_total"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    if let Some(sys) = instance.euler() {
        h.push("mass".into());
        h.push("momentum_x".into());
        if sys.mesh.dim == 2 {
            h.push("momentum_y".into());
        }
        h.push("energy".into());
    }
    h
}

fn history_row(rec: &StepRecord) -> Vec<CsvValue> {
    let (argmin, gmin) = rec
        .gamma_local
        .iter()
        .enumerate()
        .fold((0usize, f64::INFINITY), |(ai, m), (i, &g)| {
            if g < m {
                (i, g)
            } else {
                (ai, m)
            }
        });
    let mut row = vec![
        CsvValue::Float(rec.t),
        CsvValue::Float(rec.dt),
        CsvValue::Float(rec.gamma),
        CsvValue::Float(gmin),
        CsvValue::Int(argmin as i64),
        CsvValue::Float(rec.eta.iter().sum()),
    ];
    row.extend(rec.invariants.iter().map(|&v| CsvValue::Float(v)));
    row
}

fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn solution_table(instance: &Instance, u: &[f64]) -> CliResult<CsvTable> {
    match instance {
        Instance::Euler(sys, _) => {
            let nc = sys.n_cons();
            let two_d = sys.mesh.dim == 2;
            let header: Vec<&str> = if two_d {
                vec!["x", "y", "rho", "u", "v", "p"]
            } else {
                vec!["x", "rho", "u", "p"]
            };
            let mut table = CsvTable::new(&header);
            for elem in 0..sys.mesh.n_elements() {
                for node in 0..sys.nodes_per_element() {
                    let q = &u[(elem * sys.nodes_per_element() + node) * nc..][..nc];
                    let prim = prim_from_cons(q, &sys.gas, elem, node)?;
                    let pos = sys.node_position(elem, node);
                    let mut row = vec![CsvValue::Float(pos[0])];
                    if two_d {
                        row.push(CsvValue::Float(pos[1]));
                    }
                    row.push(CsvValue::Float(prim.rho));
                    row.push(CsvValue::Float(prim.vel[0]));
                    if two_d {
                        row.push(CsvValue::Float(prim.vel[1]));
                    }
                    row.push(CsvValue::Float(prim.p));
                    table.push(row);
                }
            }
            Ok(table)
        }
        Instance::Ode(..) => {
            let header: Vec<String> = (0..u.len()).map(|i| format!("u{i}")).collect();
            let mut table = CsvTable::new(&header.iter().map(|s| s.as_str()).collect::<Vec<_>>());
            table.push(u.iter().map(|&v| CsvValue::Float(v)).collect());
            Ok(table)
        }
    }
}

fn elements_table(sys: &EulerSystem, gamma_local: &[f64], gamma: f64, eta: &[f64]) -> CsvTable {
    let two_d = sys.mesh.dim == 2;
    let header: Vec<&str> = if two_d {
        vec!["kappa", "x", "y", "gamma_kappa", "eta_kappa"]
    } else {
        vec!["kappa", "x", "gamma_kappa", "eta_kappa"]
    };
    let mut table = CsvTable::new(&header);
    let n = sys.mesh.n_elements();
    for kappa in 0..n {
        // global relaxation reports a single scalar; broadcast it
        let g = if gamma_local.len() == n {
            gamma_local[kappa]
        } else {
            gamma
        };
        let c = sys.element_center(kappa);
        let mut row = vec![CsvValue::Int(kappa as i64), CsvValue::Float(c[0])];
        if two_d {
            row.push(CsvValue::Float(c[1]));
        }
        row.push(CsvValue::Float(g));
        row.push(CsvValue::Float(eta[kappa]));
        table.push(row);
    }
    table
}

/// Outcome of [`cmd_run`]: trajectory counters plus the emitted tables.
pub struct RunArtifacts {
    pub summary: TrajectorySummary,
    pub history: CsvTable,
    pub solution: CsvTable,
    pub elements: Option<CsvTable>,
}

/// Single simulation: writes `solution.csv`, `history.csv`, and (for field
/// problems) `elements.csv` into the output directory.
pub fn cmd_run(run: &ResolvedRun) -> CliResult<RunArtifacts> {
    let instance = instantiate(run, run.elements)?;
    let (dt0, mode) = step_mode(run);
    let mut history = CsvTable {
        header: history_header(&instance),
        rows: Vec::new(),
    };
    let mut last_gamma_local: Vec<f64> = Vec::new();
    let mut last_eta: Vec<f64> = Vec::new();
    let mut last_gamma = 1.0;
    let summary = advance(
        instance.system(),
        &run.tableau,
        &run.relax,
        instance.initial(),
        0.0,
        run.t_end,
        dt0,
        mode,
        run.max_steps,
        |rec| {
            history.rows.push(history_row(rec));
            last_gamma_local = rec.gamma_local.to_vec();
            last_eta = rec.eta.to_vec();
            last_gamma = rec.gamma;
        },
    )?;

    let solution = solution_table(&instance, &summary.u_final)?;
    let elements = instance
        .euler()
        .map(|sys| elements_table(sys, &last_gamma_local, last_gamma, &last_eta));

    write_file(&run.output_dir, "solution.csv", &solution.emit())?;
    write_file(&run.output_dir, "history.csv", &history.emit())?;
    if let Some(e) = &elements {
        write_file(&run.output_dir, "elements.csv", &e.emit())?;
    }
    Ok(RunArtifacts {
        summary,
        history,
        solution,
        elements,
    })
}

/// One row of a convergence study.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub elements: usize,
    /// Norms per tracked variable (density first).
    pub norms: Vec<Norms>,
    /// Rates against the previous row, when one exists.
    pub rates: Option<Vec<Norms>>,
}

/// Mesh refinement study at constant `u_ref dt / dx`; writes
/// `convergence.csv` and prints the density table.
pub fn cmd_convergence(run: &ResolvedRun) -> CliResult<Vec<ConvergenceRow>> {
    let Some(sizes) = run.config.elements_list.clone() else {
        return Err(CliError::Config(
            "convergence needs `elements_list` (at least two mesh sizes)".into(),
        ));
    };
    if sizes.len() < 2 {
        return Err(CliError::Config("need at least two mesh sizes".into()));
    }
    if !run.spec.has_exact() {
        return Err(CliError::Config(format!(
            "problem `{}` has no exact solution",
            run.spec.name
        )));
    }
    let ProblemData::Euler { bounds, .. } = &run.spec.data else {
        return Err(CliError::Config(
            "convergence studies need a field problem".into(),
        ));
    };
    let width = bounds[1] - bounds[0];
    let dt_base = run.dt.unwrap_or(run.spec.dt);
    // the refinement keeps u_ref dt / dx fixed at this ratio
    let ratio = run
        .config
        .cfl
        .unwrap_or(run.spec.u_ref * dt_base * run.elements as f64 / width);

    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &n in &sizes {
        let instance = instantiate(run, n)?;
        let dx = width / n as f64;
        let dt = ratio * dx / run.spec.u_ref;
        let summary = advance(
            instance.system(),
            &run.tableau,
            &run.relax,
            instance.initial(),
            0.0,
            run.t_end,
            dt,
            StepMode::Fixed,
            run.max_steps,
            |_| {},
        )?;
        let sys = instance.euler().expect("field problem checked above");
        let all = error_norms_all(sys, &run.spec, &summary.u_final, summary.t_final)?;
        let tracked: Vec<Norms> = if run.config.all_variables {
            all
        } else {
            vec![all[0]]
        };
        let rates = rows.last().map(|prev| {
            prev.norms
                .iter()
                .zip(&tracked)
                .map(|(p, c)| Norms {
                    l1: convergence_rate(p.l1, c.l1, prev.elements, n),
                    l2: convergence_rate(p.l2, c.l2, prev.elements, n),
                    linf: convergence_rate(p.linf, c.linf, prev.elements, n),
                })
                .collect()
        });
        rows.push(ConvergenceRow {
            elements: n,
            norms: tracked,
            rates,
        });
    }

    let var_names = variable_names(run, rows[0].norms.len());
    let mut header = vec!["n".to_string()];
    for v in &var_names {
        for stat in ["l1", "l1_rate", "l2", "l2_rate", "linf", "linf_rate"] {
            header.push(format!("{v}_{stat}"));
        }
    }
    let mut table = CsvTable {
        header,
        rows: Vec::new(),
    };
    // undefined rates (first row, or zero/degenerate errors) are left blank
    let rate_cell = |r: Option<f64>| match r {
        Some(v) if v.is_finite() => CsvValue::Float(v),
        _ => CsvValue::Blank,
    };
    for row in &rows {
        let mut cells = vec![CsvValue::Int(row.elements as i64)];
        for (i, n) in row.norms.iter().enumerate() {
            let r = row.rates.as_ref().map(|r| r[i]);
            cells.push(CsvValue::Float(n.l1));
            cells.push(rate_cell(r.map(|r| r.l1)));
            cells.push(CsvValue::Float(n.l2));
            cells.push(rate_cell(r.map(|r| r.l2)));
            cells.push(CsvValue::Float(n.linf));
            cells.push(rate_cell(r.map(|r| r.linf)));
        }
        table.push(cells);
    }
    write_file(&run.output_dir, "convergence.csv", &table.emit())?;

    println!("# {} | density error", run.spec.name);
    println!(
        "{:>6} {:>13} {:>7} {:>13} {:>7} {:>13} {:>7}",
        "N", "L1", "rate", "L2", "rate", "Linf", "rate"
    );
    for row in &rows {
        let d = row.norms[0];
        let fmt_rate = |r: Option<f64>| r.map(|v| format!("{v:7.2}")).unwrap_or("    ---".into());
        println!(
            "{:>6} {:>13.4e} {} {:>13.4e} {} {:>13.4e} {}",
            row.elements,
            d.l1,
            fmt_rate(row.rates.as_ref().map(|r| r[0].l1)),
            d.l2,
            fmt_rate(row.rates.as_ref().map(|r| r[0].l2)),
            d.linf,
            fmt_rate(row.rates.as_ref().map(|r| r[0].linf)),
        );
    }
    Ok(rows)
}

fn variable_names(run: &ResolvedRun, tracked: usize) -> Vec<String> {
    if tracked == 1 {
        return vec!["rho".into()];
    }
    let ProblemData::Euler { dim, .. } = &run.spec.data else {
        return vec!["rho".into()];
    };
    if *dim == 2 {
        vec![
            "rho".into(),
            "momentum_x".into(),
            "momentum_y".into(),
            "energy".into(),
        ]
    } else {
        vec!["rho".into(), "momentum_x".into(), "energy".into()]
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

/// Per-step relaxation diagnostics: `gamma_history.csv` with the applied and
/// global-equivalent parameters plus quantiles of the per-element roots; in
/// local mode also the final-time spatial profile `gamma_profile.csv`.
pub fn cmd_gamma_history(run: &ResolvedRun) -> CliResult<CsvTable> {
    if run.relax.mode == RelaxationMode::None {
        return Err(CliError::Config(
            "gamma-history needs relaxation mode `global` or `local`".into(),
        ));
    }
    let instance = instantiate(run, run.elements)?;
    let (dt0, mode) = step_mode(run);
    let mut table = CsvTable::new(&[
        "t",
        "gamma_global",
        "gamma_local_min",
        "q0",
        "q25",
        "q50",
        "q75",
        "q100",
    ]);
    let mut last_gamma_local: Vec<f64> = Vec::new();
    let mut solve_error: Option<rrk::Error> = None;
    let sys = instance.system();
    advance(
        sys,
        &run.tableau,
        &run.relax,
        instance.initial(),
        0.0,
        run.t_end,
        dt0,
        mode,
        run.max_steps,
        |rec| {
            let gamma_global = if run.relax.mode == RelaxationMode::Global {
                rec.gamma
            } else {
                // one extra scalar solve on the summed entropy, reported but
                // not applied
                let d: Vec<f64> = rec
                    .rk
                    .u_new
                    .iter()
                    .zip(rec.u_old)
                    .map(|(a, b)| a - b)
                    .collect();
                let eta_old: f64 = rec.rk.eta_old.iter().sum();
                let e_sum: f64 = rec.rk.e.iter().sum();
                match solve_gamma_summed(sys, rec.u_old, &d, eta_old, e_sum, &run.relax) {
                    Ok((g, _, _)) => g,
                    Err(e) => {
                        if solve_error.is_none() {
                            solve_error = Some(e);
                        }
                        f64::NAN
                    }
                }
            };
            let mut sorted = rec.gamma_local.to_vec();
            sorted.sort_by(f64::total_cmp);
            table.push(vec![
                CsvValue::Float(rec.t),
                CsvValue::Float(gamma_global),
                CsvValue::Float(rec.gamma),
                CsvValue::Float(quantile(&sorted, 0.0)),
                CsvValue::Float(quantile(&sorted, 0.25)),
                CsvValue::Float(quantile(&sorted, 0.5)),
                CsvValue::Float(quantile(&sorted, 0.75)),
                CsvValue::Float(quantile(&sorted, 1.0)),
            ]);
            last_gamma_local = rec.gamma_local.to_vec();
        },
    )?;
    if let Some(e) = solve_error {
        return Err(CliError::Numerical(e));
    }
    write_file(&run.output_dir, "gamma_history.csv", &table.emit())?;

    if run.relax.mode == RelaxationMode::Local {
        if let Some(sys) = instance.euler() {
            let two_d = sys.mesh.dim == 2;
            let header: Vec<&str> = if two_d {
                vec!["kappa", "x", "y", "gamma_kappa"]
            } else {
                vec!["kappa", "x", "gamma_kappa"]
            };
            let mut profile = CsvTable::new(&header);
            for (kappa, &g) in last_gamma_local.iter().enumerate() {
                let c = sys.element_center(kappa);
                let mut row = vec![CsvValue::Int(kappa as i64), CsvValue::Float(c[0])];
                if two_d {
                    row.push(CsvValue::Float(c[1]));
                }
                row.push(CsvValue::Float(g));
                profile.push(row);
            }
            write_file(&run.output_dir, "gamma_profile.csv", &profile.emit())?;
        }
    }
    Ok(table)
}
