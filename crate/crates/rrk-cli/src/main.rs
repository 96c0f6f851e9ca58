use clap::{Args, Parser, Subcommand};
use rrk_cli::{config, drivers};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "rrk",
    about = "Entropy-controlled relaxation Runge-Kutta solver for the compressible Euler equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write solution/history/element CSV files.
    Run(CommonArgs),
    /// Mesh refinement study at constant u_ref dt / dx.
    Convergence(CommonArgs),
    /// Per-step relaxation parameter diagnostics.
    GammaHistory(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON config file; omit to start from an empty document.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dotted-key override, e.g. --set relaxation.mode=global (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn dispatch(command: &Command) -> config::CliResult<()> {
    let args = match command {
        Command::Run(a) | Command::Convergence(a) | Command::GammaHistory(a) => a,
    };
    let cfg = config::load_config(args.config.as_deref(), &args.set)?;
    let run = config::resolve(&cfg)?;
    if run.threads > 1 {
        // ignore the error when a pool already exists (tests, embedding)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(run.threads)
            .build_global();
    }
    match command {
        Command::Run(_) => {
            let artifacts = drivers::cmd_run(&run)?;
            println!(
                "{}: {} steps ({} rejected), {} rhs evaluations, t = {:.6}, wrote {}",
                run.spec.name,
                artifacts.summary.steps_accepted,
                artifacts.summary.steps_rejected,
                artifacts.summary.rhs_evals,
                artifacts.summary.t_final,
                run.output_dir.display()
            );
        }
        Command::Convergence(_) => {
            drivers::cmd_convergence(&run)?;
        }
        Command::GammaHistory(_) => {
            let table = drivers::cmd_gamma_history(&run)?;
            println!(
                "{}: {} steps, wrote {}",
                run.spec.name,
                table.rows.len(),
                run.output_dir.display()
            );
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(&cli.command) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
