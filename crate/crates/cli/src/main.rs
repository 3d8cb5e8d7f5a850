use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vortex_cli::run::{execute, load_config, Command};

/// Particle and spectral simulations of the 2D vorticity equation.
#[derive(Parser, Debug)]
#[command(name = "vortex", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Flat `key = value` config; defaults apply to missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for snapshots, tables and report.meta.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seeds overriding the config, e.g. `--seeds 0,1,2`.
    #[arg(long, global = true, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Accept β above its admissible limit, for contrast runs.
    #[arg(long, global = true)]
    allow_inadmissible: bool,
    /// Worker threads.
    #[arg(long, global = true, env = "VORTEX_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Particle trajectories: field snapshots, norms and final ensembles.
    Simulate,
    /// Reference PDE solution at the snapshot times.
    Pde {
        /// Also run the grid refinement check.
        #[arg(long)]
        refine: bool,
    },
    /// Particle-vs-PDE errors over N_list and seeds.
    Sweep,
    /// Seed-averaged weighted negative-Sobolev moment against time, per N.
    ProbeMoments,
    /// Double time integral of Bessel-norm increments, per N.
    ProbeHolder,
    /// Second moment of the martingale term tested against a bump, per N.
    ProbeMartingale,
    /// Deterministic size of the stochastic term against its predicted rate.
    ProbeScaling,
    /// Worst box particle count against the concentration bound.
    ProbeConcentration,
    /// Check the config and print it fully resolved.
    Validate,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Simulate => Command::Simulate,
            Cmd::Pde { refine } => Command::Pde { refine },
            Cmd::Sweep => Command::Sweep,
            Cmd::ProbeMoments => Command::ProbeMoments,
            Cmd::ProbeHolder => Command::ProbeHolder,
            Cmd::ProbeMartingale => Command::ProbeMartingale,
            Cmd::ProbeScaling => Command::ProbeScaling,
            Cmd::ProbeConcentration => Command::ProbeConcentration,
            Cmd::Validate => Command::Validate,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match load_config(cli.config.as_deref(), cli.seeds.as_deref(), cli.allow_inadmissible) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("cannot start {k} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let command = Command::from(cli.command);
    if command == Command::Validate {
        let text = format!(
            "{}# beta limit = {:?}\n# config sha256 = {}\n",
            config.render(),
            vortex_core::config::beta_limit(config.alpha, config.p),
            config.hash()
        );
        // a closed pipe (e.g. `| head`) is not an error worth reporting
        let _ = std::io::stdout().lock().write_all(text.as_bytes());
        return ExitCode::SUCCESS;
    }
    match execute(command, &config, &cli.out) {
        Ok(assertions) => {
            let mut stdout = std::io::stdout().lock();
            for a in &assertions {
                let _ = writeln!(stdout, "{} {}: {}", if a.passed { "ok" } else { "FAILED" }, a.name, a.detail);
            }
            match assertions.iter().find(|a| !a.passed) {
                Some(a) => {
                    eprintln!("assertion failed: {}: {}", a.name, a.detail);
                    ExitCode::from(1)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
