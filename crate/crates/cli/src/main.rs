use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spinbell::analysis::Normalization;
use spinbell::commands::{self, FitOptions, Outcome, RunOptions};

#[derive(Parser)]
#[command(
    name = "spinbell",
    version,
    about = "Multipartite Bell tests on clustering spin-lattice states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the artifact here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the config's `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Also write the state as little-endian complex doubles with a JSON sidecar.
    #[arg(long, global = true)]
    dump_state: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize the lattice and Hamiltonian.
    Build,
    /// Defect sweep over the schedule, as CSV.
    Sweep,
    /// Certification report; exit 1 on a violation.
    Certify,
    /// Fit a sweep CSV.
    Fit {
        csv: PathBuf,
        #[arg(long, value_enum)]
        normalization: Option<Norm>,
    },
    /// Biseparable bound of the configured inequality by enumeration.
    Bound,
    /// One see-saw optimization at the configured regions.
    Bell,
}

#[derive(Clone, Copy, ValueEnum)]
enum Norm {
    PerMaxregion,
    Raw,
}

fn run(cli: Cli) -> spinbell::Result<Outcome> {
    let g = &cli.global;
    let opts = RunOptions {
        out: g.out.clone(),
        seed: g.seed,
        dump_state: g.dump_state,
    };
    let config = || {
        g.config
            .clone()
            .ok_or_else(|| spinbell::Error::Config("this subcommand needs --config <path>".into()))
    };
    match &cli.command {
        Command::Build => commands::cmd_build(&config()?, &opts),
        Command::Sweep => commands::cmd_sweep(&config()?, &opts),
        Command::Certify => commands::cmd_certify(&config()?, &opts),
        Command::Fit { csv, normalization } => {
            let fopts = FitOptions {
                normalization: normalization.map(|n| match n {
                    Norm::PerMaxregion => Normalization::PerMaxregion,
                    Norm::Raw => Normalization::Raw,
                }),
            };
            commands::cmd_fit(csv, &fopts, &opts)
        }
        Command::Bound => commands::cmd_bound(&config()?, &opts),
        Command::Bell => commands::cmd_bell(&config()?, &opts),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.global.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(3);
        }
    };
    match pool.install(|| run(cli)) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout
                .write_all(out.stdout.as_bytes())
                .and_then(|_| stdout.flush())
                .is_err()
            {
                return ExitCode::from(2);
            }
            ExitCode::from(out.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
