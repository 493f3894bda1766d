use std::path::PathBuf;
use std::process::ExitCode;

use chern_yamabe_cli::{run, Command, Invocation};
use clap::{Args, Parser, Subcommand};

/// Chern scalar curvature, Gauduchon degree and constant Chern scalar curvature solvers.
#[derive(Parser)]
#[command(name = "chern-yamabe", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Sub {
    /// Chern scalar curvature and torsion diagnostics of a model metric.
    Curvature(Common),
    /// Gauduchon representative and degree of a conformal class.
    Degree(Common),
    /// Solve for constant Chern scalar curvature in the conformal class.
    Solve(Common),
    /// Run the parabolic flow towards constant Chern scalar curvature.
    Flow(Common),
    /// Kernel dimensions and bifurcation instants on the product of three spheres.
    Bifurcate {
        #[command(flatten)]
        common: Common,
        /// Exact rational (e.g. 1/4) or decimal.
        #[arg(long)]
        lambda: Option<String>,
        /// Open interval of λ to scan.
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        interval: Option<Vec<String>>,
        /// Truncation of each factor's spectrum.
        #[arg(long)]
        jmax: Option<u32>,
    },
    /// Run the built-in analytic checks.
    Verify(Common),
    /// Print the configuration schema.
    Schema,
}

fn invocation(command: Command, c: Common) -> Invocation {
    Invocation {
        command: Some(command),
        config_path: c.config,
        out: c.out,
        seed: c.seed,
        ..Default::default()
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let inv = match cli.command {
        Sub::Curvature(c) => invocation(Command::Curvature, c),
        Sub::Degree(c) => invocation(Command::Degree, c),
        Sub::Solve(c) => invocation(Command::Solve, c),
        Sub::Flow(c) => invocation(Command::Flow, c),
        Sub::Verify(c) => invocation(Command::Verify, c),
        Sub::Bifurcate {
            common,
            lambda,
            interval,
            jmax,
        } => Invocation {
            lambda,
            interval: interval.map(|v| (v[0].clone(), v[1].clone())),
            j_max: jmax,
            ..invocation(Command::Bifurcate, common)
        },
        Sub::Schema => {
            print!("{}", chern_yamabe_cli::CONFIG_SCHEMA);
            return ExitCode::SUCCESS;
        }
    };
    match run(&inv) {
        Ok(outcome) => {
            println!("{}", outcome.report_path.display());
            for w in &outcome.report.warnings {
                eprintln!("warning: {w}");
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("{}", serde_json::to_string_pretty(&e.to_json()).expect("error serializes"));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
