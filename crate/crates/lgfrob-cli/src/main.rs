use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

mod commands;
mod format;

/// Frobenius type structures and Frobenius manifolds of Laurent polynomials.
#[derive(Parser, Debug)]
#[command(name = "lgfrob", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Newton polyhedron, convenience, nondegeneracy, Milnor number, subdiagram monomials.
    Analyze(Config),
    /// Monomial basis of the Jacobi algebra and the spectrum.
    Spectrum(Config),
    /// Canonical Frobenius type structure on a subdiagram deformation.
    Structure(Config),
    /// Universal deformation of the canonical structure, truncated at `--order`.
    Deform(Config),
    /// Frobenius manifold germ: flat coordinates, metric, Euler field, potential.
    Potential(Config),
    /// Runs every relation and oracle check; exits 4 on any failure.
    Verify(Config),
}

#[derive(Args, Debug, Clone)]
pub struct Config {
    /// Laurent polynomial in u1..un, e.g. "u1 + u2 + u1^-1*u2^-1".
    #[arg(required_unless_present = "structure")]
    pub poly: Option<String>,
    /// Number of variables.
    #[arg(short = 'n', default_value_t = 1)]
    pub n: usize,
    /// "good-max" or a comma separated list of subdiagram polynomials.
    #[arg(long, default_value = "good-max")]
    pub deform: String,
    /// Read a structure document (as written by `structure --json`) instead of building one.
    #[arg(long, value_name = "FILE")]
    pub structure: Option<std::path::PathBuf>,
    /// Truncation order of the universal deformation and of the potential.
    #[arg(long, default_value_t = lgfrob::hm::DEFAULT_ORDER)]
    pub order: usize,
    /// Emit JSON instead of text.
    #[arg(long)]
    pub json: bool,
    /// Seed of the randomized nondegeneracy test (n >= 3).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Trials of the randomized nondegeneracy test.
    #[arg(long, default_value_t = 32)]
    pub trials: u32,
    /// Step budget of a single reduction in the Jacobi algebra.
    #[arg(long, default_value_t = lgfrob::jacobi::DEFAULT_BUDGET)]
    pub budget: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cfg, run): (&Config, fn(&Config) -> lgfrob::Result<commands::Report>) = match &cli.command
    {
        Command::Analyze(c) => (c, commands::analyze),
        Command::Spectrum(c) => (c, commands::spectrum),
        Command::Structure(c) => (c, commands::structure),
        Command::Deform(c) => (c, commands::deform),
        Command::Potential(c) => (c, commands::potential),
        Command::Verify(c) => (c, commands::verify),
    };
    match run(cfg) {
        Ok(report) => {
            if cfg.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report.json).expect("serializable")
                );
            } else {
                print!("{}", report.text);
            }
            if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(4)
            }
        }
        Err(e) => {
            let code = e.exit_code();
            if cfg.json {
                let obj = json!({
                    "error": { "kind": e.kind(), "message": e.to_string(), "exit_code": code }
                });
                println!(
                    "{}",
                    serde_json::to_string_pretty(&obj).expect("serializable")
                );
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(code as u8)
        }
    }
}
