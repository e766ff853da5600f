//! `bsf`: test modules, F-jumping numbers and Bernstein-Sato polynomials
//! from the command line, reported as deterministic JSON.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use report::{Outcome, Report};

#[derive(Debug, Parser)]
#[command(
    name = "bsf",
    version,
    about = "Test modules, F-jumping numbers and Bernstein-Sato roots over F_p"
)]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Include wall-clock timing in the report (breaks byte-identical output).
    #[arg(long, global = true)]
    timing: bool,
    /// Write the report here instead of standard output.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

/// Ring and hypersurface shared by most commands.
#[derive(Debug, Args, Clone)]
pub struct RingArgs {
    /// Characteristic.
    #[arg(short, long = "prime")]
    pub p: u64,
    /// Comma-separated variable names.
    #[arg(long, value_delimiter = ',', required = true)]
    pub vars: Vec<String>,
}

#[derive(Debug, Args, Clone)]
pub struct HypersurfaceArgs {
    #[command(flatten)]
    pub ring: RingArgs,
    /// The hypersurface equation.
    #[arg(short)]
    pub f: String,
    /// Twist of the Cartier structure.
    #[arg(short, default_value = "1")]
    pub g: String,
    /// Treat the module as F-regular when the built-in check is inconclusive.
    #[arg(long)]
    pub assume_f_regular: bool,
}

#[derive(Debug, Args, Clone)]
pub struct SearchArgs {
    /// Deepest level of any chain or search.
    #[arg(long, default_value_t = 6)]
    pub e_max: u32,
    /// Level at which the refined jump sets are audited by a full sweep.
    #[arg(long, default_value_t = 3)]
    pub audit_level: u32,
    /// Longest digit window for period detection.
    #[arg(long, default_value_t = 8)]
    pub period_window: usize,
    /// Consecutive equal levels required for stabilization.
    #[arg(long, default_value_t = 2)]
    pub window: u32,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Test module τ(M, f^t) for t = a/p^s.
    Tau {
        #[command(flatten)]
        hyp: HypersurfaceArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Exponent, as an exact rational "a/b".
        #[arg(short)]
        t: String,
    },
    /// F-jumping numbers in (0, 1].
    Jumps {
        #[command(flatten)]
        hyp: HypersurfaceArgs,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// F-pure threshold.
    Fpt {
        #[command(flatten)]
        hyp: HypersurfaceArgs,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Bernstein-Sato polynomial at one level.
    BsPoly {
        #[command(flatten)]
        hyp: HypersurfaceArgs,
        /// Level.
        #[arg(short)]
        e: u32,
    },
    /// Limit Bernstein-Sato polynomial.
    BsLimit {
        #[command(flatten)]
        hyp: HypersurfaceArgs,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Left/right eigenvalue pairs at one level.
    Stadnik {
        #[command(flatten)]
        hyp: HypersurfaceArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Level.
        #[arg(short)]
        e: u32,
    },
    /// Compare roots of b^e with truncated jumping numbers over a level range.
    VerifyTheorem {
        #[command(flatten)]
        hyp: HypersurfaceArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// First level.
        #[arg(long, default_value_t = 1)]
        from: u32,
        /// Last level.
        #[arg(long, default_value_t = 5)]
        to: u32,
    },
    /// Divided-power operator identities on truncated polynomial spaces.
    VerifyIdentities {
        #[arg(short, long = "prime")]
        p: u64,
        /// Largest prime-power exponent checked.
        #[arg(long, default_value_t = 2)]
        e_max: u32,
        /// Degree bound D; must exceed p^(e_max+1).
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Frobenius root I_e(J).
    Froot {
        #[command(flatten)]
        ring: RingArgs,
        /// Generators of J (comma-separated or repeated).
        #[arg(short = 'I', long = "ideal", value_delimiter = ',', required = true)]
        ideal: Vec<String>,
        /// Level.
        #[arg(short)]
        e: u32,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(err) = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
        {
            eprintln!("bsf: cannot configure thread pool: {err}");
            return ExitCode::from(1);
        }
    }
    let start = Instant::now();
    let (name, config, outcome) = dispatch(&cli.command);
    let mut report = Report::new(name, config, outcome);
    if cli.timing {
        report.set_elapsed(start.elapsed());
    }
    let code = report.exit_code();
    let text = report.to_json();
    match &cli.output {
        Some(path) => {
            if let Err(err) = std::fs::write(path, &text) {
                eprintln!("bsf: cannot write {}: {err}", path.display());
                return ExitCode::from(1);
            }
        }
        None => {
            use std::io::Write;
            // A closed pipe (e.g. `| head`) is not an error worth a panic.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
        }
    }
    ExitCode::from(code)
}

fn dispatch(command: &Command) -> (&'static str, serde_json::Value, Outcome) {
    use commands as c;
    match command {
        Command::Tau { hyp, search, t } => (
            "tau",
            c::echo(Some(hyp), Some(search), &[("t", t.as_str().into())]),
            c::tau(hyp, search, t),
        ),
        Command::Jumps { hyp, search } => (
            "jumps",
            c::echo(Some(hyp), Some(search), &[]),
            c::jumps(hyp, search),
        ),
        Command::Fpt { hyp, search } => ("fpt", c::echo(Some(hyp), Some(search), &[]), c::fpt(hyp, search)),
        Command::BsPoly { hyp, e } => (
            "bs-poly",
            c::echo(Some(hyp), None, &[("e", (*e).into())]),
            c::bs_poly(hyp, *e),
        ),
        Command::BsLimit { hyp, search } => (
            "bs-limit",
            c::echo(Some(hyp), Some(search), &[]),
            c::bs_limit(hyp, search),
        ),
        Command::Stadnik { hyp, search, e } => (
            "stadnik",
            c::echo(Some(hyp), Some(search), &[("e", (*e).into())]),
            c::stadnik(hyp, search, *e),
        ),
        Command::VerifyTheorem {
            hyp,
            search,
            from,
            to,
        } => (
            "verify-theorem",
            c::echo(
                Some(hyp),
                Some(search),
                &[("from", (*from).into()), ("to", (*to).into())],
            ),
            c::verify_theorem(hyp, search, *from, *to),
        ),
        Command::VerifyIdentities { p, e_max, bound } => {
            let bound = bound.unwrap_or_else(|| c::default_bound(*p, *e_max));
            (
                "verify-identities",
                c::echo(
                    None,
                    None,
                    &[
                        ("p", (*p).into()),
                        ("e_max", (*e_max).into()),
                        ("bound", bound.into()),
                    ],
                ),
                c::verify_identities(*p, *e_max, bound),
            )
        }
        Command::Froot { ring, ideal, e } => (
            "froot",
            c::echo_ring(ring, &[("ideal", ideal.clone().into()), ("e", (*e).into())]),
            c::froot(ring, ideal, *e),
        ),
    }
}
