//! `sturmian`: spectra, butterflies, IDS tables and gap-label certificates
//! for Sturmian Hamiltonians.

mod commands;
mod input;
mod report;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sturmian::coding::Code;

use report::{CliError, Format, Report};

#[derive(Parser, Debug)]
#[command(name = "sturmian", version, about = "Spectral computations for Sturmian Hamiltonians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Output {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for batch commands (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bands of one periodic approximant with their backward types.
    Spectrum {
        /// Full word entries, e.g. `0,0,2,1`.
        #[arg(long, allow_hyphen_values = true)]
        cf: Option<String>,
        /// Slope as `p/q`, or a decimal expanded to `--k` entries.
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long = "V", allow_hyphen_values = true)]
        v: f64,
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Bands for every reduced `p/q` in `[0, 1]` with `q <= qmax`, in Farey order.
    Butterfly {
        #[arg(long = "V", allow_hyphen_values = true)]
        v: f64,
        #[arg(long)]
        qmax: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Integrated density of states on an energy grid, or at one code.
    Ids {
        /// Stream entries `c_1,…` repeated periodically; `prefix;period` also works.
        #[arg(long, default_value = "1")]
        cf: String,
        #[arg(long = "V", default_value_t = 5.0, allow_hyphen_values = true)]
        v: f64,
        /// Approximant level for the grid.
        #[arg(long, default_value_t = 8)]
        k: usize,
        /// A code such as `A1.G2.B`; replaces the grid.
        #[arg(long)]
        code: Option<String>,
        #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
        emin: f64,
        #[arg(long, default_value_t = 8.0, allow_hyphen_values = true)]
        emax: f64,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Certificates that each label `ell·alpha mod 1` belongs to an open gap.
    Gaplabels {
        #[arg(long, default_value = "1")]
        cf: String,
        #[arg(long = "V", default_value_t = 5.0, allow_hyphen_values = true)]
        v: f64,
        /// Labels as `a..b` (inclusive) or one integer.
        #[arg(long, default_value = "-10..10", allow_hyphen_values = true)]
        ell: String,
        /// Depth of the code tree.
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Runs the invariant checks of one module, or all of them.
    Verify {
        #[arg(long, value_enum, default_value_t = verify::Suite::All)]
        suite: verify::Suite,
        #[command(flatten)]
        output: Output,
    },
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::arg("--threads must be positive"));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::arg(e.to_string()))
}

fn run(command: Command) -> Result<(Report, Output), CliError> {
    Ok(match command {
        Command::Spectrum { cf, alpha, v, k, output } => {
            let c = input::word(cf.as_deref(), alpha.as_deref(), k)?;
            (commands::spectrum(&c, input::coupling(v)?)?, output)
        }
        Command::Butterfly { v, qmax, output } => {
            let v = input::coupling(v)?;
            (pool(output.threads)?.install(|| commands::butterfly(v, qmax))?, output)
        }
        Command::Ids { cf, v, k, code, emin, emax, steps, output } => {
            let stream = input::stream(&cf)?;
            let v = input::coupling(v)?;
            let report = match code {
                Some(code) => commands::ids_code(&stream, v, &code.parse::<Code>()?)?,
                None => commands::ids_grid(&stream, v, k, emin, emax, steps)?,
            };
            (report, output)
        }
        Command::Gaplabels { cf, v, ell, k, output } => {
            let stream = input::stream(&cf)?;
            let v = input::coupling(v)?;
            let range = input::range(&ell)?;
            (pool(output.threads)?.install(|| commands::gaplabels(&stream, v, range, k))?, output)
        }
        Command::Verify { suite, output } => (verify::run(suite)?, output),
    })
}

fn fail(e: &CliError, code: u8) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&CliError { kind: "Usage".into(), message: e.render().to_string() }, 2),
    };
    match run(cli.command) {
        Ok((report, output)) => {
            if let Err(e) = report.write(output.format, output.out.as_deref()) {
                return fail(&e, 1);
            }
            if report.failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => fail(&e, 1),
    }
}
