//! `liouville` command-line front end.
//!
//! Every subcommand reads one JSON document (file or stdin) and writes JSON
//! or CSV. Exit codes: 0 success, 1 mathematical failure reported as data,
//! 2 usage or input error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod output;
pub mod schema;

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or input; exit 2.
    Usage(String),
    /// The computation itself failed; exit 1.
    Math(String),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Math(_) => 1,
            CliError::Usage(_) | CliError::Io(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Math(m) => f.write_str(m),
            CliError::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "liouville", version, about = "Liouville systems: hypotheses, degree, radial and mean-field solvers")]
pub struct Cli {
    /// Worker threads for sweeps (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Seed for randomised grids.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Io {
    /// Input JSON path, or "-" for stdin.
    #[arg(long, short, default_value = "-")]
    pub input: PathBuf,
    /// Output path, or "-" for stdout.
    #[arg(long, short, default_value = "-")]
    pub output: PathBuf,
    #[arg(long, short, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check (H1), (H2) and the entrywise consequences for a matrix.
    CheckMatrix(Io),
    /// Locate rho among the shells O_N and hypersurfaces Gamma_N.
    Classify(Io),
    /// Leray-Schauder degree, from --chi/--genus/--holes with --N, or from
    /// an input document with A, rho and surface.
    Degree {
        #[command(flatten)]
        io: Io,
        #[arg(long, allow_negative_numbers = true)]
        chi: Option<i64>,
        #[arg(long)]
        genus: Option<u32>,
        #[arg(long)]
        holes: Option<u32>,
        /// Shell index N.
        #[arg(long = "N")]
        shell: Option<u32>,
    },
    /// Explicit point of E from the row sums of the inverse.
    EPoint(Io),
    /// Shoot one radial entire solution.
    Radial {
        #[command(flatten)]
        io: Io,
        /// Include the sampled profile in JSON output (CSV always has it).
        #[arg(long)]
        profile: bool,
    },
    /// Map a grid of initial heights to total masses.
    Sweep {
        #[command(flatten)]
        io: Io,
        /// Rows solved and flushed per batch.
        #[arg(long, default_value_t = 32)]
        chunk: usize,
    },
    /// Heights (alpha_head, log eps, ..., log eps) for one or more eps.
    EpsilonFamily(Io),
    /// Solve the mean-field system on the unit torus.
    MfSolve(Io),
}

impl Command {
    fn io(&self) -> &Io {
        match self {
            Command::CheckMatrix(io)
            | Command::Classify(io)
            | Command::EPoint(io)
            | Command::EpsilonFamily(io)
            | Command::MfSolve(io) => io,
            Command::Degree { io, .. } | Command::Radial { io, .. } | Command::Sweep { io, .. } => io,
        }
    }

    /// `degree --N` runs from flags alone.
    fn needs_input(&self) -> bool {
        !matches!(self, Command::Degree { shell: Some(_), .. })
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub type Sink = Box<dyn Write + Send>;

/// Parses `args` and runs the subcommand; returns the process exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: Sink, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let mut out = stdout;
                    let _ = write!(out, "{}", e.render());
                    let _ = out.flush();
                    return 0;
                }
                _ => 2,
            };
            let text = e.render().to_string();
            let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("usage error");
            let _ = writeln!(stderr, "liouville: {}", one_line(first.trim_start_matches("error: ")));
            return code;
        }
    };
    match execute(cli, stdin, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "liouville: error: {}", one_line(&e.to_string()));
            e.exit_code()
        }
    }
}

fn execute(cli: Cli, stdin: &mut dyn Read, stdout: Sink) -> Result<i32, CliError> {
    let io = cli.command.io().clone();
    let input = if cli.command.needs_input() {
        let mut buf = Vec::new();
        if io.input.as_os_str() == "-" {
            stdin.read_to_end(&mut buf)?;
        } else {
            File::open(&io.input)
                .map_err(|e| CliError::Usage(format!("cannot open {}: {e}", io.input.display())))?
                .read_to_end(&mut buf)?;
        }
        buf
    } else {
        Vec::new()
    };
    let out: Sink = if io.output.as_os_str() == "-" {
        stdout
    } else {
        Box::new(BufWriter::new(File::create(&io.output).map_err(|e| {
            CliError::Usage(format!("cannot create {}: {e}", io.output.display()))
        })?))
    };
    let jobs = cli.jobs;
    liouville_core::par::with_jobs(jobs, move || commands::dispatch(&cli, &input, out))
}
