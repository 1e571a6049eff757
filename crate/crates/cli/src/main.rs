//! `logenergy`: evaluate the renormalized logarithmic energy on S², its
//! constants and bounds, lattice and theta sums, and run minimizations.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::{write_output, Format};

#[derive(Debug, Parser)]
#[command(name = "logenergy", version, about = "Heat-kernel renormalized logarithmic energy on the unit sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    format: Format,

    /// Write the document here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Byte-identical output for identical arguments: sequential reductions,
    /// no timings.
    #[arg(long, global = true)]
    deterministic: bool,

    /// Log level for diagnostics on stderr (error, warn, info, debug).
    #[arg(long, global = true, default_value = "warn")]
    log_level: log::LevelFilter,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Random,
    Fibonacci,
    Tetrahedron,
    Antipodal,
}

/// Where the points come from: a file, or a generator.
#[derive(Debug, Args)]
pub struct PointsSource {
    /// Points file (CSV with x,y,z columns, or JSON {"n", "points"}).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Generator used when no input file is given.
    #[arg(long, value_enum, default_value_t = KindArg::Random)]
    pub kind: KindArg,
    /// Number of generated points.
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    /// Seed for the random generator.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EnergyArg {
    Log,
    Gaussian,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Log energy and the terms of the renormalized identity for one configuration.
    Energy {
        #[command(flatten)]
        points: PointsSource,
        /// Diffusion time (default 1/n).
        #[arg(long)]
        t: Option<f64>,
        /// Kernel truncation tolerance.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Also report the Gaussian energy at this scale c.
        #[arg(long)]
        gaussian_c: Option<f64>,
    },
    /// Check that the renormalized constant is the same for random configurations.
    VerifyIdentity {
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 0.05)]
        t: f64,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Pass threshold for spread and residual.
        #[arg(long, default_value_t = 1e-8)]
        threshold: f64,
    },
    /// Closed-form constants.
    Constants,
    /// Lower-bound pipeline, hexagonal improvement and density bound.
    Bound {
        /// Time scale t = a/n.
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        /// Also assemble the finite-n bound for this n.
        #[arg(long)]
        n: Option<usize>,
        /// Radius parameter of the density bound.
        #[arg(long, default_value_t = 4.16)]
        s: f64,
        #[arg(long, default_value_t = 3.81)]
        s_min: f64,
        #[arg(long, default_value_t = 6.0)]
        s_max: f64,
        #[arg(long, default_value_t = 2191)]
        steps: usize,
        /// Tolerance of the spectral diagonal in the finite-n bound.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Minimize the log or Gaussian energy; with --clog, estimate the linear coefficient.
    Minimize {
        /// Point counts; more than one only with --clog.
        #[arg(long, value_delimiter = ',', default_value = "100")]
        n: Vec<usize>,
        #[arg(long, value_enum, default_value_t = EnergyArg::Log)]
        energy: EnergyArg,
        /// Gaussian scale c (kernel exp(-c n |x - y|^2)).
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of starts: one Fibonacci spiral, the rest random.
        #[arg(long, default_value_t = 8)]
        starts: usize,
        #[arg(long, default_value_t = 5000)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-9)]
        grad_tol: f64,
        #[arg(long, default_value_t = 1e-3)]
        initial_step: f64,
        /// Start from this points file instead of multi-start.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Write the minimizer to this points file.
        #[arg(long)]
        points_out: Option<PathBuf>,
        /// Report (E - (1/2 - log 2) n^2 + n log n / 2)/n for each n.
        #[arg(long)]
        clog: bool,
    },
    /// Incomplete-gamma lattice sums and the three-term expansion.
    Lattice {
        #[arg(long, value_delimiter = ',', default_value = "0.01")]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 1e-13)]
        tol: f64,
        /// Also evaluate the integral route to c_BHS at these upper limits.
        #[arg(long, value_delimiter = ',')]
        cbhs_c: Vec<f64>,
    },
    /// Jacobi theta functions, the cubic theta function and the inequality margin.
    Theta {
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.3,0.5,0.7,0.9")]
        q: Vec<f64>,
        #[arg(long, default_value_t = 0.1)]
        c_min: f64,
        #[arg(long, default_value_t = 50.0)]
        c_max: f64,
        #[arg(long, default_value_t = 0.1)]
        c_step: f64,
    },
    /// Ratio S(t)/I(t) at t = c/n.
    MetaRatio {
        #[command(flatten)]
        points: PointsSource,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
        c: Vec<f64>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Minimize the log energy first, with this many iterations.
        #[arg(long, default_value_t = 0)]
        minimize_iter: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::new()
        .filter_level(cli.log_level)
        .format_timestamp(if cli.deterministic { None } else { Some(env_logger::TimestampPrecision::Millis) })
        .init();
    let started = std::time::Instant::now();
    let result = commands::run(&cli.command, cli.deterministic);
    match result {
        Ok(mut out) => {
            if !cli.deterministic {
                out.set_elapsed(started.elapsed().as_secs_f64());
            }
            match write_output(&out, cli.format, cli.out.as_deref()) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
