//! Argument grammar and dispatch for the `invspan` binary.

mod commands;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use invspan::monte_carlo_stats::{CALIBRATION_ALPHA, DEFAULT_ALPHA, DEFAULT_PERMUTATIONS};
use invspan::rng::DEFAULT_SEED;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

/// Environment variable capping worker threads (0 or unset = one per core).
pub const THREADS_ENV: &str = "INVSPAN_THREADS";

#[derive(Debug, Parser)]
#[command(name = "invspan", version, about = "Invariant-span certificates and isotropic-field simulations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Radial {
    Chi,
    Lognormal,
    Constant,
}

#[derive(Debug, Args)]
pub struct Common {
    /// master seed; all randomness derives from it
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// write the report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct Field {
    #[arg(long, default_value_t = invspan::sphere_harmonics::DEFAULT_LMAX)]
    pub lmax: usize,
    #[arg(long, value_enum, default_value_t = Radial::Chi)]
    pub radial: Radial,
    /// power spectrum file (`ell C_ell` per line); default flat C_ell = 1
    #[arg(long)]
    pub spectrum: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Stats {
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
    pub permutations: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify that the permutation-conjugated span of the degree-ell irrep is all of so(2ell+1)
    VerifySpan {
        #[arg(long)]
        ell: i64,
        #[command(flatten)]
        common: Common,
    },
    /// Split so(n) into V1 and V2 and report dimensions and characters
    Decompose {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Transposition characters on V1 and V2
    Character {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Block shape of V1 and V2 in the stabilizer frame
    BlockCheck {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Draw harmonic coefficients of an isotropic field
    SimulateField {
        /// number of independent fields
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[command(flatten)]
        field: Field,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo power spectrum estimate against the input spectrum
    SpectrumEstimate {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[command(flatten)]
        field: Field,
        #[command(flatten)]
        common: Common,
    },
    /// Exchangeability, rotational invariance and radial/angular independence of degree-ell coefficients
    TestTheorem2 {
        #[arg(long, default_value_t = 4)]
        ell: usize,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Radial::Chi)]
        radial: Radial,
        #[arg(long)]
        spectrum: Option<PathBuf>,
        #[command(flatten)]
        stats: Stats,
        #[command(flatten)]
        common: Common,
    },
    /// Gaussianity of coefficient marginals and rotation tests of product laws
    TestBernstein {
        #[arg(long, default_value_t = 4)]
        ell: usize,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        /// dimension of the i.i.d. product-law vectors
        #[arg(long, default_value_t = 5)]
        d: usize,
        #[arg(long, value_enum, default_value_t = Radial::Chi)]
        radial: Radial,
        #[command(flatten)]
        stats: Stats,
        #[command(flatten)]
        common: Common,
    },
    /// Random walk by conjugated irrep rotations, tested for uniformity on the sphere
    OrbitWalk {
        #[arg(long, default_value_t = 1)]
        ell: usize,
        /// recorded states
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        /// interleave the transposition (1 2) after every step
        #[arg(long)]
        odd_permutation: bool,
        #[command(flatten)]
        stats: Stats,
        #[command(flatten)]
        common: Common,
    },
    /// Null rejection rates of every test
    Calibrate {
        #[arg(long, default_value_t = 200)]
        reps: usize,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = CALIBRATION_ALPHA)]
        alpha: f64,
        #[arg(long, default_value_t = 199)]
        permutations: usize,
        #[command(flatten)]
        common: Common,
    },
}

/// Parses `argv` and runs the command, returning the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return EXIT_USAGE;
    }
    match commands::dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let threads: usize = raw.trim().parse().map_err(|_| format!("{THREADS_ENV} must be a non-negative integer, got {raw:?}"))?;
    if threads > 0 {
        // A second call in the same process (tests) finds the pool already built.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    Ok(())
}
