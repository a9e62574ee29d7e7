//! marclab: rearrangements, Marcinkiewicz quasinorms and noncompactness certificates.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use marclab::{NumericPolicy, Space};

#[derive(Parser)]
#[command(
    name = "marclab",
    version,
    about = "Rearrangements, Marcinkiewicz quasinorms and noncompactness certificates for step functions",
    after_help = "EXIT STATUS:\n  0  every check passed\n  1  a check or verdict failed, or the computation was refused\n  2  usage, I/O or schema error\n\n\
                  PHI SPECS:\n  power_log:ALPHA,BETA,L[,SCALE]   t^ALPHA log(2L/t)^BETA on (0, L); L may be inf\n  FILE.json                         a phi document, e.g. {\"family\":\"tabulated\",...}\n\n\
                  EXAMPLES:\n  marclab norm --phi power_log:0.5,0,1 --f f.json\n  marclab superadd --case M --phi power_log:0.5,0,1 --m 2..16 --gamma 1\n  marclab certify general --cert c.json --kmax 8"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Relative tolerance of numerical suprema
    #[arg(long, env = "MARCLAB_TOL", global = true)]
    tol: Option<f64>,
    /// Samples per monotone piece before refinement
    #[arg(long, default_value_t = 64, global = true)]
    grid_points: usize,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

impl GlobalArgs {
    fn policy(&self) -> anyhow::Result<NumericPolicy> {
        let base = NumericPolicy::default();
        Ok(NumericPolicy::new(
            self.grid_points,
            self.tol.unwrap_or(base.tol_rel),
            base.oracle_grid,
        )?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Classify a fundamental function and describe its least quasiconcave majorant
    Phi {
        #[arg(long)]
        phi: String,
    },
    /// Nonincreasing rearrangement f* and maximal function f** of a step function
    Rearrange {
        /// Step function JSON: {"pieces":[{"value":..,"measure":..,"at":[s,e]}],"L":..}
        #[arg(long = "f")]
        f: PathBuf,
        /// Keep values as exact rationals
        #[arg(long)]
        exact: bool,
    },
    /// m_phi and M_phi quasinorms of a step function
    Norm {
        #[arg(long)]
        phi: String,
        #[arg(long = "f")]
        f: PathBuf,
        /// m or M; both when omitted
        #[arg(long = "case")]
        space: Option<Space>,
    },
    /// Superadditivity defect of the counterexample family over a range of sizes
    #[command(after_help = "CSV COLUMNS (after a `# schema_version=1` line):\n  m         family size\n  gamma     exponent\n  sum_norm  quasinorm of the sum of the family\n  defect    sum_k |f_k|^gamma / |sum_k f_k|^gamma")]
    Superadd {
        #[arg(long = "case")]
        space: Space,
        #[arg(long)]
        phi: String,
        /// Inclusive range of family sizes, e.g. 2..16
        #[arg(long = "m")]
        sizes: String,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        gamma: Vec<f64>,
        /// Largest radius bound for the m family; defaults to min(L, 1)
        #[arg(long)]
        t0: Option<f64>,
        /// Also write an SVG sparkline of defect against m
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Dyadic packing of a cube by equal balls
    Pack {
        /// Dimension
        #[arg(long)]
        n: u32,
        /// Ball volume
        #[arg(long, conflicts_with = "ratio", required_unless_present = "ratio")]
        t1: Option<f64>,
        /// Ball volume over the inscribed-ball volume, as an exact rational
        #[arg(long)]
        ratio: Option<String>,
        /// Cube side
        #[arg(long, default_value = "1")]
        side: String,
        /// Cube center coordinates; defaults to the center of [0, side]^n
        #[arg(long, value_delimiter = ',')]
        center: Vec<String>,
    },
    /// Check a noncompactness certificate
    Certify {
        #[command(subcommand)]
        kind: CertifyKind,
    },
    /// Parameters of the equimeasurable-extremal argument, re-verified
    WitnessParams {
        #[arg(long)]
        phi: String,
        #[arg(long = "case")]
        space: Space,
        #[arg(long)]
        norm_t: f64,
        #[arg(long)]
        lambda: f64,
        /// Number of centers
        #[arg(long = "m")]
        centers: u64,
    },
    /// Randomized sweep of the rearrangement inequalities
    Ineq {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
        #[arg(long, default_value_t = 50)]
        points: usize,
        /// Family sizes for the disjoint lower bound
        #[arg(long, value_delimiter = ',', default_value = "2,3,5")]
        disjoint: Vec<usize>,
    },
}

#[derive(Subcommand)]
enum CertifyKind {
    /// Large, well-spread witnesses
    General {
        #[arg(long)]
        cert: PathBuf,
        #[arg(long, default_value_t = 8)]
        kmax: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.1,0.01")]
        eps: Vec<f64>,
        /// Also write the per-step margins as CSV
        #[arg(long)]
        trace_csv: Option<PathBuf>,
    },
    /// Equimeasurable extremals with small disjoint supports
    Alt {
        #[arg(long)]
        cert: PathBuf,
        #[arg(long)]
        trace_csv: Option<PathBuf>,
    },
    /// Disjoint families for embeddings into bounded functions
    Linf {
        #[arg(long)]
        cert: PathBuf,
        #[arg(long)]
        trace_csv: Option<PathBuf>,
    },
}

/// Whether the command's checks all passed.
pub enum Status {
    Pass,
    Fail,
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<marclab::Error>() {
        Some(marclab::Error::Invalid(_) | marclab::Error::Parse(_)) => 2,
        Some(_) => 1,
        None => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
