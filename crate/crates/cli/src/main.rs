use std::process::ExitCode;

use clap::{Parser, Subcommand};
use reductive_lab::commands::{self, InputError, Options};
use reductive_lab::report::Report;

#[derive(Parser)]
#[command(name = "reductive-lab", version, about = "Jacobi relations on naturally reductive spaces")]
struct Cli {
    /// Emit the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Residual tolerance (each command has its own default).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Number of sampled directions.
    #[arg(long, global = true, default_value_t = commands::DEFAULT_SAMPLES)]
    samples: usize,
    /// Sampling seed; falls back to REDUCTIVE_LAB_SEED.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Record wall time in the report.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List registered spaces.
    Catalog,
    /// Check λ(λ^{2m} + a2 λ^{2m−2} + … + a_{2m}) against an entry.
    Verify {
        id: String,
        /// Comma-separated a2,a4,…; fractions allowed.
        #[arg(long, allow_hyphen_values = true)]
        poly: String,
    },
    /// Find the minimal linear Jacobi relation.
    Minpoly { id: String },
    /// Classify the torsion form.
    Gvcp { id: String },
    /// Sweep the residual-bracket family over lo:hi:n.
    Appendix {
        #[arg(long, default_value = "0.25:2.0:8", allow_hyphen_values = true)]
        s_grid: String,
    },
    /// Check that ℛ_{d+1} is pure trace.
    Twistor {
        id: String,
        #[arg(long)]
        d: usize,
    },
    /// Run the full pipeline on a JSON space description.
    Custom { file: std::path::PathBuf },
}

fn run(cli: &Cli) -> Result<Report, InputError> {
    let opts = Options {
        tol: cli.tol,
        samples: cli.samples,
        seed: commands::resolve_seed(cli.seed)?,
        timing: cli.timing,
    };
    match &cli.command {
        Command::Catalog => commands::catalog_cmd(&opts),
        Command::Verify { id, poly } => commands::verify_cmd(id, poly, &opts),
        Command::Minpoly { id } => commands::minpoly_cmd(id, &opts),
        Command::Gvcp { id } => commands::gvcp_cmd(id, &opts),
        Command::Appendix { s_grid } => commands::appendix_cmd(s_grid, &opts),
        Command::Twistor { id, d } => commands::twistor_cmd(id, *d, &opts),
        Command::Custom { file } => {
            let text = std::fs::read_to_string(file)
                .map_err(|e| InputError::new("Io", format!("{}: {e}", file.display())))?;
            commands::custom_cmd(&text, &opts)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            if cli.json {
                print!("{}", report.to_json());
            } else {
                print!("{}", report.to_text());
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(2)
        }
    }
}
