use clap::{Parser, Subcommand};

mod commands;

#[derive(Parser)]
#[command(name = "sweepout", about = "Certified PL Morse sweep-outs of piecewise-flat complexes")]
struct Cli {
    /// Suppress progress output
    #[arg(long, global = true)]
    quiet: bool,
    /// Emit machine-readable error JSON on stderr
    #[arg(long, global = true)]
    json_errors: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the dimensional constant table
    Constants {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value = "text")]
        format: String,
    },
    /// Generate a test manifold
    Generate {
        /// flat-torus-2d | flat-torus-3d | icosphere | convex-polygon-disk
        #[arg(long)]
        kind: String,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        subdiv: Option<usize>,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, short)]
        out: std::path::PathBuf,
    },
    /// Build and certify a quasi-convex cell structure
    Cells {
        #[arg(long)]
        input: std::path::PathBuf,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        rho_auto: bool,
        #[arg(long, default_value_t = 4.0)]
        lambda_max: f64,
        #[arg(long)]
        report: Option<std::path::PathBuf>,
    },
    /// Split a complex into two balanced subcomplexes
    Split {
        #[arg(long)]
        input: std::path::PathBuf,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, default_value_t = 4.0)]
        lambda_max: f64,
        #[arg(long)]
        report: std::path::PathBuf,
    },
    /// Build the certified sweep function
    Sweep {
        #[arg(long)]
        input: std::path::PathBuf,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long)]
        out: std::path::PathBuf,
        #[arg(long)]
        cert: std::path::PathBuf,
        #[arg(long)]
        profile: Option<std::path::PathBuf>,
    },
    /// Split the volume in half along a level of a sweep function
    Bisect {
        #[arg(long)]
        input: std::path::PathBuf,
        #[arg(long)]
        function: std::path::PathBuf,
        #[arg(long)]
        report: std::path::PathBuf,
    },
    /// Re-check a certificate against its function file from scratch
    Verify {
        #[arg(long)]
        function: std::path::PathBuf,
        #[arg(long)]
        cert: std::path::PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    let quiet = cli.quiet;
    let json_errors = cli.json_errors;
    let result = commands::run(cli.command, quiet);
    if let Err(err) = result {
        if json_errors {
            let payload = serde_json::json!({
                "error": err.to_string(),
                "kind": commands::error_kind(&err),
            });
            eprintln!("{payload}");
        } else {
            eprintln!("error: {err}");
        }
        std::process::exit(1);
    }
}
