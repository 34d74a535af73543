use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "spvt",
    version,
    about = "Single-item trading with an intermediary: policies, exact values, bounds"
)]
pub struct Cli {
    /// key=value file mirroring long flags; command-line flags win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte-Carlo estimate of a policy on one instance.
    Simulate(SimulateArgs),
    /// Quadrature values of the exact engine.
    #[command(subcommand)]
    Exact(ExactCommand),
    /// Closed-form dual certificates.
    #[command(subcommand)]
    Certify(CertifyCommand),
    /// Primal linear programs.
    #[command(subcommand)]
    Lp(LpCommand),
    /// Threshold search for the two-threshold policy.
    #[command(subcommand)]
    Optimize(OptimizeCommand),
    /// Exact enumeration over arrival orders.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Reference constants next to the computed values.
    #[command(subcommand)]
    Report(ReportCommand),
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Write the machine-readable JSON report here.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// alg1, alg2, alg3 or secretary-baseline.
    #[arg(long)]
    pub policy: String,
    /// Instance JSON file or inline family, e.g. `flat_k:n=10,k=3`.
    #[arg(long)]
    pub instance: String,
    #[arg(long)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    #[arg(long)]
    pub t1: Option<f64>,
    #[arg(long)]
    pub t2: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum ExactCommand {
    /// Probability that the threshold policy ends with the best buyer.
    Delta {
        #[arg(long)]
        mu: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Finite-n holding probabilities of the two-threshold policy.
    Alg3 {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t1: f64,
        #[arg(long)]
        t2: f64,
        /// Report only buyer rank `i`.
        #[arg(long)]
        i: Option<usize>,
        /// Write the `i, p_i, f_i` table here.
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Large-market constants, closed form next to quadrature.
    Limits {
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Debug, Subcommand)]
pub enum CertifyCommand {
    /// Dual certificate for the strong benchmark program.
    Strong {
        #[arg(long)]
        n: usize,
        /// Write the per-index table here (n up to 10000).
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Dual certificate for the weak benchmark program.
    Weak {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        w1: f64,
        #[arg(long)]
        w2: f64,
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Debug, Subcommand)]
pub enum LpCommand {
    /// Solve a primal program with the dense simplex.
    Solve {
        /// strong or weak.
        #[arg(long)]
        which: String,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Debug, Subcommand)]
pub enum OptimizeCommand {
    Thresholds {
        /// upper or lowerfamily.
        #[arg(long)]
        objective: String,
        #[arg(long, default_value_t = 1e-3)]
        grid: f64,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Expected weak benchmark by enumeration.
    Weakopt {
        #[arg(long)]
        instance: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// Holding distribution of the coin-flipping policy by enumeration.
    Alg2 {
        #[arg(long)]
        instance: String,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Debug, Subcommand)]
pub enum ReportCommand {
    Constants {
        #[command(flatten)]
        out: OutArg,
    },
}
