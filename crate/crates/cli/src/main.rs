use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod input;

use commands::Outcome;

#[derive(Parser)]
#[command(
    name = "carnot",
    version,
    about = "Privileged and Carnot coordinates for polynomial frames"
)]
struct Cli {
    /// Human-readable output instead of JSON.
    #[arg(long, global = true)]
    text: bool,

    /// Seed for randomized commands; CARNOT_SEED takes precedence.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
pub struct FrameArgs {
    /// Frame document: a path, a catalog name or inline JSON. Read from stdin if absent.
    #[arg(long)]
    pub frame: Option<String>,

    /// Base point overriding the frame's, e.g. `1,0,-1/2`.
    #[arg(long)]
    pub at: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a frame or an algebra document.
    Validate {
        #[arg(long, conflicts_with = "algebra")]
        frame: Option<String>,
        #[arg(long)]
        algebra: Option<String>,
    },
    /// Group law of a graded algebra, or the product of two points.
    GroupLaw {
        #[arg(long)]
        algebra: Option<String>,
        #[arg(long, requires = "y", allow_hyphen_values = true)]
        x: Option<String>,
        #[arg(long, requires = "x", allow_hyphen_values = true)]
        y: Option<String>,
    },
    /// Affine change to linearly adapted coordinates.
    Linearize {
        #[command(flatten)]
        frame: FrameArgs,
        /// Emit the frame in the new coordinates instead of the change.
        #[arg(long)]
        pushed: bool,
    },
    /// Change to privileged coordinates.
    Psi {
        #[command(flatten)]
        frame: FrameArgs,
        #[arg(long)]
        pushed: bool,
    },
    /// Change to Carnot coordinates.
    Epsilon {
        #[command(flatten)]
        frame: FrameArgs,
        #[arg(long)]
        pushed: bool,
    },
    /// Model fields of the nilpotent approximation at the base point.
    ModelFields {
        #[command(flatten)]
        frame: FrameArgs,
    },
    /// Orders at the base point of the components of a change, or of one function.
    Order {
        #[command(flatten)]
        frame: FrameArgs,
        /// Change whose components are measured (default `epsilon`).
        #[arg(long)]
        change: Option<String>,
        /// A single polynomial document instead.
        #[arg(long, conflicts_with = "change")]
        function: Option<String>,
        /// Search bound for the order (default: step + 1).
        #[arg(long)]
        max_weight: Option<u32>,
    },
    /// Canonical coordinates of the first kind.
    Canonical1 {
        #[command(flatten)]
        frame: FrameArgs,
        #[command(flatten)]
        numeric: NumericArgs,
    },
    /// Canonical coordinates of the second kind.
    Canonical2 {
        #[command(flatten)]
        frame: FrameArgs,
        #[command(flatten)]
        numeric: NumericArgs,
    },
    /// Check that a change yields privileged coordinates.
    CheckPrivileged {
        #[command(flatten)]
        frame: FrameArgs,
        /// Change document, or one of: epsilon, psi, linear, first-kind, second-kind, identity.
        #[arg(long, default_value = "epsilon")]
        change: String,
    },
    /// Check that a change yields Carnot coordinates.
    CheckCarnot {
        #[command(flatten)]
        frame: FrameArgs,
        #[arg(long, default_value = "epsilon")]
        change: String,
    },
    /// Scaling test for osculation by the tangent group.
    Osculate {
        #[command(flatten)]
        frame: FrameArgs,
        #[arg(long, default_value = "epsilon")]
        change: String,
        /// Number of random unit directions.
        #[arg(long, default_value_t = 8)]
        directions: usize,
        /// Comma-separated scales (default 2^-1, ..., 2^-10).
        #[arg(long)]
        t_grid: Option<String>,
    },
    /// Print a catalog entry, or list the catalog.
    Catalog { name: Option<String> },
    /// Run the acceptance suite.
    Selftest {
        /// Run a single criterion.
        #[arg(long)]
        criterion: Option<u32>,
    },
}

#[derive(Args, Clone)]
pub struct NumericArgs {
    /// Fit the chart from RK4 flows instead of exact flows.
    #[arg(long)]
    pub numeric: bool,
    #[arg(long, default_value_t = 0.25)]
    pub radius: f64,
    #[arg(long)]
    pub step: Option<f64>,
}

fn seed(flag: Option<u64>) -> Result<Option<u64>, String> {
    match std::env::var("CARNOT_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| format!("CARNOT_SEED is not an unsigned integer: `{s}`")),
        Err(_) => Ok(flag),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let seed = match seed(cli.seed) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let ctx = commands::Context { text: cli.text, seed };
    let result = match cli.command {
        Command::Validate { frame, algebra } => commands::validate(&ctx, frame, algebra),
        Command::GroupLaw { algebra, x, y } => commands::group_law(&ctx, algebra, x, y),
        Command::Linearize { frame, pushed } => commands::stage(&ctx, &frame, "linear", pushed),
        Command::Psi { frame, pushed } => commands::stage(&ctx, &frame, "psi", pushed),
        Command::Epsilon { frame, pushed } => commands::stage(&ctx, &frame, "epsilon", pushed),
        Command::ModelFields { frame } => commands::model_fields(&ctx, &frame),
        Command::Order {
            frame,
            change,
            function,
            max_weight,
        } => commands::order(&ctx, &frame, change, function, max_weight),
        Command::Canonical1 { frame, numeric } => commands::canonical(&ctx, &frame, 1, &numeric),
        Command::Canonical2 { frame, numeric } => commands::canonical(&ctx, &frame, 2, &numeric),
        Command::CheckPrivileged { frame, change } => commands::check(&ctx, &frame, &change, false),
        Command::CheckCarnot { frame, change } => commands::check(&ctx, &frame, &change, true),
        Command::Osculate {
            frame,
            change,
            directions,
            t_grid,
        } => commands::osculate(&ctx, &frame, &change, directions, t_grid),
        Command::Catalog { name } => commands::catalog(&ctx, name),
        Command::Selftest { criterion } => commands::selftest(&ctx, criterion),
    };
    match result {
        Ok(Outcome { output, pass }) => {
            println!("{output}");
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
