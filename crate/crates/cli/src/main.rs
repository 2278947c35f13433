//! Batch entry point for the template/lattice laboratory.
//!
//! Exit codes: 0 success, 2 usage errors, 3 domain errors (enumeration
//! budgets, inadmissible pairs, missing valid schedule index, oversized
//! bands, violated sups, failed validation).

mod commands;
mod output;
mod parse;

use clap::{Parser, Subcommand};
use output::Format;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "divflow", version, about = "lattice flows and the template calculus")]
struct Cli {
    /// Output directory for artifacts (defaults to stdout where sensible)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Artifact format for reports
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Seed for randomized demos
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Enumeration budget in candidate cells
    #[arg(long, global = true, default_value_t = divflow::latflow::DEFAULT_BUDGET)]
    budget: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form dimension values for a product shape
    Dim {
        /// Factor sizes, e.g. --pairs 1,1 2,1
        #[arg(long, num_args = 1.., required = true)]
        pairs: Vec<String>,
        /// Escape fraction in (0, 1], exact ("1/2" or "0.5")
        #[arg(long, default_value = "1")]
        delta: String,
    },
    /// Build, validate and rate piecewise-linear templates
    Template {
        #[command(subcommand)]
        cmd: TemplateCmd,
    },
    /// Scheduled constructions with verification reports
    Construct {
        /// I (essential excursions) or II (escape fractions)
        #[arg(long)]
        mode: String,
        #[arg(long, num_args = 1.., required = true)]
        pairs: Vec<String>,
        #[arg(long, num_args = 1..)]
        weights: Option<Vec<String>>,
        /// Per-factor escape fractions for mode II
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        deltas: Option<Vec<String>>,
        /// Verify the window with T_k at or just past this scale
        #[arg(long)]
        at: f64,
        /// Number of consecutive windows to verify
        #[arg(long, default_value_t = 1)]
        windows: usize,
        /// Band half-width C for mode II occupation
        #[arg(long, default_value_t = 1.0)]
        band: f64,
        /// Explicit schedule horizon (defaults to growing until `at` fits)
        #[arg(long)]
        kmax: Option<usize>,
        /// Also write the factor templates as JSON
        #[arg(long, default_value_t = false)]
        emit_templates: bool,
    },
    /// Lattice flows, successive minima, witness scans, occupations
    Lattice {
        #[command(subcommand)]
        cmd: LatticeCmd,
    },
    /// Solve the rescaling inequality for bounded functions
    Lemmakey {
        /// Instance description (JSON)
        #[arg(long, required_unless_present = "demo")]
        input: Option<PathBuf>,
        /// Run N randomized piecewise-constant instances instead
        #[arg(long)]
        demo: Option<usize>,
    },
}

#[derive(Subcommand)]
enum TemplateCmd {
    /// Check the template conditions; exit 0 iff no violations
    Validate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Standard template through a point sequence t:eps,t:eps,...
    Standard {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        points: String,
    },
    /// Average contraction rate over a window (plus a finite-horizon
    /// lower-average probe on request)
    Rate {
        #[arg(long)]
        input: PathBuf,
        /// Window a,b (defaults to the whole domain)
        #[arg(long)]
        window: Option<String>,
        /// Probe min_{T' in [fT, T]} of the running average at horizon T
        #[arg(long)]
        lower_horizon: Option<f64>,
        /// Tail fraction f for the probe
        #[arg(long, default_value_t = 0.5)]
        tail_fraction: f64,
    },
}

#[derive(Subcommand)]
enum LatticeCmd {
    /// Successive minima of g_t u_theta Z^{m+n} at one time
    Minima {
        #[arg(long)]
        theta: String,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long)]
        t: f64,
    },
    /// Trajectory of logarithmic minima over a grid start:stop:step
    Traj {
        #[arg(long)]
        theta: String,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long)]
        t: String,
    },
    /// Hunt for a Dirichlet-improvement witness at scale Q
    Scan {
        #[arg(long)]
        theta: String,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long = "Q")]
        q: f64,
    },
    /// Occupation fractions: cusp proxy (--r) or joint witness sets (--eps)
    Occupy {
        /// Single factor for the cusp proxy
        #[arg(long)]
        theta: Option<String>,
        /// One matrix per factor for the joint scan, ';' rows ',' entries,
        /// factors separated by '|'
        #[arg(long)]
        thetas: Option<String>,
        #[arg(long, num_args = 1..)]
        pairs: Option<Vec<String>>,
        #[arg(long, num_args = 1..)]
        weights: Option<Vec<String>>,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Cusp threshold in (0,1)
        #[arg(long)]
        r: Option<f64>,
        /// Witness tolerance for the joint mode
        #[arg(long)]
        eps: Option<f64>,
        /// Exclude one factor (1-based) from the joint union
        #[arg(long)]
        exclude: Option<usize>,
        #[arg(long = "T")]
        horizon: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
}

fn main() -> ExitCode {
    // Die quietly when stdout is a closed pipe (grep -q, head, ...)
    // instead of panicking mid-report.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.error);
            ExitCode::from(e.code)
        }
    }
}

/// Error with the exit-code contract attached.
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        error: e.into(),
    }
}

pub fn domain(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 3,
        error: e.into(),
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    let ctx = commands::Ctx {
        out: cli.out,
        format: cli.format,
        seed: cli.seed,
        budget: cli.budget,
    };
    match cli.command {
        Command::Dim { pairs, delta } => commands::dim(&ctx, &pairs, &delta),
        Command::Template { cmd } => match cmd {
            TemplateCmd::Validate { input } => commands::template_validate(&ctx, &input),
            TemplateCmd::Standard { m, n, points } => {
                commands::template_standard(&ctx, m, n, &points)
            }
            TemplateCmd::Rate {
                input,
                window,
                lower_horizon,
                tail_fraction,
            } => commands::template_rate(&ctx, &input, window.as_deref(), lower_horizon, tail_fraction),
        },
        Command::Construct {
            mode,
            pairs,
            weights,
            deltas,
            at,
            windows,
            band,
            kmax,
            emit_templates,
        } => commands::construct(
            &ctx,
            &mode,
            &pairs,
            weights.as_deref(),
            deltas.as_deref(),
            at,
            windows,
            band,
            kmax,
            emit_templates,
        ),
        Command::Lattice { cmd } => match cmd {
            LatticeCmd::Minima { theta, m, n, t } => commands::lattice_minima(&ctx, &theta, m, n, t),
            LatticeCmd::Traj { theta, m, n, t } => commands::lattice_traj(&ctx, &theta, m, n, &t),
            LatticeCmd::Scan { theta, m, n, eps, q } => {
                commands::lattice_scan(&ctx, &theta, m, n, eps, q)
            }
            LatticeCmd::Occupy {
                theta,
                thetas,
                pairs,
                weights,
                m,
                n,
                r,
                eps,
                exclude,
                horizon,
                step,
            } => commands::lattice_occupy(
                &ctx,
                theta.as_deref(),
                thetas.as_deref(),
                pairs.as_deref(),
                weights.as_deref(),
                m,
                n,
                r,
                eps,
                exclude,
                horizon,
                step,
            ),
        },
        Command::Lemmakey { input, demo } => commands::lemmakey(&ctx, input.as_deref(), demo),
    }
}
