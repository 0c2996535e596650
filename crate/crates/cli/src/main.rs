use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ctxwb_cli::commands::{self, BoundRequest, SeesawRequest, Set};
use ctxwb_cli::{exit, Anchors};

#[derive(Parser)]
#[command(name = "ctxwb", version, about = "Contextual, noncontextual and quantum bounds for prepare-and-measure scenarios")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum SetArg {
    C,
    Nc,
    Q1,
    Qpi,
    Qpsi,
}

#[derive(Subcommand)]
enum Cmd {
    /// Optimise a metric over one behaviour set.
    Bound {
        /// 632, porac:N, mporac:N, mporac23, prop7, ncycle:N, simplest:ALPHA, or a JSON file
        #[arg(long)]
        scenario: String,
        /// table1:I, porac:N, mporac23, ncycle:N, or a JSON file
        #[arg(long)]
        metric: String,
        #[arg(long, value_enum)]
        set: SetArg,
        /// Projective hierarchy level (qpi only).
        #[arg(long, default_value_t = 1)]
        level: usize,
        /// Adjoint relations on the identity row only, plus last-outcome unitaries.
        #[arg(long)]
        sound: bool,
        /// Exit with 3 unless the value is within --tol of this.
        #[arg(long)]
        expect: Option<f64>,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        /// JSON report, or the optimal behaviour when the name ends in .csv.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the program (LP) or moment problem (SDP) as JSON.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Reproduce reference values; `all` runs every preset.
    Preset {
        #[arg(required = true)]
        names: Vec<String>,
        /// Directory for CSV/JSON reports and curve files.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Anchors file to use instead of the bundled one.
        #[arg(long)]
        anchors: Option<PathBuf>,
    },
    /// Lower bound from alternating state and measurement SDPs.
    Seesaw {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        metric: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Sweep dimensions from --dim up to this.
        #[arg(long)]
        max_dim: Option<usize>,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dump_realization: Option<PathBuf>,
    },
    /// List preset names.
    Presets,
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.cmd {
        Cmd::Bound { scenario, metric, set, level, sound, expect, tol, out, export } => {
            let set = match set {
                SetArg::C => Set::C,
                SetArg::Nc => Set::Nc,
                SetArg::Q1 => Set::Q1,
                SetArg::Qpi => Set::Qpi,
                SetArg::Qpsi => Set::Qpsi,
            };
            let req = BoundRequest { scenario, metric, set, level, sound, expect, tol, out, export };
            let r = commands::bound(&req)?;
            match r.value {
                Some(v) => println!("{v:.10} {}", r.status),
                None => println!("{}", r.status),
            }
            Ok(r.exit_code(expect, tol))
        }
        Cmd::Preset { names, out, anchors } => {
            let anchors = match anchors {
                Some(p) => Anchors::load(&p)?,
                None => Anchors::bundled(),
            };
            let reports = commands::presets(&names, &anchors, out.as_deref())?;
            let failed: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.preset.as_str()).collect();
            if failed.is_empty() {
                Ok(exit::OK)
            } else {
                eprintln!("anchor verdicts failed in: {}", failed.join(", "));
                Ok(exit::ANCHOR_FAILURE)
            }
        }
        Cmd::Seesaw { scenario, metric, dim, max_dim, restarts, seed, max_iter, out, dump_realization } => {
            let req = SeesawRequest { scenario, metric, dim, max_dim, restarts, seed, max_iter, out, dump_realization };
            for r in commands::seesaw_sweep(&req)? {
                println!(
                    "d={} value={:.10} restart={} iterations={} ok_restarts={}/{}",
                    r.dim, r.value, r.best_restart, r.iterations, r.restarts, req.restarts
                );
            }
            Ok(exit::OK)
        }
        Cmd::Presets => {
            for p in ctxwb_cli::PRESETS {
                println!("{p}");
            }
            Ok(exit::OK)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::ERROR as u8)
        }
    }
}
