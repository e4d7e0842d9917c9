use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, ValueEnum};

use ndcgem::report::{run, RtSim, RunConfig, RunMode, ScenarioSource};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Coordinated,
    Baseline,
    Both,
}

/// Day-ahead clearing of a coupled gas and electricity system under wind
/// uncertainty.
#[derive(Debug, Parser)]
#[command(name = "ndcgem", version)]
#[command(group(ArgGroup::new("source").args(["scenarios", "gen_samples"])))]
struct Cli {
    /// System description (JSON).
    #[arg(long, value_name = "PATH")]
    system: PathBuf,

    /// Pre-built scenario set (JSON) instead of sampling.
    #[arg(long, value_name = "PATH", conflicts_with_all = ["gen_samples", "reduce_to"])]
    scenarios: Option<PathBuf>,

    /// Number of wind samples to draw before reduction.
    #[arg(long, value_name = "N", default_value_t = 500)]
    gen_samples: usize,

    /// Number of RT scenarios kept after fast-forward reduction.
    #[arg(long, value_name = "K", default_value_t = 10)]
    reduce_to: usize,

    /// Seed for scenario sampling.
    #[arg(long, value_name = "U64", default_value_t = 0)]
    seed: u64,

    #[arg(long, value_enum, default_value_t = Mode::Both)]
    mode: Mode,

    /// Relative MILP optimality gap.
    #[arg(long, value_name = "FLOAT", default_value_t = 1e-4)]
    mip_gap: f64,

    /// Replay the DA schedule against N fresh wind draws.
    #[arg(long, value_name = "N")]
    rt_sim: Option<usize>,

    /// Seed for the real-time draws (defaults to seed + 1).
    #[arg(long, value_name = "U64", requires = "rt_sim")]
    rt_seed: Option<u64>,

    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Write the LP of every master solve.
    #[arg(long)]
    debug_lp: bool,

    /// Write per-hour gas sub-problem diagnostics.
    #[arg(long)]
    debug_gas: bool,
}

impl Cli {
    fn config(self) -> RunConfig {
        RunConfig {
            system: self.system,
            scenarios: match self.scenarios {
                Some(p) => ScenarioSource::File(p),
                None => ScenarioSource::Generate {
                    n_samples: self.gen_samples,
                    n_reduced: self.reduce_to,
                    seed: self.seed,
                },
            },
            mode: match self.mode {
                Mode::Coordinated => RunMode::Coordinated,
                Mode::Baseline => RunMode::Baseline,
                Mode::Both => RunMode::Both,
            },
            mip_gap: self.mip_gap,
            rt_sim: self.rt_sim.map(|count| RtSim {
                count,
                seed: self.rt_seed.unwrap_or(self.seed.wrapping_add(1)),
            }),
            out_dir: self.out,
            debug_lp: self.debug_lp,
            debug_gas: self.debug_gas,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::new()
        .filter_level(log::LevelFilter::Info)
        .format_timestamp(None)
        .init();
    let cfg = Cli::parse().config();
    match run(&cfg) {
        Ok(out) => {
            for f in &out.files {
                log::info!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
