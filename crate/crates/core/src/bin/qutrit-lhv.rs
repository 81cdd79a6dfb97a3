use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qutrit_lhv::born::NoiseModel;
use qutrit_lhv::cli::{self, VcritOptions, EXIT_ACCEPTANCE_FAILURE, EXIT_SUCCESS};
use qutrit_lhv::observables::{MeasurementFamily, Sharing};
use qutrit_lhv::optimizer::{OptimizationConfig, RestartTrace};
use qutrit_lhv::states::StateSpec;
use qutrit_lhv::Result;

/// Critical visibilities of noisy three-qutrit states.
#[derive(Parser)]
#[command(name = "qutrit-lhv", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// white or product
    #[arg(long, global = true, default_value = "white")]
    noise: NoiseModel,
    /// Settings per party
    #[arg(long, global = true)]
    settings: Option<usize>,
    /// U3 or T
    #[arg(long, global = true)]
    family: Option<MeasurementFamily>,
    /// Write the main output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write the LP in fixed MPS format
    #[arg(long, global = true)]
    dump_mps: Option<PathBuf>,
    /// Recompute the visibility by bisection and compare
    #[arg(long, global = true)]
    check_bisect: bool,
    /// Recompute the visibility with the brute-force oracle and compare
    #[arg(long, global = true)]
    oracle: bool,
}

#[derive(Args, Clone)]
struct Budget {
    #[arg(long)]
    restarts: Option<usize>,
    /// Evaluations per restart
    #[arg(long)]
    evals: Option<usize>,
    /// Independent settings for each party
    #[arg(long, conflicts_with = "shared")]
    per_party: bool,
    /// One list of settings used by every party
    #[arg(long)]
    shared: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Recompute the tabulated optimal settings
    VerifyAppendix {
        /// Comma-separated case ids
        #[arg(long, value_delimiter = ',')]
        case: Vec<String>,
    },
    /// Critical visibility of one state and settings
    Vcrit {
        /// ghz:<deg>, dicke:<k>, singlet or a 27-amplitude file
        #[arg(long)]
        state: StateSpec,
        /// appendix:<id>, a JSON file or a comma-separated list
        #[arg(long)]
        params: String,
    },
    /// Minimize the critical visibility over settings
    Optimize {
        #[arg(long)]
        state: StateSpec,
        #[command(flatten)]
        budget: Budget,
    },
    /// Optimize generalized GHZ states over a grid of angles
    ScanAlpha {
        /// start:stop:step in degrees, or a comma list
        #[arg(long)]
        alpha: String,
        #[command(flatten)]
        budget: Budget,
    },
    /// Optimized visibilities of the Dicke states
    TableDicke {
        #[arg(long)]
        restarts: Option<usize>,
        /// Evaluations per restart with two settings
        #[arg(long)]
        evals2: Option<usize>,
        /// Evaluations per restart with three settings
        #[arg(long)]
        evals3: Option<usize>,
    },
    /// White-noise optimum of the singlet and its product-noise value
    SingletReport {
        #[command(flatten)]
        budget: Budget,
    },
}

fn config(g: &Global, settings: usize, budget: &Budget, default_sharing: Sharing) -> OptimizationConfig {
    let mut cfg = OptimizationConfig::new(settings, default_sharing);
    cfg.seed = g.seed;
    if let Some(r) = budget.restarts {
        cfg.restarts = r;
    }
    if let Some(e) = budget.evals {
        cfg.max_evals = e;
    }
    if budget.per_party {
        cfg.sharing = Sharing::PerParty;
    } else if budget.shared {
        cfg.sharing = Sharing::SharedAcrossParties;
    }
    cfg
}

fn emit(g: &Global, text: &str) -> Result<()> {
    match &g.out {
        Some(path) => Ok(std::fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn log_restart(t: &RestartTrace) {
    eprintln!("restart {:>3}  v = {:.6}  evals = {}", t.restart, t.v_crit, t.evals);
}

fn run(cli: Cli) -> Result<i32> {
    let g = &cli.global;
    let family = g.family.unwrap_or(MeasurementFamily::U3);
    let settings = g.settings.unwrap_or(2);
    match cli.command {
        Command::VerifyAppendix { case } => {
            let reports = cli::verify_appendix(&case)?;
            print!("{}", cli::appendix_table(&reports));
            if let Some(path) = &g.out {
                std::fs::write(path, serde_json::to_string_pretty(&reports)?)?;
            }
            Ok(if reports.iter().all(|r| r.pass) { EXIT_SUCCESS } else { EXIT_ACCEPTANCE_FAILURE })
        }
        Command::Vcrit { state, params } => {
            let choice = cli::resolve_params(&params, g.family, g.settings)?;
            let opts = VcritOptions {
                noise: g.noise,
                seed: g.seed,
                dump_mps: g.dump_mps.clone(),
                check_bisect: g.check_bisect,
                oracle: g.oracle,
            };
            let (record, _, checks) = cli::cmd_vcrit(&state, &choice, &opts)?;
            for c in &checks {
                eprintln!("{}: {:.9} (difference {:.2e})", c.method, c.v_crit, c.difference);
            }
            emit(g, &format!("{}\n", serde_json::to_string(&record)?))?;
            Ok(if checks.iter().all(|c| c.agrees) { EXIT_SUCCESS } else { EXIT_ACCEPTANCE_FAILURE })
        }
        Command::Optimize { state, budget } => {
            let cfg = config(g, settings, &budget, cli::default_sharing(&state));
            let record = cli::cmd_optimize(&state, family, settings, g.noise, &cfg, &log_restart)?;
            emit(g, &format!("{}\n", serde_json::to_string(&record)?))?;
            Ok(EXIT_SUCCESS)
        }
        Command::ScanAlpha { alpha, budget } => {
            let grid = cli::parse_alpha_grid(&alpha)?;
            let cfg = config(g, settings, &budget, Sharing::SharedAcrossParties);
            let progress = |a: f64, t: &RestartTrace| {
                eprintln!("alpha {a:>7.3}  restart {:>3}  v = {:.6}", t.restart, t.v_crit);
            };
            let (rows, csv) = cli::cmd_scan(&grid, family, settings, g.noise, &cfg, &progress)?;
            emit(g, &csv)?;
            for r in rows.iter().filter(|r| r.error.is_some()) {
                eprintln!("alpha {}: {}", r.alpha_deg, r.error.as_deref().unwrap_or_default());
            }
            Ok(EXIT_SUCCESS)
        }
        Command::TableDicke { restarts, evals2, evals3 } => {
            let mut cfg2 = OptimizationConfig::new(2, Sharing::SharedAcrossParties);
            let mut cfg3 = OptimizationConfig::new(3, Sharing::SharedAcrossParties);
            for (cfg, evals) in [(&mut cfg2, evals2), (&mut cfg3, evals3)] {
                cfg.seed = g.seed;
                if let Some(r) = restarts {
                    cfg.restarts = r;
                }
                if let Some(e) = evals {
                    cfg.max_evals = e;
                }
            }
            let progress = |label: &str, t: &RestartTrace| {
                eprintln!("{label}  restart {:>3}  v = {:.6}", t.restart, t.v_crit);
            };
            let (_, csv) = cli::cmd_table_dicke(&cfg2, &cfg3, &progress)?;
            emit(g, &csv)?;
            Ok(EXIT_SUCCESS)
        }
        Command::SingletReport { budget } => {
            let cfg = config(g, settings, &budget, cli::default_sharing(&StateSpec::Singlet));
            let report = cli::singlet_report(family, settings, &cfg, &log_restart)?;
            emit(g, &format!("{}\n", serde_json::to_string_pretty(&report)?))?;
            Ok(EXIT_SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
