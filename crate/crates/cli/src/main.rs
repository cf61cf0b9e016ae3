use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hardylim_cli::{summarize, Overrides, RunConfig, Suite, EXIT_CONFIG, EXIT_RUNTIME};

/// Numerical experiments on Brownian exits and boundary limits of harmonic functions.
#[derive(Debug, Parser)]
#[command(name = "hardylim", version)]
struct Cli {
    /// Config file of `key=value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Number of Monte Carlo paths.
    #[arg(long, global = true, value_name = "N")]
    paths: Option<usize>,
    /// Time step of discretized paths.
    #[arg(long, global = true, value_name = "X")]
    dt: Option<f64>,
    /// Radius schedule: paper-133, paper-step10 or conservative-min.
    #[arg(long, global = true, value_name = "NAME")]
    variant: Option<String>,
    #[arg(long = "q-max", global = true, value_name = "N")]
    q_max: Option<u32>,
    /// Worker threads; outputs do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sphere areas and ball volumes, closed form against quadrature.
    Constants,
    /// Poisson kernel mass, Poisson extension and the mean value property.
    Harmonic,
    /// Exit distributions of both exit engines.
    ExitDist,
    /// Running maximum of one-dimensional paths.
    Reflection,
    /// The tightness table and exit-time tails.
    Tightness,
    /// Exit times under Brownian scaling.
    Scaling,
    /// Exit times from nearby radii.
    Continuity,
    /// The convex function, the maximal inequality and the monotone integrals.
    Martingale,
    /// Boundary limits along Brownian paths.
    HardyLimit,
    /// Collect the verdicts in the output directory into summary.json.
    Report {
        /// Run every suite first.
        #[arg(long)]
        run: bool,
    },
}

fn code(n: usize) -> ExitCode {
    ExitCode::from(n.min(63) as u8)
}

fn run_suite(suite: Suite, cfg: &RunConfig) -> Result<bool, ExitCode> {
    let out = suite.run(cfg).map_err(|e| {
        eprintln!("hardylim {suite}: {e}");
        ExitCode::from(EXIT_RUNTIME as u8)
    })?;
    out.write(&cfg.out_dir).map_err(|e| {
        eprintln!("hardylim {suite}: writing {}: {e}", cfg.out_dir.display());
        ExitCode::from(EXIT_RUNTIME as u8)
    })?;
    print!("{}", out.summary());
    Ok(out.verdict.pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let overrides = Overrides {
        seed: cli.seed,
        out_dir: cli.out.clone(),
        n_paths: cli.paths,
        dt: cli.dt,
        variant: cli.variant.clone(),
        q_max: cli.q_max,
    };
    let cfg = match RunConfig::load(cli.config.as_deref(), &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("hardylim: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 || rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            eprintln!("hardylim: cannot start {n} worker threads");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    }
    let suite = match cli.command {
        Command::Constants => Suite::Constants,
        Command::Harmonic => Suite::Harmonic,
        Command::ExitDist => Suite::ExitDist,
        Command::Reflection => Suite::Reflection,
        Command::Tightness => Suite::Tightness,
        Command::Scaling => Suite::Scaling,
        Command::Continuity => Suite::Continuity,
        Command::Martingale => Suite::Martingale,
        Command::HardyLimit => Suite::HardyLimit,
        Command::Report { run } => {
            if run {
                for s in Suite::ALL {
                    if let Err(c) = run_suite(s, &cfg) {
                        return c;
                    }
                }
            }
            let summary = summarize(&cfg.out_dir);
            let path = cfg.out_dir.join("summary.json");
            if let Err(e) = std::fs::create_dir_all(&cfg.out_dir).and_then(|_| std::fs::write(&path, summary.to_json()))
            {
                eprintln!("hardylim report: writing {}: {e}", path.display());
                return ExitCode::from(EXIT_RUNTIME as u8);
            }
            for e in &summary.suites {
                println!("{:<12} {}", e.suite, e.status);
            }
            println!("{} of {} suites failed", summary.failed_suites, summary.suites.len());
            return code(summary.failed_suites);
        }
    };
    match run_suite(suite, &cfg) {
        Ok(pass) => code(usize::from(!pass)),
        Err(c) => c,
    }
}
