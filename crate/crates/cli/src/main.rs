use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use drmoo_cli::data::{self, ToyOptions};
use drmoo_cli::{load_config, plot, presets, run};
use drmoo_core::check::{run_checks, CheckOptions};

#[derive(Parser)]
#[command(name = "drmoo", version, about = "Distributionally robust multi-objective optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every block of a config file or shipped preset.
    Run {
        /// Path to a config file, or a preset name.
        config: String,
    },
    /// Write the synthetic linear instance as CSV.
    GenData { seed: u64, out: PathBuf },
    /// Nominal and robust Pareto frontiers of the bi-objective toy problem.
    ParetoToy {
        #[arg(long, default_value_t = 0.5)]
        std: f64,
        #[arg(long, default_value_t = 200)]
        draws: usize,
        #[arg(long, default_value_t = 401)]
        grid: usize,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "runs/pareto_toy")]
        out: PathBuf,
    },
    /// Numerical invariant suite.
    Check {
        /// Flip the sign of the dual gradient; the suite must fail.
        #[arg(long)]
        self_test: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Log-scale plot of one trace column.
    Plot {
        metric: String,
        out: PathBuf,
        #[arg(required = true)]
        traces: Vec<PathBuf>,
    },
    /// List shipped presets.
    Presets,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cmd: Command) -> anyhow::Result<ExitCode> {
    match cmd {
        Command::Run { config } => {
            let cfg = load_config(&config).with_context(|| format!("loading {config}"))?;
            let report = run::run_experiment(&cfg)?;
            for r in &report.runs {
                println!(
                    "{:<16} {:<12} ok {}/{}  initial{w} {:.4e}  final{w} {:.4e} +- {:.2e}  {}",
                    r.run,
                    r.solver,
                    r.ok(),
                    r.outcomes.len(),
                    r.initial_mean,
                    r.final_mean,
                    r.final_std,
                    r.status(),
                    w = run::WINDOW,
                );
            }
            for p in &report.summary_paths {
                println!("summary: {}", p.display());
            }
        }
        Command::GenData { seed, out } => {
            data::write_linear_csv(seed, &out)?;
            println!("wrote {}", out.display());
        }
        Command::ParetoToy {
            std,
            draws,
            grid,
            lambda,
            seed,
            out,
        } => {
            let opts = ToyOptions {
                std,
                draws,
                grid,
                lambda,
                seed,
                ..ToyOptions::default()
            };
            let (fronts, files) = data::write_toy(&opts, &out)?;
            println!(
                "nominal frontier: {} points, robust frontier: {} points",
                fronts.nominal.len(),
                fronts.robust.len()
            );
            for f in files {
                println!("wrote {}", f.display());
            }
        }
        Command::Check { self_test, seed } => {
            let results = run_checks(&CheckOptions {
                inject_grad_eta_sign_bug: self_test,
                seed,
            });
            for r in &results {
                println!("{r}");
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            println!("{} checks, {failed} failed", results.len());
            if failed > 0 {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Plot { metric, out, traces } => {
            plot::emit_svg_plot(&traces, &metric, &out)?;
            println!("wrote {}", out.display());
        }
        Command::Presets => {
            for name in presets::names() {
                println!("{name}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
