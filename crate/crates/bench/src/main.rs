use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::warn;
use phmor::Prop1Status;
use phmor_bench::config::{BoundKind, ExperimentConfig, ModelSpec, SolverChoice};
use phmor_bench::experiment::deviation_table;
use phmor_bench::manifest::read_model;
use phmor_bench::mtx::dense_limit_from_env;
use phmor_bench::{load_config, run_experiment, run_prop1, write_artifacts, write_matrices, write_prop1, BenchError};

/// Error bounds for port-Hamiltonian reduced-order models.
#[derive(Parser)]
#[command(name = "phmor", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the bound comparison and write CSV files plus manifest.json.
    Run(RunArgs),
    /// Check that the ALP and hierarchical bounds coincide.
    Prop1(RunArgs),
    /// Check the structure of a model given by a role manifest.
    Validate { manifest: PathBuf },
    /// Write the configured mass-spring-damper chain as MatrixMarket files.
    Gen {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// oracle or midpoint
    #[arg(long)]
    fom_solver: Option<String>,
    /// Comma-separated subset of standard,alp,hier
    #[arg(long)]
    bounds: Option<String>,
    #[arg(long)]
    prop1_tol: Option<f64>,
}

fn config_from(path: Option<&PathBuf>) -> Result<ExperimentConfig, BenchError> {
    match path {
        Some(p) => load_config(p),
        None => Ok(ExperimentConfig::default()),
    }
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig, BenchError> {
        let mut cfg = config_from(self.config.as_ref())?;
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(s) = &self.fom_solver {
            cfg.fom_solver =
                SolverChoice::parse(s).ok_or_else(|| BenchError::Config(format!("unknown FOM solver '{s}'")))?;
        }
        if let Some(list) = &self.bounds {
            cfg.bounds = list
                .split(',')
                .map(|b| BoundKind::parse(b).ok_or_else(|| BenchError::Config(format!("unknown bound '{b}'"))))
                .collect::<Result<_, _>>()?;
        }
        if let Some(tol) = self.prop1_tol {
            cfg.tolerances.prop1 = tol;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn out_dir(cfg: &ExperimentConfig) -> PathBuf {
        cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

fn run(args: &RunArgs) -> Result<(), BenchError> {
    let cfg = args.config()?;
    let res = run_experiment(&cfg)?;
    for b in &res.bounds {
        println!(
            "{:<9} max {:.6e}  effectivity max {:.4} min {:.6}",
            b.kind.name(),
            b.series.max(),
            b.effectivity.max,
            b.effectivity.min
        );
    }
    let art = write_artifacts(&res, &RunArgs::out_dir(&cfg))?;
    println!("wrote {}", art.dir.display());
    Ok(())
}

fn prop1(args: &RunArgs) -> Result<(), BenchError> {
    let cfg = args.config()?;
    let outcome = run_prop1(&cfg)?;
    for case in &outcome.cases {
        println!("{}", deviation_table(case, &outcome.grid, 11));
        if case.negative_control && case.report.status == Prop1Status::PreconditionUnmet {
            warn!(
                "{}: equivalence hypotheses not met, deviation {:.3e} reported only",
                case.label(),
                case.report.relative_deviation
            );
        }
    }
    write_prop1(&outcome, &RunArgs::out_dir(&cfg))?;
    match outcome.violation() {
        Some(c) => Err(BenchError::Prop1Violated {
            deviation: c.report.relative_deviation,
            tol: c.report.tol,
        }),
        None => Ok(()),
    }
}

fn validate(manifest: &Path) -> Result<(), BenchError> {
    let raw = read_model(manifest, dense_limit_from_env())?;
    let tol = ExperimentConfig::default().tolerances.core();
    let report = raw.validate(&tol)?;
    for c in &report.checks {
        let mark = if c.passed { "ok  " } else { "FAIL" };
        println!(
            "{mark} {:<18} residual {:.3e} threshold {:.3e}",
            c.name, c.residual, c.threshold
        );
    }
    let model = raw.into_model(tol)?;
    println!("order {} inputs {}", model.system.dim(), model.system.n_inputs());
    Ok(())
}

fn gen(config: Option<&PathBuf>, out: &Path) -> Result<(), BenchError> {
    let cfg = config_from(config)?;
    let ModelSpec::MsdChain(_) = &cfg.model else {
        return Err(BenchError::Config("gen needs an msd_chain model".into()));
    };
    let sys = phmor_bench::experiment::build_model(&cfg, dense_limit_from_env())?;
    let path = write_matrices(&sys, out)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::Prop1(args) => prop1(args),
        Command::Validate { manifest } => validate(manifest),
        Command::Gen { config, out } => gen(config.as_ref(), out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
