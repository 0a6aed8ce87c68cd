use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use robust_nav::experiment::{
    evaluate_dir, export_run, initial_belief, load_or_simulate, prepare_streams, render_rows, run_experiment, train,
    write_learn_report, ExperimentConfig, ExperimentError, ValidationKind,
};
use robust_nav::filter::NavModel;
use robust_nav::sim::save_log;

/// Robust EKF navigation experiments.
#[derive(Parser)]
#[command(name = "rnav", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a flight and write imu.csv, fix.csv and truth.csv.
    Simulate(Overrides),
    /// Learn the tolerance on the training phase and write learn.csv.
    Learn(Overrides),
    /// Full training plus validation; writes trajectories and reports.
    Run(Overrides),
    /// Recompute report rows from stored trajectories.
    Eval {
        /// Run directory, or a directory of run directories.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Overrides {
    /// TOML experiment configuration; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Replaces the configured seeds; repeat for several.
    #[arg(long)]
    seed: Vec<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    grid_min: Option<f64>,
    #[arg(long)]
    grid_max: Option<f64>,
    #[arg(long)]
    grid_size: Option<usize>,
    /// Training denial length (s).
    #[arg(long)]
    train_denial: Option<f64>,
    /// Validation denial length (s).
    #[arg(long)]
    val_denial: Option<f64>,
    /// straight | turn
    #[arg(long)]
    val_type: Option<ValidationKind>,
}

impl Overrides {
    fn resolve(&self) -> Result<ExperimentConfig, ExperimentError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if !self.seed.is_empty() {
            cfg.seeds = self.seed.clone();
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(v) = self.grid_min {
            cfg.grid.min = v;
        }
        if let Some(v) = self.grid_max {
            cfg.grid.max = v;
        }
        if let Some(v) = self.grid_size {
            cfg.grid.size = v;
        }
        if let Some(v) = self.train_denial {
            cfg.training.denial_duration = v;
        }
        if let Some(v) = self.val_denial {
            cfg.validation.denial_duration = v;
        }
        if let Some(v) = self.val_type {
            cfg.validation.kind = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn seed_dir(cfg: &ExperimentConfig, seed: u64) -> PathBuf {
    if cfg.seeds.len() == 1 {
        cfg.output_dir.clone()
    } else {
        cfg.output_dir.join(format!("seed_{seed}"))
    }
}

fn simulate(cfg: &ExperimentConfig) -> Result<(), ExperimentError> {
    for &seed in &cfg.seeds {
        let dir = seed_dir(cfg, seed);
        let log = load_or_simulate(cfg, seed)?;
        save_log(&log, &dir)?;
        println!("seed {seed}: {} IMU samples, {} fixes -> {}", log.imu.len(), log.fixes.len(), dir.display());
    }
    Ok(())
}

fn learn(cfg: &ExperimentConfig) -> Result<(), ExperimentError> {
    let model = NavModel::new(cfg.noise.clone(), cfg.jacobians)?;
    for &seed in &cfg.seeds {
        let streams = prepare_streams(cfg, load_or_simulate(cfg, seed)?)?;
        let init = initial_belief(cfg, &model, &streams.flight)?;
        let outcome = train(cfg, &model, &streams, &init)?;
        let dir = seed_dir(cfg, seed);
        write_learn_report(&outcome.report, &dir)?;
        println!("seed {seed}: c_hat = {} over N = {} steps", outcome.report.c_hat, outcome.report.n);
    }
    Ok(())
}

fn run(cfg: &ExperimentConfig) -> Result<(), ExperimentError> {
    let report = if cfg.seeds.len() == 1 {
        // single run: artifacts go straight into the output directory
        let report = run_experiment(cfg, None)?;
        export_run(&report.runs[0], &cfg.output_dir)?;
        report
    } else {
        run_experiment(cfg, Some(&cfg.output_dir))?
    };
    print!("{}", report.render());
    Ok(())
}

fn eval(dir: &Path) -> Result<(), ExperimentError> {
    print!("{}", render_rows(&evaluate_dir(dir)?));
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Simulate(o) => o.resolve().and_then(|cfg| simulate(&cfg)),
        Command::Learn(o) => o.resolve().and_then(|cfg| learn(&cfg)),
        Command::Run(o) => o.resolve().and_then(|cfg| run(&cfg)),
        Command::Eval { out } => eval(out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(if err.is_numerical() { 2 } else { 1 })
        }
    }
}
