use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use softsched::harness::{
    render_table_csv, write_detail, write_results, BetaSweep, Experiment, ExperimentConfig, Mode, SolverKind,
};

/// Monte-Carlo comparison of soft-coloring, greedy-coloring and unscheduled
/// TDMA link schedules.
#[derive(Debug, Parser)]
#[command(name = "softsched", version)]
struct Cli {
    /// Base configuration (TOML, or JSON with a .json extension); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long)]
    nodes: Option<usize>,

    #[arg(long)]
    sessions: Option<usize>,

    /// Smallest interference margin in dB.
    #[arg(long, allow_hyphen_values = true)]
    beta_min: Option<f64>,

    /// Largest interference margin in dB (inclusive).
    #[arg(long, allow_hyphen_values = true)]
    beta_max: Option<f64>,

    #[arg(long)]
    beta_step: Option<f64>,

    /// Path-loss exponent [default: 4]
    #[arg(long)]
    alpha: Option<f64>,

    /// Mean packets per session [default: 5]
    #[arg(long)]
    poisson_mean: Option<f64>,

    /// Independent replications [default: 1000]
    #[arg(long)]
    runs: Option<u64>,

    #[arg(long)]
    seed: Option<u64>,

    /// Game solver: fp or exact [default: fp]
    #[arg(long)]
    solver: Option<SolverKind>,

    /// Fictitious-play convergence gap [default: 0.001]
    #[arg(long)]
    delta: Option<f64>,

    /// Fictitious-play iteration budget [default: 1000000]
    #[arg(long)]
    max_iters: Option<u64>,

    /// Comma-separated subset of soft,coloring,none
    #[arg(long, value_delimiter = ',')]
    modes: Option<Vec<Mode>>,

    /// Topology or conflict-graph fixture (JSON) used instead of random instances.
    #[arg(long)]
    fixture: Option<PathBuf>,

    /// Aggregated CSV output; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Per-run CSV output.
    #[arg(long)]
    detail: Option<PathBuf>,
}

impl Cli {
    fn config(&self) -> softsched::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::read(path)?,
            None => ExperimentConfig::default(),
        };
        let sweep: &mut BetaSweep = &mut cfg.beta_sweep;
        if let Some(v) = self.beta_min {
            sweep.min_db = v;
        }
        if let Some(v) = self.beta_max {
            sweep.max_db = v;
        }
        if let Some(v) = self.beta_step {
            sweep.step_db = v;
        }
        macro_rules! overlay {
            ($($flag:ident => $field:ident),* $(,)?) => {
                $(if let Some(v) = self.$flag.clone() { cfg.$field = v; })*
            };
        }
        overlay!(
            nodes => n_nodes,
            sessions => n_sessions,
            alpha => alpha,
            poisson_mean => poisson_mean,
            runs => runs,
            seed => seed,
            solver => solver,
            delta => delta,
            max_iters => max_iterations,
            modes => modes,
        );
        if self.fixture.is_some() {
            cfg.fixture = self.fixture.clone();
        }
        Ok(cfg)
    }
}

fn run(cli: &Cli) -> softsched::Result<()> {
    let experiment = Experiment::new(cli.config()?)?;
    let output = experiment.run_sweep()?;
    match &cli.out {
        Some(path) => write_results(&output.table, path)?,
        None => print!("{}", render_table_csv(&output.table)),
    }
    if let Some(path) = &cli.detail {
        write_detail(&output.records, path)?;
    }
    let unconverged = output.records.iter().filter(|r| r.converged == Some(false)).count();
    if unconverged > 0 {
        eprintln!("warning: {unconverged} soft schedules used an unconverged game solution");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
