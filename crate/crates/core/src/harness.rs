//! Monte-Carlo experiment runner: random instances, interference-margin
//! sweeps, per-mode slot counts, and aggregated CSV tables.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coloring::{coloring_slots, default_order, greedy_color, no_schedule_slots};
use crate::components::DEFAULT_COMPONENT_CAP;
use crate::conflict::{build_conflict_graph, ConflictFixture, ConflictGraph, ConflictParams};
use crate::game::{soft_schedule, OracleConfig, Solver, SolverConfig};
use crate::topology::{
    generate_nodes_with, sample_sessions, PropagationParams, RateVector, RoutedNetwork, TopologyFixture,
};
use crate::{Error, Result};

pub const TABLE_HEADER: &str =
    "n_nodes,n_sessions,beta_db,mode,runs,mean_avg_slots_per_packet,stderr,mean_gain_vs_coloring";

pub const DETAIL_HEADER: &str = "n_nodes,n_sessions,alpha,poisson_mean,seed,solver,run_id,mode,beta_db,n_links,\
n_components,total_packets,total_link_activations,slots,avg_slots_per_packet,game_value_lower,game_value_upper,\
fp_iterations,converged";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Soft coloring from the matrix game.
    Soft,
    /// Greedy partial-topology coloring.
    Coloring,
    /// One link activation per slot.
    None,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Soft, Mode::Coloring, Mode::None];

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Soft => "soft",
            Mode::Coloring => "coloring",
            Mode::None => "none",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "soft" => Ok(Mode::Soft),
            "coloring" => Ok(Mode::Coloring),
            "none" => Ok(Mode::None),
            other => Err(Error::invalid(format!(
                "unknown mode {other:?}; expected soft, coloring or none"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    #[default]
    Fp,
    Exact,
}

impl SolverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::Fp => "fp",
            SolverKind::Exact => "exact",
        }
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "fp" => Ok(SolverKind::Fp),
            "exact" => Ok(SolverKind::Exact),
            other => Err(Error::invalid(format!(
                "unknown solver {other:?}; expected fp or exact"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaSweep {
    pub min_db: f64,
    pub max_db: f64,
    pub step_db: f64,
}

impl Default for BetaSweep {
    fn default() -> Self {
        BetaSweep {
            min_db: 0.0,
            max_db: 30.0,
            step_db: 5.0,
        }
    }
}

impl BetaSweep {
    pub fn single(beta_db: f64) -> Self {
        BetaSweep {
            min_db: beta_db,
            max_db: beta_db,
            step_db: 1.0,
        }
    }

    /// Margins from `min_db` to `max_db` inclusive.
    pub fn values(&self) -> Vec<f64> {
        let span = (self.max_db - self.min_db) / self.step_db;
        let count = (span + 1e-9).floor() as usize + 1;
        (0..count).map(|k| self.min_db + k as f64 * self.step_db).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_nodes: usize,
    pub n_sessions: usize,
    pub beta_sweep: BetaSweep,
    pub alpha: f64,
    pub poisson_mean: f64,
    pub runs: u64,
    pub seed: u64,
    pub solver: SolverKind,
    pub delta: f64,
    pub max_iterations: u64,
    pub modes: Vec<Mode>,
    pub component_cap: usize,
    /// Fixed topology or conflict-graph file used instead of random instances.
    pub fixture: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let fp = SolverConfig::default();
        ExperimentConfig {
            n_nodes: 10,
            n_sessions: 10,
            beta_sweep: BetaSweep::default(),
            alpha: crate::topology::DEFAULT_ALPHA,
            poisson_mean: 5.0,
            runs: 1000,
            seed: 1,
            solver: SolverKind::Fp,
            delta: fp.delta,
            max_iterations: fp.max_iterations,
            modes: Mode::ALL.to_vec(),
            component_cap: DEFAULT_COMPONENT_CAP,
            fixture: None,
        }
    }
}

impl ExperimentConfig {
    /// Reads a TOML file, or JSON when the extension is `.json`.
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            message,
        };
        let cfg: ExperimentConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| parse_err(e.to_string()))?
        } else {
            toml::from_str(&text).map_err(|e| parse_err(e.to_string()))?
        };
        Ok(cfg)
    }

    /// Parses a JSON document; fields left out keep their defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("experiment config: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::invalid("runs must be at least 1"));
        }
        let sweep = &self.beta_sweep;
        if !(sweep.step_db.is_finite() && sweep.step_db > 0.0) {
            return Err(Error::invalid(format!(
                "beta step must be positive, got {}",
                sweep.step_db
            )));
        }
        if !(sweep.min_db.is_finite() && sweep.max_db.is_finite()) || sweep.max_db < sweep.min_db {
            return Err(Error::invalid(format!(
                "beta range [{}, {}] is empty or not finite",
                sweep.min_db, sweep.max_db
            )));
        }
        if self.modes.is_empty() {
            return Err(Error::invalid("at least one mode is required"));
        }
        PropagationParams::with_alpha(self.alpha)?;
        self.solver()?;
        if self.fixture.is_none() {
            if self.n_sessions == 0 {
                return Err(Error::invalid("n_sessions must be at least 1"));
            }
            if self.n_nodes < 2 {
                return Err(Error::invalid("at least two nodes are needed to form a session"));
            }
            let pairs = self.n_nodes * (self.n_nodes - 1);
            if self.n_sessions > pairs {
                return Err(Error::invalid(format!(
                    "{} sessions requested but {} nodes only have {pairs} source-sink pairs",
                    self.n_sessions, self.n_nodes
                )));
            }
            if !(self.poisson_mean.is_finite() && self.poisson_mean > 0.0) {
                return Err(Error::invalid(format!(
                    "poisson mean must be positive, got {}",
                    self.poisson_mean
                )));
            }
        }
        Ok(())
    }

    pub fn solver(&self) -> Result<Solver> {
        Ok(match self.solver {
            SolverKind::Fp => {
                let cfg = SolverConfig {
                    delta: self.delta,
                    max_iterations: self.max_iterations,
                };
                cfg.validate()?;
                Solver::FictitiousPlay(cfg)
            }
            SolverKind::Exact => Solver::Exact(OracleConfig::default()),
        })
    }

    pub fn propagation(&self) -> PropagationParams {
        PropagationParams {
            alpha: self.alpha,
            ..PropagationParams::default()
        }
    }
}

/// A fixed instance loaded from disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Fixture {
    Topology(TopologyFixture),
    Conflict(ConflictFixture),
}

impl Fixture {
    pub fn from_json(text: &str) -> Result<Self> {
        let fixture: Fixture = serde_json::from_str(text).map_err(|e| {
            Error::invalid(format!(
                "fixture is neither a topology (nodes, sessions) nor a conflict graph (n_links, conflicts, rates): {e}"
            ))
        })?;
        match &fixture {
            Fixture::Topology(t) => t.validate()?,
            Fixture::Conflict(c) => {
                c.graph()?;
                if c.rates.is_none() {
                    return Err(Error::invalid("conflict-graph fixture needs link rates"));
                }
            }
        }
        Ok(fixture)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

/// One (run, margin, mode) measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub n_nodes: usize,
    pub n_sessions: usize,
    pub alpha: f64,
    pub poisson_mean: f64,
    pub seed: u64,
    pub solver: SolverKind,
    pub run_id: u64,
    pub mode: Mode,
    pub beta_db: f64,
    pub n_links: usize,
    pub n_components: Option<usize>,
    pub total_packets: u64,
    pub total_link_activations: u64,
    pub slots: u64,
    pub avg_slots_per_packet: f64,
    pub game_value_lower: Option<f64>,
    pub game_value_upper: Option<f64>,
    pub fp_iterations: Option<u64>,
    pub converged: Option<bool>,
}

/// Margin-independent part of one replication.
enum Instance {
    Network(RoutedNetwork),
    /// Conflict-graph fixture: no geometry, every activation counts as one packet.
    Graph {
        g: ConflictGraph,
        rates: RateVector,
    },
}

impl Instance {
    fn rates(&self) -> &RateVector {
        match self {
            Instance::Network(n) => &n.rates,
            Instance::Graph { rates, .. } => rates,
        }
    }

    fn total_packets(&self) -> u64 {
        match self {
            Instance::Network(n) => n.total_packets(),
            Instance::Graph { rates, .. } => rates.total(),
        }
    }

    fn conflict_graph(&self, beta_db: f64, propagation: PropagationParams) -> Result<ConflictGraph> {
        match self {
            Instance::Network(n) => {
                let params = ConflictParams::new(beta_db, propagation)?;
                build_conflict_graph(&n.links, &n.nodes, &params)
            }
            Instance::Graph { g, .. } => Ok(g.clone()),
        }
    }
}

/// A validated configuration with its fixture (if any) loaded.
#[derive(Debug, Clone)]
pub struct Experiment {
    cfg: ExperimentConfig,
    fixture: Option<Fixture>,
    solver: Solver,
}

impl Experiment {
    pub fn new(cfg: ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let fixture = cfg.fixture.as_deref().map(Fixture::read).transpose()?;
        Self::assemble(cfg, fixture)
    }

    /// Uses an in-memory fixture instead of `cfg.fixture`.
    pub fn with_fixture(mut cfg: ExperimentConfig, fixture: Fixture) -> Result<Self> {
        cfg.fixture = None;
        cfg.validate()?;
        Self::assemble(cfg, Some(fixture))
    }

    fn assemble(mut cfg: ExperimentConfig, fixture: Option<Fixture>) -> Result<Self> {
        let solver = cfg.solver()?;
        // Output rows describe the instance actually simulated; a bare
        // conflict graph has no nodes or sessions.
        match &fixture {
            Some(Fixture::Topology(t)) => {
                cfg.n_nodes = t.nodes.len();
                cfg.n_sessions = t.sessions.len();
            }
            Some(Fixture::Conflict(_)) => {
                cfg.n_nodes = 0;
                cfg.n_sessions = 0;
            }
            None => {}
        }
        Ok(Experiment { cfg, fixture, solver })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    fn instance(&self, run_id: u64) -> Result<Instance> {
        let propagation = self.cfg.propagation();
        match &self.fixture {
            Some(Fixture::Topology(t)) => Ok(Instance::Network(RoutedNetwork::build(
                t.nodes.clone(),
                t.sessions.clone(),
                &propagation,
            )?)),
            Some(Fixture::Conflict(c)) => Ok(Instance::Graph {
                g: c.graph()?,
                rates: c.rates.clone().expect("validated fixture has rates"),
            }),
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
                rng.set_stream(run_id);
                let nodes = generate_nodes_with(&mut rng, self.cfg.n_nodes)?;
                let sessions = sample_sessions(&mut rng, self.cfg.n_nodes, self.cfg.n_sessions, self.cfg.poisson_mean)?;
                Ok(Instance::Network(RoutedNetwork::build(nodes, sessions, &propagation)?))
            }
        }
    }

    /// Records for every margin in the sweep and every requested mode.
    pub fn run_instance(&self, run_id: u64) -> Result<Vec<ResultRecord>> {
        let context = |beta_db: f64| {
            move |e: Error| Error::Instance {
                run_id,
                beta_db,
                source: Box::new(e),
            }
        };
        let betas = self.cfg.beta_sweep.values();
        let instance = self.instance(run_id).map_err(context(betas[0]))?;
        let mut out = Vec::with_capacity(betas.len() * self.cfg.modes.len());
        for beta_db in betas {
            let records = self.measure(&instance, run_id, beta_db).map_err(context(beta_db))?;
            out.extend(records);
        }
        Ok(out)
    }

    fn measure(&self, instance: &Instance, run_id: u64, beta_db: f64) -> Result<Vec<ResultRecord>> {
        let cfg = &self.cfg;
        let rates = instance.rates();
        let g = instance.conflict_graph(beta_db, cfg.propagation())?;
        let total_packets = instance.total_packets();
        let total_link_activations = rates.total();

        let mut out = Vec::new();
        for &mode in &cfg.modes {
            let mut rec = ResultRecord {
                n_nodes: cfg.n_nodes,
                n_sessions: cfg.n_sessions,
                alpha: cfg.alpha,
                poisson_mean: cfg.poisson_mean,
                seed: cfg.seed,
                solver: cfg.solver,
                run_id,
                mode,
                beta_db,
                n_links: rates.len(),
                n_components: None,
                total_packets,
                total_link_activations,
                slots: 0,
                avg_slots_per_packet: 0.0,
                game_value_lower: None,
                game_value_upper: None,
                fp_iterations: None,
                converged: None,
            };
            match mode {
                Mode::Soft => {
                    let soft = soft_schedule(&g, rates, &self.solver, cfg.component_cap)?;
                    rec.slots = soft.schedule.length() as u64;
                    rec.n_components = Some(soft.components.len());
                    rec.game_value_lower = Some(soft.solution.value_lower);
                    rec.game_value_upper = Some(soft.solution.value_upper);
                    rec.fp_iterations = Some(soft.solution.iterations);
                    rec.converged = Some(soft.solution.converged);
                }
                Mode::Coloring => {
                    let coloring = greedy_color(&g, &default_order(g.n_links()))?;
                    rec.slots = coloring_slots(&coloring, rates);
                }
                Mode::None => rec.slots = no_schedule_slots(rates),
            }
            rec.avg_slots_per_packet = if total_packets == 0 {
                0.0
            } else {
                rec.slots as f64 / total_packets as f64
            };
            out.push(rec);
        }
        Ok(out)
    }

    /// All replications, run in parallel and returned in run order.
    pub fn run_all(&self) -> Result<Vec<ResultRecord>> {
        let per_run: Vec<Vec<ResultRecord>> = (0..self.cfg.runs)
            .into_par_iter()
            .map(|run_id| self.run_instance(run_id))
            .collect::<Result<_>>()?;
        Ok(per_run.into_iter().flatten().collect())
    }

    pub fn run_sweep(&self) -> Result<SweepOutput> {
        let records = self.run_all()?;
        let table = aggregate(&self.cfg, &records);
        Ok(SweepOutput { table, records })
    }
}

pub fn run_instance(cfg: &ExperimentConfig, run_id: u64) -> Result<Vec<ResultRecord>> {
    Experiment::new(cfg.clone())?.run_instance(run_id)
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    Experiment::new(cfg.clone())?.run_sweep()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub n_nodes: usize,
    pub n_sessions: usize,
    pub beta_db: f64,
    pub mode: Mode,
    pub runs: u64,
    pub mean_avg_slots_per_packet: f64,
    pub stderr: f64,
    /// Mean over runs of `1 - slots / coloring_slots`; absent when the
    /// coloring mode was not run.
    pub mean_gain_vs_coloring: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<AggregateRow>,
}

impl SweepTable {
    pub fn row(&self, beta_db: f64, mode: Mode) -> Option<&AggregateRow> {
        self.rows.iter().find(|r| r.beta_db == beta_db && r.mode == mode)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub table: SweepTable,
    pub records: Vec<ResultRecord>,
}

/// Mean and standard error per (margin, mode), in sweep order. Records must
/// come from [`Experiment::run_all`] for `cfg`.
pub fn aggregate(cfg: &ExperimentConfig, records: &[ResultRecord]) -> SweepTable {
    let mut rows = Vec::new();
    for beta_db in cfg.beta_sweep.values() {
        let at_beta: Vec<&ResultRecord> = records.iter().filter(|r| r.beta_db == beta_db).collect();
        let coloring: Vec<&ResultRecord> = at_beta.iter().copied().filter(|r| r.mode == Mode::Coloring).collect();
        for &mode in &cfg.modes {
            let mine: Vec<&ResultRecord> = at_beta.iter().copied().filter(|r| r.mode == mode).collect();
            let values: Vec<f64> = mine.iter().map(|r| r.avg_slots_per_packet).collect();
            let (mean, stderr) = mean_and_stderr(&values);
            let gain = (!coloring.is_empty()).then(|| {
                let gains: Vec<f64> = mine
                    .iter()
                    .zip(&coloring)
                    .map(|(m, c)| {
                        debug_assert_eq!(m.run_id, c.run_id);
                        1.0 - m.slots as f64 / c.slots as f64
                    })
                    .collect();
                mean_and_stderr(&gains).0
            });
            rows.push(AggregateRow {
                n_nodes: cfg.n_nodes,
                n_sessions: cfg.n_sessions,
                beta_db,
                mode,
                runs: values.len() as u64,
                mean_avg_slots_per_packet: mean,
                stderr,
                mean_gain_vs_coloring: gain,
            });
        }
    }
    SweepTable { rows }
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// `%.9g`-style rendering: nine significant digits, trailing zeros dropped,
/// exponent form outside `1e-5 ..= 1e9`.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_fraction(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_fraction(mantissa.to_string()))
    }
}

fn trim_fraction(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

pub fn render_table_csv(table: &SweepTable) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.n_nodes,
            r.n_sessions,
            format_sig9(r.beta_db),
            r.mode,
            r.runs,
            format_sig9(r.mean_avg_slots_per_packet),
            format_sig9(r.stderr),
            opt(r.mean_gain_vs_coloring, format_sig9),
        );
    }
    out
}

pub fn render_detail_csv(records: &[ResultRecord]) -> String {
    let mut out = String::from(DETAIL_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n_nodes,
            r.n_sessions,
            format_sig9(r.alpha),
            format_sig9(r.poisson_mean),
            r.seed,
            r.solver.as_str(),
            r.run_id,
            r.mode,
            format_sig9(r.beta_db),
            r.n_links,
            opt(r.n_components, |v| v.to_string()),
            r.total_packets,
            r.total_link_activations,
            r.slots,
            format_sig9(r.avg_slots_per_packet),
            opt(r.game_value_lower, format_sig9),
            opt(r.game_value_upper, format_sig9),
            opt(r.fp_iterations, |v| v.to_string()),
            opt(r.converged, |v| v.to_string()),
        );
    }
    out
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_results(table: &SweepTable, path: &Path) -> Result<()> {
    write_text(path, &render_table_csv(table))
}

pub fn write_detail(records: &[ResultRecord], path: &Path) -> Result<()> {
    write_text(path, &render_detail_csv(records))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_fixture() -> Fixture {
        Fixture::from_json(r#"{"n_links": 3, "conflicts": [[1, 2]], "rates": [3, 1, 2]}"#).unwrap()
    }

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig {
            n_nodes: 6,
            n_sessions: 3,
            runs: 2,
            seed: 11,
            beta_sweep: BetaSweep {
                min_db: 0.0,
                max_db: 10.0,
                step_db: 10.0,
            },
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn three_link_fixture_slots() {
        let cfg = ExperimentConfig {
            runs: 1,
            beta_sweep: BetaSweep::single(0.0),
            ..ExperimentConfig::default()
        };
        let exp = Experiment::with_fixture(cfg, example_fixture()).unwrap();
        let recs = exp.run_instance(0).unwrap();
        let slots: Vec<(Mode, u64)> = recs.iter().map(|r| (r.mode, r.slots)).collect();
        assert_eq!(slots, vec![(Mode::Soft, 3), (Mode::Coloring, 5), (Mode::None, 6)]);
        assert_eq!(recs[0].total_packets, 6);
    }

    #[test]
    fn instance_is_deterministic() {
        let cfg = small_cfg();
        assert_eq!(run_instance(&cfg, 1).unwrap(), run_instance(&cfg, 1).unwrap());
        assert_ne!(run_instance(&cfg, 0).unwrap(), run_instance(&cfg, 1).unwrap());
    }

    #[test]
    fn too_many_sessions() {
        let cfg = ExperimentConfig {
            n_nodes: 3,
            n_sessions: 7,
            ..small_cfg()
        };
        assert!(matches!(run_instance(&cfg, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn two_run_sweep_means() {
        let cfg = small_cfg();
        let out = run_sweep(&cfg).unwrap();
        assert_eq!(out.table.rows.len(), 2 * 3);
        for row in &out.table.rows {
            let vals: Vec<f64> = out
                .records
                .iter()
                .filter(|r| r.beta_db == row.beta_db && r.mode == row.mode)
                .map(|r| r.avg_slots_per_packet)
                .collect();
            assert_eq!(vals.len(), 2);
            assert!((row.mean_avg_slots_per_packet - (vals[0] + vals[1]) / 2.0).abs() < 1e-12);
            assert_eq!(row.runs, 2);
        }
        let coloring = out.table.row(0.0, Mode::Coloring).unwrap();
        assert_eq!(coloring.mean_gain_vs_coloring, Some(0.0));
    }

    #[test]
    fn record_metric_identities() {
        let out = run_sweep(&small_cfg()).unwrap();
        for r in &out.records {
            assert_eq!(r.avg_slots_per_packet, r.slots as f64 / r.total_packets as f64);
            if r.mode == Mode::None {
                assert_eq!(r.slots, r.total_link_activations);
            }
            assert_eq!(r.game_value_lower.is_some(), r.mode == Mode::Soft);
        }
    }

    #[test]
    fn gain_column_blank_without_coloring() {
        let cfg = ExperimentConfig {
            modes: vec![Mode::Soft, Mode::None],
            ..small_cfg()
        };
        let out = run_sweep(&cfg).unwrap();
        assert!(out.table.rows.iter().all(|r| r.mean_gain_vs_coloring.is_none()));
        let csv = render_table_csv(&out.table);
        assert!(csv.lines().nth(1).unwrap().ends_with(','));
    }

    #[test]
    fn csv_layout() {
        assert_eq!(render_table_csv(&SweepTable::default()), format!("{TABLE_HEADER}\n"));
        let table = SweepTable {
            rows: vec![AggregateRow {
                n_nodes: 10,
                n_sessions: 5,
                beta_db: 7.5,
                mode: Mode::Soft,
                runs: 3,
                mean_avg_slots_per_packet: 2.0 / 3.0,
                stderr: 0.0,
                mean_gain_vs_coloring: Some(0.125),
            }],
        };
        let csv = render_table_csv(&table);
        assert_eq!(csv.lines().count(), 2);
        assert_eq!(csv.lines().nth(1).unwrap(), "10,5,7.5,soft,3,0.666666667,0,0.125");
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(format_sig9(30.0), "30");
        assert_eq!(format_sig9(-2.5), "-2.5");
        assert_eq!(format_sig9(123456789.4), "123456789");
        assert_eq!(format_sig9(1234567890.0), "1.23456789e9");
        assert_eq!(format_sig9(0.000012345), "0.000012345");
        assert_eq!(format_sig9(1.5e-7), "1.5e-7");
        assert_eq!(format_sig9(9.9999999999), "10");
    }

    #[test]
    fn beta_values_inclusive() {
        assert_eq!(
            BetaSweep::default().values(),
            vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]
        );
        assert_eq!(BetaSweep::single(3.0).values(), vec![3.0]);
        let odd = BetaSweep {
            min_db: 0.0,
            max_db: 1.0,
            step_db: 0.1,
        };
        assert_eq!(odd.values().len(), 11);
    }

    #[test]
    fn config_validation() {
        let bad = [
            ExperimentConfig { runs: 0, ..small_cfg() },
            ExperimentConfig {
                beta_sweep: BetaSweep {
                    min_db: 0.0,
                    max_db: 10.0,
                    step_db: 0.0,
                },
                ..small_cfg()
            },
            ExperimentConfig {
                n_sessions: 0,
                ..small_cfg()
            },
            ExperimentConfig {
                modes: vec![],
                ..small_cfg()
            },
            ExperimentConfig {
                delta: -1.0,
                ..small_cfg()
            },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn config_file_formats() {
        let dir = tempfile::tempdir().unwrap();
        let toml_path = dir.path().join("exp.toml");
        std::fs::write(
            &toml_path,
            "n_nodes = 20\nruns = 5\nmodes = [\"soft\", \"coloring\"]\nsolver = \"exact\"\n\
             [beta_sweep]\nmin_db = 0.0\nmax_db = 20.0\nstep_db = 10.0\n",
        )
        .unwrap();
        let cfg = ExperimentConfig::read(&toml_path).unwrap();
        assert_eq!(cfg.n_nodes, 20);
        assert_eq!(cfg.modes, vec![Mode::Soft, Mode::Coloring]);
        assert_eq!(cfg.solver, SolverKind::Exact);
        assert_eq!(cfg.beta_sweep.values(), vec![0.0, 10.0, 20.0]);

        let json_path = dir.path().join("exp.json");
        std::fs::write(&json_path, serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(ExperimentConfig::read(&json_path).unwrap(), cfg);

        std::fs::write(&toml_path, "bogus_key = 1\n").unwrap();
        assert!(matches!(ExperimentConfig::read(&toml_path), Err(Error::Parse { .. })));
    }

    #[test]
    fn fixture_kinds() {
        assert!(matches!(example_fixture(), Fixture::Conflict(_)));
        let topo = Fixture::from_json(
            r#"{"nodes":[{"id":0,"x":0.0,"y":0.0},{"id":1,"x":0.5,"y":0.0}],"sessions":[{"source":0,"sink":1,"packets":2}]}"#,
        )
        .unwrap();
        assert!(matches!(topo, Fixture::Topology(_)));
        assert!(Fixture::from_json(r#"{"n_links": 2, "conflicts": []}"#).is_err());
        assert!(Fixture::from_json(r#"{"foo": 1}"#).is_err());
    }

    #[test]
    fn errors_carry_instance_context() {
        let fixture = Fixture::from_json(
            r#"{"nodes":[{"id":0,"x":0.0,"y":0.0},{"id":1,"x":0.5,"y":0.0}],"sessions":[{"source":0,"sink":1,"packets":2}]}"#,
        )
        .unwrap();
        let cfg = ExperimentConfig {
            runs: 1,
            component_cap: 0,
            beta_sweep: BetaSweep::single(5.0),
            ..ExperimentConfig::default()
        };
        let exp = Experiment::with_fixture(cfg, fixture).unwrap();
        let err = exp.run_instance(0).unwrap_err();
        assert!(matches!(err, Error::Instance { run_id: 0, .. }));
        assert!(matches!(err.root(), Error::ResourceLimit { cap: 0 }));
        assert!(err.to_string().contains("beta 5 dB"));
    }
}
