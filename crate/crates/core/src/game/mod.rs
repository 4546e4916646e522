//! The links-vs-components matrix game and its schedules.
//!
//! Entry `h[i][j]` of the payoff matrix is `1/r_i` when link `i` belongs to
//! component `j`. For component usage `y`, `(H y)_i` is the fraction of
//! link `i`'s demand served per slot, so the maximin value `v` of the game
//! is the best achievable worst-case fraction and `1/v` is the shortest
//! fractional schedule.

mod fictitious;
mod oracle;
mod payoff;
mod schedule;

pub use fictitious::{fp_solve, fp_solve_observed, FpState, GameSolution, SolverConfig};
pub use oracle::{lp_oracle, lp_oracle_with, OracleConfig, OracleSolution};
pub use payoff::{bottleneck, build_payoff, supported_rates, PayoffMatrix};
pub use schedule::{extract_schedule, verify_schedule, Schedule, ScheduleReport, Violation};

use serde::{Deserialize, Serialize};

use crate::components::{enumerate_maximal, Component};
use crate::conflict::ConflictGraph;
use crate::topology::RateVector;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Solver {
    FictitiousPlay(SolverConfig),
    Exact(OracleConfig),
}

impl Default for Solver {
    fn default() -> Self {
        Solver::FictitiousPlay(SolverConfig::default())
    }
}

/// Equilibrium summary common to both solvers. The exact solver reports
/// `value_lower == value_upper` and zero iterations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftSolution {
    pub y: Vec<f64>,
    pub value_lower: f64,
    pub value_upper: f64,
    pub iterations: u64,
    pub converged: bool,
}

/// Everything produced while soft-coloring one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftSchedule {
    pub components: Vec<Component>,
    pub payoff: PayoffMatrix,
    pub solution: SoftSolution,
    pub schedule: Schedule,
}

pub fn solve_game(h: &PayoffMatrix, solver: &Solver) -> Result<SoftSolution> {
    match solver {
        Solver::FictitiousPlay(cfg) => {
            let s = fp_solve(h, cfg)?;
            Ok(SoftSolution {
                y: s.y,
                value_lower: s.value_lower,
                value_upper: s.value_upper,
                iterations: s.iterations,
                converged: s.converged,
            })
        }
        Solver::Exact(cfg) => {
            let s = lp_oracle_with(h, cfg)?;
            Ok(SoftSolution {
                y: s.y,
                value_lower: s.value,
                value_upper: s.value,
                iterations: 0,
                converged: true,
            })
        }
    }
}

/// Maximal components, game solution, and integer schedule for one
/// conflict graph and rate vector.
pub fn soft_schedule(
    g: &ConflictGraph,
    rates: &RateVector,
    solver: &Solver,
    component_cap: usize,
) -> Result<SoftSchedule> {
    let components = enumerate_maximal(g, component_cap)?;
    let payoff = build_payoff(&components, rates)?;
    let solution = solve_game(&payoff, solver)?;
    let schedule = extract_schedule(&components, rates, &solution.y, solution.value_lower, g)?;
    Ok(SoftSchedule {
        components,
        payoff,
        solution,
        schedule,
    })
}
