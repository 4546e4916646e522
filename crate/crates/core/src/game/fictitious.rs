//! Brown-Robinson fictitious play for the links-vs-components game.
//!
//! The link player minimizes and the component player maximizes. Each
//! player best-responds to the other's accumulated play; the empirical
//! pick frequencies bracket the game value from both sides at every
//! iteration.

use serde::{Deserialize, Serialize};

use super::payoff::{argmax, argmin, PayoffMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Stop once `value_upper - value_lower <= delta`.
    pub delta: f64,
    pub max_iterations: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            delta: 1e-3,
            max_iterations: 1_000_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::invalid(format!("delta must be positive, got {}", self.delta)));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be at least 1"));
        }
        Ok(())
    }
}

/// Solver state as seen after the `k`-th pair of best responses.
///
/// `x_acc` sums the `k` component columns played so far (the first one is
/// the arbitrary opening pick, column 0) and `y_acc` sums the `k` link rows.
/// `col_pick` is the component player's response to `y_acc`; it enters
/// `x_acc` only if another iteration runs.
#[derive(Debug, Clone, PartialEq)]
pub struct FpState {
    pub x_acc: Vec<f64>,
    pub y_acc: Vec<f64>,
    pub row_counts: Vec<u64>,
    pub col_counts: Vec<u64>,
    pub k: u64,
    pub row_pick: usize,
    pub col_pick: usize,
}

impl FpState {
    /// Guaranteed by the empirical component mix: `min (H y)`.
    pub fn value_lower(&self) -> f64 {
        self.x_acc[argmin(&self.x_acc)] / self.k as f64
    }

    /// Guaranteed by the empirical link mix: `max (x^T H)`.
    pub fn value_upper(&self) -> f64 {
        self.y_acc[argmax(&self.y_acc)] / self.k as f64
    }

    pub fn gap(&self) -> f64 {
        self.value_upper() - self.value_lower()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSolution {
    /// Link player's mixed strategy.
    pub x: Vec<f64>,
    /// Component usage rates.
    pub y: Vec<f64>,
    pub value_lower: f64,
    pub value_upper: f64,
    pub iterations: u64,
    pub converged: bool,
}

impl GameSolution {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.value_lower + self.value_upper)
    }
}

pub fn fp_solve(h: &PayoffMatrix, cfg: &SolverConfig) -> Result<GameSolution> {
    fp_solve_observed(h, cfg, |_| {})
}

/// Fictitious play, calling `observer` once per iteration before the
/// convergence test.
pub fn fp_solve_observed<F>(h: &PayoffMatrix, cfg: &SolverConfig, mut observer: F) -> Result<GameSolution>
where
    F: FnMut(&FpState),
{
    cfg.validate()?;
    let (n_rows, n_cols) = (h.n_rows(), h.n_cols());

    let mut state = FpState {
        x_acc: h.column(0).collect(),
        y_acc: vec![0.0; n_cols],
        row_counts: vec![0; n_rows],
        col_counts: vec![0; n_cols],
        k: 1,
        row_pick: 0,
        col_pick: 0,
    };
    state.col_counts[0] = 1;

    let converged = loop {
        let i = argmin(&state.x_acc);
        for (acc, v) in state.y_acc.iter_mut().zip(h.row(i)) {
            *acc += v;
        }
        state.row_counts[i] += 1;
        state.row_pick = i;
        state.col_pick = argmax(&state.y_acc);

        observer(&state);

        if state.gap() <= cfg.delta {
            break true;
        }
        if state.k >= cfg.max_iterations {
            break false;
        }

        let j = state.col_pick;
        state.k += 1;
        for (acc, v) in state.x_acc.iter_mut().zip(h.column(j)) {
            *acc += v;
        }
        state.col_counts[j] += 1;
    };

    let k = state.k as f64;
    Ok(GameSolution {
        x: state.row_counts.iter().map(|&c| c as f64 / k).collect(),
        y: state.col_counts.iter().map(|&c| c as f64 / k).collect(),
        value_lower: state.value_lower(),
        value_upper: state.value_upper(),
        iterations: state.k,
        converged,
    })
}
