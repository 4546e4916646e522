//! Exact solution of `max t  s.t.  H y >= t, sum(y) = 1, y >= 0` by
//! enumerating basic feasible solutions.
//!
//! A vertex fixes a column support `S` (all other `y_j = 0`) and `|S|`
//! rows held tight at `t`, which together with `sum(y) = 1` form a square
//! system. Rows that are elementwise no smaller than another row never bind
//! and are dropped first; supports that leave some row with no positive
//! entry only reach `t = 0` and are skipped.

use serde::{Deserialize, Serialize};

use super::payoff::PayoffMatrix;
use crate::{Error, Result};

const PIVOT_EPS: f64 = 1e-12;
const FEAS_EPS: f64 = 1e-10;
const TIE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub max_columns: usize,
    /// Upper bound on the number of square systems the enumeration may solve.
    pub max_systems: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_columns: 12,
            max_systems: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    pub value: f64,
    pub y: Vec<f64>,
}

pub fn lp_oracle(h: &PayoffMatrix) -> Result<OracleSolution> {
    lp_oracle_with(h, &OracleConfig::default())
}

pub fn lp_oracle_with(h: &PayoffMatrix, cfg: &OracleConfig) -> Result<OracleSolution> {
    let n_cols = h.n_cols();
    if n_cols > cfg.max_columns {
        return Err(Error::Unsupported(format!(
            "exact solver handles at most {} components, game has {n_cols}",
            cfg.max_columns
        )));
    }
    let rows = binding_rows(h);
    let systems = system_count(rows.len(), n_cols);
    if systems > u128::from(cfg.max_systems) {
        return Err(Error::Unsupported(format!(
            "exact solver would solve {systems} systems ({} rows x {n_cols} columns), limit is {}",
            rows.len(),
            cfg.max_systems
        )));
    }

    let mut best_t = f64::NEG_INFINITY;
    let mut optimal: Vec<Vec<f64>> = Vec::new();
    let mut solver = SquareSystem::default();

    for mask in 1u32..(1u32 << n_cols) {
        let support: Vec<usize> = (0..n_cols).filter(|&j| mask & (1 << j) != 0).collect();
        let covers = rows.iter().all(|&i| support.iter().any(|&j| h.get(i, j) > 0.0));
        if !covers || support.len() > rows.len() {
            continue;
        }
        for tight in Combinations::new(rows.len(), support.len()) {
            let tight_rows: Vec<usize> = tight.iter().map(|&r| rows[r]).collect();
            let Some((ys, t)) = solver.solve(h, &tight_rows, &support) else {
                continue;
            };
            if ys.iter().any(|&v| v < -FEAS_EPS) {
                continue;
            }
            let mut y = vec![0.0; n_cols];
            for (&j, &v) in support.iter().zip(&ys) {
                y[j] = v.max(0.0);
            }
            let feasible = rows
                .iter()
                .all(|&i| h.row(i).iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() >= t - FEAS_EPS);
            if !feasible {
                continue;
            }
            if t > best_t + TIE_EPS {
                best_t = t;
                optimal.clear();
                optimal.push(y);
            } else if t >= best_t - TIE_EPS {
                best_t = best_t.max(t);
                optimal.push(y);
            }
        }
    }

    let y = optimal
        .into_iter()
        .min_by(|a, b| lex_cmp(a, b))
        .ok_or_else(|| Error::invalid("game has no feasible vertex"))?;
    let value = h.apply(&y).into_iter().fold(f64::INFINITY, f64::min);
    Ok(OracleSolution { value, y })
}

/// Rows not implied by another row: row `i` is dropped when some other row
/// is elementwise `<=` it (for identical rows the lowest index stays).
fn binding_rows(h: &PayoffMatrix) -> Vec<usize> {
    let n = h.n_rows();
    (0..n)
        .filter(|&i| {
            !(0..n).any(|o| {
                o != i && h.row(o).iter().zip(h.row(i)).all(|(a, b)| a <= b) && (o < i || h.row(o) != h.row(i))
            })
        })
        .collect()
}

/// `sum_s C(cols, s) * C(rows, s)`, i.e. `C(rows + cols, cols) - 1`.
fn system_count(rows: usize, cols: usize) -> u128 {
    let mut total = 1u128;
    let n = (rows + cols) as u128;
    for k in 0..cols as u128 {
        total = total * (n - k) / (k + 1);
    }
    total - 1
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > 1e-12 {
            return x.total_cmp(y);
        }
    }
    std::cmp::Ordering::Equal
}

/// Reusable buffer for the `(s+1) x (s+1)` system
/// `H[tight, support] y - t = 0`, `sum(y) = 1`.
#[derive(Default)]
struct SquareSystem {
    a: Vec<f64>,
}

impl SquareSystem {
    fn solve(&mut self, h: &PayoffMatrix, tight: &[usize], support: &[usize]) -> Option<(Vec<f64>, f64)> {
        let s = support.len();
        let n = s + 1;
        let w = n + 1;
        self.a.clear();
        self.a.resize(n * w, 0.0);
        let a = &mut self.a;
        for (r, &i) in tight.iter().enumerate() {
            for (c, &j) in support.iter().enumerate() {
                a[r * w + c] = h.get(i, j);
            }
            a[r * w + s] = -1.0;
        }
        for c in 0..s {
            a[s * w + c] = 1.0;
        }
        a[s * w + n] = 1.0;

        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&p, &q| a[p * w + col].abs().total_cmp(&a[q * w + col].abs()))
                .expect("nonempty pivot range");
            if a[pivot * w + col].abs() < PIVOT_EPS {
                return None;
            }
            if pivot != col {
                for c in 0..w {
                    a.swap(pivot * w + c, col * w + c);
                }
            }
            let p = a[col * w + col];
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[r * w + col] / p;
                if f != 0.0 {
                    for c in col..w {
                        a[r * w + c] -= f * a[col * w + c];
                    }
                }
            }
        }
        let x: Vec<f64> = (0..n).map(|r| a[r * w + n] / a[r * w + r]).collect();
        let t = x[s];
        Some((x[..s].to_vec(), t))
    }
}

/// Lexicographic k-subsets of `0..n`.
struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            idx: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for m in i + 1..k {
                    self.idx[m] = self.idx[m - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}
