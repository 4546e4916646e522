use crate::components::Component;
use crate::topology::RateVector;
use crate::{Error, Result};

/// Dense link-by-component payoff matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl PayoffMatrix {
    /// General nonnegative matrix; every row and every column needs a
    /// positive entry.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::invalid(
                "payoff matrix must have at least one row and one column",
            ));
        }
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::invalid("payoff matrix rows differ in length"));
        }
        let data: Vec<f64> = rows.into_iter().flatten().collect();
        if data.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid("payoff entries must be finite and nonnegative"));
        }
        let h = PayoffMatrix { n_rows, n_cols, data };
        if let Some(i) = (0..n_rows).find(|&i| h.row(i).iter().all(|&v| v == 0.0)) {
            return Err(Error::invalid(format!("payoff row {i} has no positive entry")));
        }
        if let Some(j) = (0..n_cols).find(|&j| h.column(j).all(|v| v == 0.0)) {
            return Err(Error::invalid(format!("payoff column {j} has no positive entry")));
        }
        Ok(h)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.data[j..].iter().step_by(self.n_cols).copied()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n_rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// `H y`.
    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        (0..self.n_rows)
            .map(|i| self.row(i).iter().zip(y).map(|(h, y)| h * y).sum())
            .collect()
    }

    /// `x^T H`.
    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, h) in out.iter_mut().zip(self.row(i)) {
                *o += xi * h;
            }
        }
        out
    }

    /// Submatrix keeping only the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        let rows = (0..self.n_rows)
            .map(|i| cols.iter().map(|&j| self.get(i, j)).collect())
            .collect();
        Self::from_rows(rows)
    }
}

/// `h[i][j] = 1 / r_i` when link `i` belongs to component `j`, else 0.
pub fn build_payoff(components: &[Component], rates: &RateVector) -> Result<PayoffMatrix> {
    let n_links = rates.len();
    if n_links == 0 {
        return Err(Error::invalid("no links to schedule"));
    }
    if components.is_empty() {
        return Err(Error::invalid("no components to schedule with"));
    }
    if let Some(i) = rates.as_slice().iter().position(|&r| r == 0) {
        return Err(Error::invalid(format!(
            "link {i} has rate 0; scheduled links need rate >= 1"
        )));
    }
    let n_cols = components.len();
    let mut data = vec![0.0; n_links * n_cols];
    for (j, c) in components.iter().enumerate() {
        for &i in c.members() {
            if i >= n_links {
                return Err(Error::invalid(format!(
                    "component {j} names link {i} but only {n_links} links have rates"
                )));
            }
            data[i * n_cols + j] = 1.0 / f64::from(rates.get(i));
        }
    }
    let h = PayoffMatrix {
        n_rows: n_links,
        n_cols,
        data,
    };
    if let Some(i) = (0..n_links).find(|&i| h.row(i).iter().all(|&v| v == 0.0)) {
        return Err(Error::invalid(format!("link {i} is not covered by any component")));
    }
    Ok(h)
}

/// `(H y)_i`: per-slot fraction of link `i`'s demand served by component
/// usage `y`. Multiply by `r_i` for the supported activation rate.
pub fn supported_rates(h: &PayoffMatrix, y: &[f64]) -> Result<Vec<f64>> {
    if y.len() != h.n_cols() {
        return Err(Error::invalid(format!(
            "usage vector has {} entries for {} components",
            y.len(),
            h.n_cols()
        )));
    }
    Ok(h.apply(y))
}

/// The link with the smallest supported fraction under `y`; lowest index on ties.
pub fn bottleneck(h: &PayoffMatrix, y: &[f64]) -> Result<usize> {
    let supported = supported_rates(h, y)?;
    Ok(argmin(&supported))
}

pub(crate) fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x < v[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}
