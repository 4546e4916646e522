//! Link conflict graph: two links cannot share a slot when they share a node
//! or when either receiver fails the interference-margin test.

use std::path::Path;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::topology::{received_power_db, Link, Node, PropagationParams, RateVector};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConflictParams {
    /// Acceptable interference margin in dB. `f64::NEG_INFINITY` disables
    /// the interference rule and leaves only shared-node conflicts.
    pub beta_db: f64,
    pub propagation: PropagationParams,
}

impl ConflictParams {
    pub fn new(beta_db: f64, propagation: PropagationParams) -> Result<Self> {
        let params = ConflictParams { beta_db, propagation };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta_db.is_nan() || self.beta_db == f64::INFINITY {
            return Err(Error::invalid(format!(
                "interference margin must be finite or -inf, got {}",
                self.beta_db
            )));
        }
        self.propagation.validate()
    }
}

/// Symmetric conflict relation over scheduled links. Every link conflicts
/// with itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictGraph {
    rows: Vec<FixedBitSet>,
}

impl ConflictGraph {
    /// Graph with no conflicts between distinct links.
    pub fn empty(n_links: usize) -> Self {
        let rows = (0..n_links)
            .map(|i| {
                let mut row = FixedBitSet::with_capacity(n_links);
                row.insert(i);
                row
            })
            .collect();
        ConflictGraph { rows }
    }

    pub fn complete(n_links: usize) -> Self {
        let mut row = FixedBitSet::with_capacity(n_links);
        row.insert_range(..);
        ConflictGraph {
            rows: vec![row; n_links],
        }
    }

    pub fn from_pairs(n_links: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n_links);
        for &(a, b) in pairs {
            if a >= n_links || b >= n_links {
                return Err(Error::invalid(format!(
                    "conflict pair ({a}, {b}) out of range for {n_links} links"
                )));
            }
            g.add_conflict(a, b);
        }
        Ok(g)
    }

    pub fn add_conflict(&mut self, a: usize, b: usize) {
        self.rows[a].insert(b);
        self.rows[b].insert(a);
    }

    pub fn n_links(&self) -> usize {
        self.rows.len()
    }

    pub fn conflicts(&self, a: usize, b: usize) -> bool {
        self.rows[a].contains(b)
    }

    /// Conflict row of `link`, including the link itself.
    pub fn row(&self, link: usize) -> &FixedBitSet {
        &self.rows[link]
    }

    /// Number of other links `link` conflicts with.
    pub fn degree(&self, link: usize) -> usize {
        self.rows[link].count_ones(..) - 1
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n_links()).map(|i| self.degree(i)).max().unwrap_or(0)
    }

    /// Off-diagonal conflicts as `(a, b)` with `a < b`, in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, row) in self.rows.iter().enumerate() {
            out.extend(row.ones().filter(|&b| b > a).map(|b| (a, b)));
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        let total: usize = self.rows.iter().map(|r| r.count_ones(..)).sum();
        (total - self.n_links()) / 2
    }

    /// Whether every conflict of `self` is also a conflict of `other`.
    pub fn is_subgraph_of(&self, other: &ConflictGraph) -> bool {
        self.n_links() == other.n_links() && self.rows.iter().zip(&other.rows).all(|(a, b)| a.is_subset(b))
    }

    /// First conflicting pair among `members`, if any.
    pub fn first_conflict(&self, members: &[usize]) -> Option<(usize, usize)> {
        for (k, &a) in members.iter().enumerate() {
            for &b in &members[k + 1..] {
                if a == b || self.conflicts(a, b) {
                    return Some((a, b));
                }
            }
        }
        None
    }

    pub fn is_independent(&self, members: &[usize]) -> bool {
        self.first_conflict(members).is_none()
    }
}

pub fn physically_adjacent(a: &Link, b: &Link) -> bool {
    a.tx == b.tx || a.tx == b.rx || a.rx == b.tx || a.rx == b.rx
}

/// Interference-margin test between node-disjoint links `a = i->j` and
/// `b = m->k`. They conflict when the wanted signal at either receiver does
/// not beat the other transmitter's signal there by more than the margin:
/// `S_mk <= S_ik + beta` or `S_ij <= S_mj + beta`.
pub fn interference_adjacent(a: &Link, b: &Link, nodes: &[Node], params: &ConflictParams) -> bool {
    if params.beta_db == f64::NEG_INFINITY {
        return false;
    }
    let p = &params.propagation;
    let (i, j) = (&nodes[a.tx], &nodes[a.rx]);
    let (m, k) = (&nodes[b.tx], &nodes[b.rx]);

    let wanted_at_k = received_power_db(m, k.position(), p);
    let interference_at_k = received_power_db(i, k.position(), p);
    let wanted_at_j = received_power_db(i, j.position(), p);
    let interference_at_j = received_power_db(m, j.position(), p);

    wanted_at_k <= interference_at_k + params.beta_db || wanted_at_j <= interference_at_j + params.beta_db
}

pub fn build_conflict_graph(links: &[Link], nodes: &[Node], params: &ConflictParams) -> Result<ConflictGraph> {
    params.validate()?;
    if links.is_empty() {
        return Err(Error::invalid("cannot build a conflict graph over zero links"));
    }
    for l in links {
        if l.tx >= nodes.len() || l.rx >= nodes.len() {
            return Err(Error::invalid(format!("link {} references an unknown node", l.id)));
        }
    }
    let mut g = ConflictGraph::empty(links.len());
    for (ia, a) in links.iter().enumerate() {
        for (ib, b) in links.iter().enumerate().skip(ia + 1) {
            if physically_adjacent(a, b) || interference_adjacent(a, b, nodes, params) {
                g.add_conflict(ia, ib);
            }
        }
    }
    Ok(g)
}

/// On-disk conflict graph: link count, conflicting index pairs, and
/// optionally the link rates, for instances given without geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictFixture {
    pub n_links: usize,
    pub conflicts: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<RateVector>,
}

impl ConflictFixture {
    pub fn from_graph(g: &ConflictGraph, rates: Option<RateVector>) -> Self {
        ConflictFixture {
            n_links: g.n_links(),
            conflicts: g.edges(),
            rates,
        }
    }

    pub fn graph(&self) -> Result<ConflictGraph> {
        if self.n_links == 0 {
            return Err(Error::invalid("conflict fixture has zero links"));
        }
        for &(a, b) in &self.conflicts {
            if a == b {
                return Err(Error::invalid(format!("conflict pair ({a}, {a}) is a self-loop")));
            }
        }
        if let Some(r) = &self.rates {
            if r.len() != self.n_links {
                return Err(Error::invalid(format!(
                    "{} rates given for {} links",
                    r.len(),
                    self.n_links
                )));
            }
        }
        ConflictGraph::from_pairs(self.n_links, &self.conflicts)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let fixture: ConflictFixture =
            serde_json::from_str(text).map_err(|e| Error::invalid(format!("conflict fixture: {e}")))?;
        fixture.graph()?;
        Ok(fixture)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("conflict fixture serializes")
    }
}
