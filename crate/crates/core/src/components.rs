//! Topology components: sets of links that can be active in the same slot.
//!
//! A component's generation is its size. Every link on its own is a
//! first-generation component; a component contained in a larger one is its
//! parent and is dominated by it in the scheduling game, so production code
//! only needs the maximal components.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::conflict::ConflictGraph;
use crate::{Error, Result};

pub const DEFAULT_COMPONENT_CAP: usize = 100_000;

/// Sorted, nonempty list of mutually compatible link indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Component {
    members: Vec<usize>,
}

impl Component {
    pub fn new(mut members: Vec<usize>) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err(Error::invalid("a component needs at least one link"));
        }
        Ok(Component { members })
    }

    pub fn singleton(link: usize) -> Self {
        Component { members: vec![link] }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn generation(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, link: usize) -> bool {
        self.members.binary_search(&link).is_ok()
    }

    pub fn is_subset_of(&self, other: &Component) -> bool {
        self.members.iter().all(|&m| other.contains(m))
    }

    pub fn is_strict_subset_of(&self, other: &Component) -> bool {
        self.members.len() < other.members.len() && self.is_subset_of(other)
    }
}

/// Generation first, then member list.
pub fn canonical_order(components: &mut [Component]) {
    components.sort_by(|a, b| {
        a.generation()
            .cmp(&b.generation())
            .then_with(|| a.members.cmp(&b.members))
    });
}

fn compatibility_rows(g: &ConflictGraph) -> Vec<FixedBitSet> {
    (0..g.n_links())
        .map(|i| {
            let mut row = g.row(i).clone();
            row.toggle_range(..);
            row
        })
        .collect()
}

/// Every independent set of `g` with at most `max_generation` links (all of
/// them when `None`), in canonical order.
pub fn enumerate_components(g: &ConflictGraph, max_generation: Option<usize>, cap: usize) -> Result<Vec<Component>> {
    let compat = compatibility_rows(g);
    let limit = max_generation.unwrap_or(usize::MAX);
    let mut out = Vec::new();
    let mut current = Vec::new();
    let mut all = FixedBitSet::with_capacity(g.n_links());
    all.insert_range(..);
    if limit > 0 {
        extend_independent(&compat, &mut current, &all, limit, cap, &mut out)?;
    }
    canonical_order(&mut out);
    Ok(out)
}

fn extend_independent(
    compat: &[FixedBitSet],
    current: &mut Vec<usize>,
    candidates: &FixedBitSet,
    limit: usize,
    cap: usize,
    out: &mut Vec<Component>,
) -> Result<()> {
    for v in candidates.ones() {
        if out.len() >= cap {
            return Err(Error::ResourceLimit { cap });
        }
        current.push(v);
        out.push(Component {
            members: current.clone(),
        });
        if current.len() < limit {
            let mut next = candidates.clone();
            next.intersect_with(&compat[v]);
            next.set_range(..v + 1, false);
            if !next.is_clear() {
                extend_independent(compat, current, &next, limit, cap, out)?;
            }
        }
        current.pop();
    }
    Ok(())
}

/// Drops every component strictly contained in another input component.
/// Duplicates collapse to their first occurrence; order is preserved.
pub fn prune_dominated(components: &[Component]) -> Vec<Component> {
    let mut kept: Vec<Component> = Vec::new();
    for (i, c) in components.iter().enumerate() {
        let dominated = components.iter().any(|o| c.is_strict_subset_of(o));
        let duplicate = components[..i].iter().any(|o| o == c);
        if !dominated && !duplicate {
            kept.push(c.clone());
        }
    }
    kept
}

/// Maximal independent sets of `g`, in canonical order.
pub fn enumerate_maximal(g: &ConflictGraph, cap: usize) -> Result<Vec<Component>> {
    let n = g.n_links();
    let compat = compatibility_rows(g);
    let mut candidates = FixedBitSet::with_capacity(n);
    candidates.insert_range(..);
    let excluded = FixedBitSet::with_capacity(n);
    let mut out = Vec::new();
    let mut clique = Vec::new();
    if n > 0 {
        bron_kerbosch(&compat, &mut clique, candidates, excluded, cap, &mut out)?;
    }
    for c in &mut out {
        c.members.sort_unstable();
    }
    canonical_order(&mut out);
    Ok(out)
}

/// Maximal cliques of the compatibility graph with Tomita pivoting.
fn bron_kerbosch(
    compat: &[FixedBitSet],
    clique: &mut Vec<usize>,
    mut candidates: FixedBitSet,
    mut excluded: FixedBitSet,
    cap: usize,
    out: &mut Vec<Component>,
) -> Result<()> {
    if candidates.is_clear() {
        if excluded.is_clear() {
            if out.len() >= cap {
                return Err(Error::ResourceLimit { cap });
            }
            out.push(Component {
                members: clique.clone(),
            });
        }
        return Ok(());
    }

    let pivot = candidates
        .union(&excluded)
        .max_by_key(|&u| (candidates.intersection(&compat[u]).count(), std::cmp::Reverse(u)))
        .expect("candidate set is nonempty");

    let mut branch = candidates.clone();
    branch.difference_with(&compat[pivot]);
    for v in branch.ones() {
        let mut next_candidates = candidates.clone();
        next_candidates.intersect_with(&compat[v]);
        let mut next_excluded = excluded.clone();
        next_excluded.intersect_with(&compat[v]);

        clique.push(v);
        bron_kerbosch(compat, clique, next_candidates, next_excluded, cap, out)?;
        clique.pop();

        candidates.set(v, false);
        excluded.insert(v);
    }
    Ok(())
}
