//! Integer slot schedules from fractional component usage rates.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::components::Component;
use crate::conflict::ConflictGraph;
use crate::topology::RateVector;
use crate::{Error, Result};

/// Slot-by-slot component assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    /// Component index active in each slot.
    pub slots: Vec<usize>,
    /// Activations each link receives over the whole schedule.
    pub served: Vec<u64>,
}

impl Schedule {
    pub fn from_counts(components: &[Component], counts: &[u64], n_links: usize) -> Self {
        let slots = counts
            .iter()
            .enumerate()
            .flat_map(|(j, &n)| std::iter::repeat_n(j, n as usize))
            .collect();
        Schedule {
            slots,
            served: served_by(components, counts, n_links),
        }
    }

    pub fn length(&self) -> usize {
        self.slots.len()
    }

    /// Slots per component.
    pub fn counts(&self, n_components: usize) -> Vec<u64> {
        let mut counts = vec![0; n_components];
        for &j in &self.slots {
            counts[j] += 1;
        }
        counts
    }
}

fn served_by(components: &[Component], counts: &[u64], n_links: usize) -> Vec<u64> {
    let mut served = vec![0u64; n_links];
    for (c, &n) in components.iter().zip(counts) {
        for &l in c.members() {
            served[l] += n;
        }
    }
    served
}

/// Rounds component usage `y` at the game value `value_lower` into whole
/// slots and then fixes up the result:
///
/// 1. `T0 = ceil(1 / value_lower)` slots are apportioned to components by
///    largest remainder on `y * T0`.
/// 2. While some link is short of its rate, one more slot goes to the
///    component covering the most short links.
/// 3. Surplus slots are removed, highest component index first, as long as
///    every link stays served.
pub fn extract_schedule(
    components: &[Component],
    rates: &RateVector,
    y: &[f64],
    value_lower: f64,
    g: &ConflictGraph,
) -> Result<Schedule> {
    let n_links = rates.len();
    if !(value_lower > 0.0 && value_lower.is_finite()) {
        return Err(Error::invalid(format!(
            "game value must be positive, got {value_lower}"
        )));
    }
    if y.len() != components.len() {
        return Err(Error::invalid(format!(
            "usage vector has {} entries for {} components",
            y.len(),
            components.len()
        )));
    }
    if g.n_links() != n_links {
        return Err(Error::invalid(format!(
            "conflict graph has {} links, rate vector {n_links}",
            g.n_links()
        )));
    }
    for (j, c) in components.iter().enumerate() {
        if let Some(&l) = c.members().iter().find(|&&l| l >= n_links) {
            return Err(Error::invalid(format!("component {j} names unknown link {l}")));
        }
        if let Some((a, b)) = g.first_conflict(c.members()) {
            return Err(Error::invalid(format!(
                "component {j} holds conflicting links {a} and {b}"
            )));
        }
    }
    let mut covered = vec![false; n_links];
    for c in components {
        for &l in c.members() {
            covered[l] = true;
        }
    }
    if let Some(l) = (0..n_links).find(|&l| !covered[l] && rates.get(l) > 0) {
        return Err(Error::invalid(format!("link {l} is not covered by any component")));
    }

    let total = (1.0 / value_lower - 1e-9).ceil().max(0.0) as u64;
    let mut counts = apportion(y, total);
    let need: Vec<u64> = rates.as_slice().iter().map(|&r| u64::from(r)).collect();

    // Repair.
    let mut served = served_by(components, &counts, n_links);
    loop {
        let short = |l: usize, served: &[u64]| served[l] < need[l];
        if !(0..n_links).any(|l| short(l, &served)) {
            break;
        }
        let mut best = 0;
        let mut best_hits = 0;
        for (j, c) in components.iter().enumerate() {
            let hits = c.members().iter().filter(|&&l| short(l, &served)).count();
            if hits > best_hits {
                best = j;
                best_hits = hits;
            }
        }
        counts[best] += 1;
        for &l in components[best].members() {
            served[l] += 1;
        }
    }

    // Trim.
    for j in (0..components.len()).rev() {
        while counts[j] > 0 && components[j].members().iter().all(|&l| served[l] > need[l]) {
            counts[j] -= 1;
            for &l in components[j].members() {
                served[l] -= 1;
            }
        }
    }

    Ok(Schedule::from_counts(components, &counts, n_links))
}

/// Largest-remainder rounding of `weights * total` to integers summing to
/// `total`; equal remainders favour the lower index.
fn apportion(weights: &[f64], total: u64) -> Vec<u64> {
    let quotas: Vec<f64> = weights.iter().map(|&w| w.max(0.0) * total as f64).collect();
    let mut counts: Vec<u64> = quotas.iter().map(|q| q.floor() as u64).collect();
    let assigned: u64 = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &j in order.iter().take(total.saturating_sub(assigned) as usize) {
        counts[j] += 1;
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    UnknownComponent {
        slot: usize,
        component: usize,
    },
    Conflict {
        slot: usize,
        component: usize,
        links: (usize, usize),
    },
    UnderServed {
        link: usize,
        served: u64,
        required: u32,
    },
    ServedMismatch {
        link: usize,
        recorded: u64,
        actual: u64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownComponent { slot, component } => {
                write!(f, "slot {slot} uses unknown component {component}")
            }
            Violation::Conflict { slot, component, links } => write!(
                f,
                "slot {slot} activates component {component} with conflicting links {} and {}",
                links.0, links.1
            ),
            Violation::UnderServed { link, served, required } => {
                write!(f, "link {link} served {served} times but needs {required}")
            }
            Violation::ServedMismatch { link, recorded, actual } => {
                write!(
                    f,
                    "link {link} recorded as served {recorded} times, slots give {actual}"
                )
            }
        }
    }
}

/// Outcome of [`verify_schedule`]: empty when the schedule is valid.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ScheduleReport {
    pub violation: Option<Violation>,
}

impl ScheduleReport {
    pub fn is_valid(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks that every slot is conflict-free and every link gets at least its
/// rate. Reports the first violation found.
pub fn verify_schedule(s: &Schedule, components: &[Component], g: &ConflictGraph, r: &RateVector) -> ScheduleReport {
    let fail = |v| ScheduleReport { violation: Some(v) };
    let mut actual = vec![0u64; r.len()];
    for (slot, &j) in s.slots.iter().enumerate() {
        let Some(c) = components.get(j) else {
            return fail(Violation::UnknownComponent { slot, component: j });
        };
        if c.members().iter().any(|&l| l >= g.n_links() || l >= r.len()) {
            return fail(Violation::UnknownComponent { slot, component: j });
        }
        if let Some(links) = g.first_conflict(c.members()) {
            return fail(Violation::Conflict {
                slot,
                component: j,
                links,
            });
        }
        for &l in c.members() {
            actual[l] += 1;
        }
    }
    for (link, &required) in r.as_slice().iter().enumerate() {
        let recorded = s.served.get(link).copied().unwrap_or(0);
        if recorded != actual[link] {
            return fail(Violation::ServedMismatch {
                link,
                recorded,
                actual: actual[link],
            });
        }
        if actual[link] < u64::from(required) {
            return fail(Violation::UnderServed {
                link,
                served: actual[link],
                required,
            });
        }
    }
    ScheduleReport::default()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> (Vec<Component>, RateVector, ConflictGraph) {
        (
            vec![Component::new(vec![0, 1]).unwrap(), Component::new(vec![0, 2]).unwrap()],
            RateVector::new(vec![3, 1, 2]),
            ConflictGraph::from_pairs(3, &[(1, 2)]).unwrap(),
        )
    }

    #[test]
    fn three_slot_optimum() {
        let (comps, r, g) = example();
        let s = extract_schedule(&comps, &r, &[1.0 / 3.0, 2.0 / 3.0], 1.0 / 3.0, &g).unwrap();
        assert_eq!(s.slots, vec![0, 1, 1]);
        assert_eq!(s.served, vec![3, 1, 2]);
        assert_eq!(s.length(), 3);
        assert!(verify_schedule(&s, &comps, &g, &r).is_valid());
    }

    #[test]
    fn single_component_forced() {
        let comps = vec![Component::new(vec![0, 1]).unwrap()];
        let r = RateVector::new(vec![7, 4]);
        let g = ConflictGraph::empty(2);
        let s = extract_schedule(&comps, &r, &[1.0], 1.0 / 7.0, &g).unwrap();
        assert_eq!(s.slots, vec![0; 7]);
    }

    #[test]
    fn repair_covers_missing_links() {
        let (comps, r, g) = example();
        // All mass on {l1,l2}; l3 gets nothing until repair adds {l1,l3}.
        let s = extract_schedule(&comps, &r, &[1.0, 0.0], 1.0 / 3.0, &g).unwrap();
        assert!(verify_schedule(&s, &comps, &g, &r).is_valid());
        assert_eq!(s.counts(2)[1], 2);
        assert_eq!(s.length(), 3);
    }

    #[test]
    fn trim_drops_surplus() {
        let (comps, r, g) = example();
        // Pessimistic value: T0 = 10 slots, trim brings it back to 3.
        let s = extract_schedule(&comps, &r, &[0.5, 0.5], 0.1, &g).unwrap();
        assert!(verify_schedule(&s, &comps, &g, &r).is_valid());
        assert_eq!(s.length(), 3);
    }

    #[test]
    fn nonpositive_value_rejected() {
        let (comps, r, g) = example();
        assert!(extract_schedule(&comps, &r, &[0.5, 0.5], 0.0, &g).is_err());
        assert!(extract_schedule(&comps, &r, &[0.5, 0.5], -1.0, &g).is_err());
        assert!(extract_schedule(&comps, &r, &[0.5, 0.5], f64::NAN, &g).is_err());
    }

    #[test]
    fn conflicting_component_rejected() {
        let (_, r, g) = example();
        let comps = vec![Component::new(vec![0, 1, 2]).unwrap()];
        assert!(extract_schedule(&comps, &r, &[1.0], 0.3, &g).is_err());
    }

    #[test]
    fn verify_names_conflict() {
        let (_, r, g) = example();
        let comps = vec![Component::new(vec![1, 2]).unwrap(), Component::new(vec![0]).unwrap()];
        let s = Schedule::from_counts(&comps, &[2, 3], 3);
        let report = verify_schedule(&s, &comps, &g, &r);
        assert_eq!(
            report.violation,
            Some(Violation::Conflict {
                slot: 0,
                component: 0,
                links: (1, 2)
            })
        );
    }

    #[test]
    fn verify_names_underserved_link() {
        let (comps, r, g) = example();
        let s = Schedule::from_counts(&comps, &[1, 1], 3);
        let report = verify_schedule(&s, &comps, &g, &r);
        assert_eq!(
            report.violation,
            Some(Violation::UnderServed {
                link: 0,
                served: 2,
                required: 3
            })
        );
        assert!(report.violation.unwrap().to_string().contains("link 0"));
    }

    #[test]
    fn verify_catches_bad_bookkeeping() {
        let (comps, r, g) = example();
        let mut s = Schedule::from_counts(&comps, &[1, 2], 3);
        s.served[2] = 5;
        assert!(matches!(
            verify_schedule(&s, &comps, &g, &r).violation,
            Some(Violation::ServedMismatch { link: 2, .. })
        ));
        s.slots.push(9);
        assert!(matches!(
            verify_schedule(&s, &comps, &g, &r).violation,
            Some(Violation::UnknownComponent { component: 9, .. })
        ));
    }

    #[test]
    fn apportion_sums_to_total() {
        assert_eq!(apportion(&[1.0 / 3.0, 2.0 / 3.0], 3), vec![1, 2]);
        assert_eq!(apportion(&[0.5, 0.5], 3), vec![2, 1]);
        assert_eq!(apportion(&[0.25; 4], 2), vec![1, 1, 0, 0]);
    }
}
