//! Conventional scheduling: greedy partial-topology coloring where each link
//! owns exactly one color class.

use serde::{Deserialize, Serialize};

use crate::conflict::ConflictGraph;
use crate::topology::RateVector;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    pub classes: Vec<Vec<usize>>,
}

impl Coloring {
    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }
}

/// Link-index order, the order routes created the links in.
pub fn default_order(n_links: usize) -> Vec<usize> {
    (0..n_links).collect()
}

/// Visits links in `order`; each joins the first existing class it has no
/// conflict with, otherwise it opens a new class.
pub fn greedy_color(g: &ConflictGraph, order: &[usize]) -> Result<Coloring> {
    let n = g.n_links();
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::invalid(format!(
            "link order has {} entries for {n} links",
            order.len()
        )));
    }
    for &l in order {
        if l >= n || std::mem::replace(&mut seen[l], true) {
            return Err(Error::invalid(format!("link order is not a permutation of 0..{n}")));
        }
    }

    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &link in order {
        match classes
            .iter_mut()
            .find(|class| class.iter().all(|&m| !g.conflicts(m, link)))
        {
            Some(class) => class.push(link),
            None => classes.push(vec![link]),
        }
    }
    Ok(Coloring { classes })
}

/// Slots needed when every class stays active until its busiest link is
/// served: the sum over classes of the largest rate in the class.
pub fn coloring_slots(c: &Coloring, r: &RateVector) -> u64 {
    c.classes
        .iter()
        .map(|class| class.iter().map(|&l| u64::from(r.get(l))).max().unwrap_or(0))
        .sum()
}

/// One link activation per slot.
pub fn no_schedule_slots(r: &RateVector) -> u64 {
    r.total()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_link_example() -> (ConflictGraph, RateVector) {
        (
            ConflictGraph::from_pairs(3, &[(1, 2)]).unwrap(),
            RateVector::new(vec![3, 1, 2]),
        )
    }

    #[test]
    fn order_one_two_three() {
        let (g, r) = three_link_example();
        let c = greedy_color(&g, &[0, 1, 2]).unwrap();
        assert_eq!(c.classes, vec![vec![0, 1], vec![2]]);
        assert_eq!(coloring_slots(&c, &r), 5);
    }

    #[test]
    fn order_one_three_two() {
        let (g, r) = three_link_example();
        let c = greedy_color(&g, &[0, 2, 1]).unwrap();
        assert_eq!(c.classes, vec![vec![0, 2], vec![1]]);
        assert_eq!(coloring_slots(&c, &r), 4);
    }

    #[test]
    fn complete_graph_gives_singletons() {
        let g = ConflictGraph::complete(4);
        let c = greedy_color(&g, &[2, 0, 3, 1]).unwrap();
        assert_eq!(c.classes, vec![vec![2], vec![0], vec![3], vec![1]]);
    }

    #[test]
    fn zero_rates_need_no_slots() {
        let (g, _) = three_link_example();
        let c = greedy_color(&g, &default_order(3)).unwrap();
        assert_eq!(coloring_slots(&c, &RateVector::new(vec![0, 0, 0])), 0);
    }

    #[test]
    fn unscheduled_slots() {
        assert_eq!(no_schedule_slots(&RateVector::new(vec![3, 1, 2])), 6);
        assert_eq!(no_schedule_slots(&RateVector::new(vec![1])), 1);
        assert_eq!(no_schedule_slots(&RateVector::default()), 0);
    }

    #[test]
    fn bad_orders_rejected() {
        let (g, _) = three_link_example();
        assert!(greedy_color(&g, &[0, 1]).is_err());
        assert!(greedy_color(&g, &[0, 1, 1]).is_err());
        assert!(greedy_color(&g, &[0, 1, 3]).is_err());
    }
}
