//! TDMA link scheduling for wireless ad-hoc networks.
//!
//! Links that may share a slot are grouped into *components* (independent
//! sets of the link conflict graph). Optimal usage rates for the components
//! come from the mixed equilibrium of a links-vs-components zero-sum game,
//! solved by fictitious play or, for small games, by exact vertex
//! enumeration. A link may belong to several components, so the resulting
//! schedule is a "soft" coloring; the conventional greedy coloring and the
//! unscheduled baseline are provided for comparison.
//!
//! Module map:
//!
//! - [`topology`]: random node placement, session sampling, minimum-power routing, link rates
//! - [`conflict`]: pairwise interference and shared-node conflict graph
//! - [`components`]: independent-set enumeration and dominance pruning
//! - [`coloring`]: greedy partial-topology coloring baseline
//! - [`game`]: payoff matrix, fictitious play, exact oracle, integer schedules
//! - [`harness`]: Monte-Carlo sweeps and CSV output

pub mod coloring;
pub mod components;
pub mod conflict;
mod error;
pub mod game;
pub mod harness;
pub mod topology;

pub use error::{Error, Result};
