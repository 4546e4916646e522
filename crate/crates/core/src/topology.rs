//! Network instances: node placement, unicast sessions, minimum-power
//! routing over the full directed mesh, and per-link activation rates.

use std::cmp::Ordering;
use std::path::Path;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Smallest distance used in path-loss evaluation; co-located nodes are
/// treated as this far apart.
pub const DEFAULT_D_MIN: f64 = 1e-6;

/// Path-loss exponent used throughout the experiments.
pub const DEFAULT_ALPHA: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub tx_power_db: f64,
}

impl Node {
    pub fn new(id: usize, x: f64, y: f64) -> Self {
        Node {
            id,
            x,
            y,
            tx_power_db: 0.0,
        }
    }

    pub fn position(&self) -> (f64, f64) {
        (self.x, self.y)
    }

    pub fn distance_to(&self, pos: (f64, f64)) -> f64 {
        (self.x - pos.0).hypot(self.y - pos.1)
    }
}

/// Directed wireless link `tx -> rx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub id: usize,
    pub tx: usize,
    pub rx: usize,
    pub distance: f64,
}

impl Link {
    pub fn between(id: usize, tx: &Node, rx: &Node) -> Self {
        Link {
            id,
            tx: tx.id,
            rx: rx.id,
            distance: tx.distance_to(rx.position()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub source: usize,
    pub sink: usize,
    pub packets: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationParams {
    pub alpha: f64,
    pub d_min: f64,
}

impl Default for PropagationParams {
    fn default() -> Self {
        PropagationParams {
            alpha: DEFAULT_ALPHA,
            d_min: DEFAULT_D_MIN,
        }
    }
}

impl PropagationParams {
    pub fn new(alpha: f64, d_min: f64) -> Result<Self> {
        let params = PropagationParams { alpha, d_min };
        params.validate()?;
        Ok(params)
    }

    pub fn with_alpha(alpha: f64) -> Result<Self> {
        Self::new(alpha, DEFAULT_D_MIN)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::invalid(format!(
                "attenuation exponent must be finite and positive, got {}",
                self.alpha
            )));
        }
        if !(self.d_min.is_finite() && self.d_min > 0.0) {
            return Err(Error::invalid(format!(
                "distance clamp must be finite and positive, got {}",
                self.d_min
            )));
        }
        Ok(())
    }

    fn clamp(&self, d: f64) -> f64 {
        d.max(self.d_min)
    }

    /// Hop cost for routing: transmit power needed to cover `d`, up to a
    /// constant factor.
    pub fn hop_cost(&self, d: f64) -> f64 {
        self.clamp(d).powf(self.alpha)
    }
}

/// Required activations per scheduled link, indexed like the link list it
/// was built with.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RateVector(Vec<u32>);

impl RateVector {
    pub fn new(rates: Vec<u32>) -> Self {
        RateVector(rates)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, link: usize) -> u32 {
        self.0[link]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&r| u64::from(r)).sum()
    }

    pub fn max(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// Every entry multiplied by `factor`.
    pub fn scaled(&self, factor: u32) -> Self {
        RateVector(self.0.iter().map(|&r| r * factor).collect())
    }
}

impl From<Vec<u32>> for RateVector {
    fn from(rates: Vec<u32>) -> Self {
        RateVector(rates)
    }
}

/// Received power in dB at `rx_pos` from `tx`, with unit proportionality
/// constant: `tx_power_db - 10 * alpha * log10(max(d, d_min))`.
pub fn received_power_db(tx: &Node, rx_pos: (f64, f64), params: &PropagationParams) -> f64 {
    let d = params.clamp(tx.distance_to(rx_pos));
    tx.tx_power_db - 10.0 * params.alpha * d.log10()
}

/// `n` nodes uniform on the unit square, deterministic in `seed`.
pub fn generate_nodes(n: usize, seed: u64) -> Result<Vec<Node>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_nodes_with(&mut rng, n)
}

pub fn generate_nodes_with<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<Vec<Node>> {
    if n == 0 {
        return Err(Error::invalid("node count must be at least 1"));
    }
    Ok((0..n)
        .map(|id| {
            let x = rng.random::<f64>();
            let y = rng.random::<f64>();
            Node::new(id, x, y)
        })
        .collect())
}

/// Draws `n_sessions` distinct ordered source-sink pairs over `n_nodes`
/// nodes. Packet counts are Poisson with the given mean, redrawn until
/// positive.
pub fn sample_sessions<R: Rng + ?Sized>(
    rng: &mut R,
    n_nodes: usize,
    n_sessions: usize,
    poisson_mean: f64,
) -> Result<Vec<Session>> {
    let pairs = n_nodes * n_nodes.saturating_sub(1);
    if n_sessions == 0 {
        return Err(Error::invalid("session count must be at least 1"));
    }
    if n_sessions > pairs {
        return Err(Error::invalid(format!(
            "{n_sessions} sessions requested but only {pairs} distinct source-sink pairs exist among {n_nodes} nodes"
        )));
    }
    let poisson =
        Poisson::new(poisson_mean).map_err(|e| Error::invalid(format!("poisson mean {poisson_mean}: {e}")))?;

    let picks = index::sample(rng, pairs, n_sessions).into_vec();
    let sessions = picks
        .into_iter()
        .map(|p| {
            let source = p / (n_nodes - 1);
            let mut sink = p % (n_nodes - 1);
            if sink >= source {
                sink += 1;
            }
            let packets = loop {
                let draw: f64 = poisson.sample(rng);
                if draw >= 1.0 {
                    break draw as u32;
                }
            };
            Session { source, sink, packets }
        })
        .collect();
    Ok(sessions)
}

#[derive(Debug, Clone)]
struct Label {
    cost: f64,
    path: Vec<usize>,
}

impl Label {
    fn hops(&self) -> usize {
        self.path.len() - 1
    }

    /// Cost, then hop count, then node sequence.
    fn cmp(&self, other: &Label) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then_with(|| self.hops().cmp(&other.hops()))
            .then_with(|| self.path.cmp(&other.path))
    }
}

/// Minimum total-power path from `source` to `sink` over the full directed
/// mesh (hop cost `d^alpha`). Ties go to fewer hops, then to the
/// lexicographically smallest node sequence.
pub fn shortest_path(nodes: &[Node], source: usize, sink: usize, params: &PropagationParams) -> Result<Vec<usize>> {
    let n = nodes.len();
    if source >= n || sink >= n {
        return Err(Error::invalid(format!(
            "session {source}->{sink} references a node outside 0..{n}"
        )));
    }
    if source == sink {
        return Err(Error::invalid(format!(
            "session source and sink are both node {source}"
        )));
    }

    let mut best: Vec<Option<Label>> = vec![None; n];
    let mut settled = vec![false; n];
    best[source] = Some(Label {
        cost: 0.0,
        path: vec![source],
    });

    loop {
        let current = (0..n)
            .filter(|&v| !settled[v])
            .filter_map(|v| best[v].as_ref().map(|l| (v, l)))
            .min_by(|a, b| a.1.cmp(b.1))
            .map(|(v, _)| v);
        let Some(u) = current else { break };
        settled[u] = true;
        if u == sink {
            break;
        }
        let base = best[u].clone().expect("settled node has a label");
        for v in 0..n {
            if settled[v] {
                continue;
            }
            let d = nodes[u].distance_to(nodes[v].position());
            let mut path = base.path.clone();
            path.push(v);
            let candidate = Label {
                cost: base.cost + params.hop_cost(d),
                path,
            };
            let improves = best[v].as_ref().is_none_or(|old| candidate.cmp(old) == Ordering::Less);
            if improves {
                best[v] = Some(candidate);
            }
        }
    }

    best[sink]
        .take()
        .map(|l| l.path)
        .ok_or_else(|| Error::invalid(format!("no route from {source} to {sink}")))
}

/// Total routing cost `sum d^alpha` of a node path.
pub fn path_cost(nodes: &[Node], path: &[usize], params: &PropagationParams) -> f64 {
    path.windows(2)
        .map(|w| params.hop_cost(nodes[w[0]].distance_to(nodes[w[1]].position())))
        .sum()
}

/// One routed node path per session.
pub fn route_sessions(nodes: &[Node], sessions: &[Session], params: &PropagationParams) -> Result<Vec<Vec<usize>>> {
    params.validate()?;
    if nodes.len() < 2 {
        return Err(Error::invalid("routing needs at least two nodes"));
    }
    sessions
        .iter()
        .map(|s| shortest_path(nodes, s.source, s.sink, params))
        .collect()
}

/// Collects the directed links used by positive-packet sessions, in order
/// of first traversal, with the summed packet count of every session
/// crossing each one.
pub fn accumulate_rates(nodes: &[Node], paths: &[Vec<usize>], sessions: &[Session]) -> Result<(Vec<Link>, RateVector)> {
    if paths.len() != sessions.len() {
        return Err(Error::invalid(format!(
            "{} paths for {} sessions",
            paths.len(),
            sessions.len()
        )));
    }
    let mut links: Vec<Link> = Vec::new();
    let mut rates: Vec<u32> = Vec::new();
    for (path, session) in paths.iter().zip(sessions) {
        if session.packets == 0 {
            continue;
        }
        for hop in path.windows(2) {
            let (tx, rx) = (hop[0], hop[1]);
            match links.iter().position(|l| l.tx == tx && l.rx == rx) {
                Some(id) => rates[id] += session.packets,
                None => {
                    links.push(Link::between(links.len(), &nodes[tx], &nodes[rx]));
                    rates.push(session.packets);
                }
            }
        }
    }
    Ok((links, RateVector(rates)))
}

/// A routed instance: everything about the network that does not depend on
/// the interference margin.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutedNetwork {
    pub nodes: Vec<Node>,
    pub sessions: Vec<Session>,
    pub paths: Vec<Vec<usize>>,
    pub links: Vec<Link>,
    pub rates: RateVector,
}

impl RoutedNetwork {
    pub fn build(nodes: Vec<Node>, sessions: Vec<Session>, params: &PropagationParams) -> Result<Self> {
        let paths = route_sessions(&nodes, &sessions, params)?;
        let (links, rates) = accumulate_rates(&nodes, &paths, &sessions)?;
        Ok(RoutedNetwork {
            nodes,
            sessions,
            paths,
            links,
            rates,
        })
    }

    pub fn total_packets(&self) -> u64 {
        self.sessions.iter().map(|s| u64::from(s.packets)).sum()
    }
}

/// On-disk topology: node positions and unicast sessions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyFixture {
    pub nodes: Vec<Node>,
    pub sessions: Vec<Session>,
}

impl TopologyFixture {
    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::invalid("topology has no nodes"));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id != i {
                return Err(Error::invalid(format!(
                    "node ids must be dense and ordered; position {i} holds id {}",
                    node.id
                )));
            }
            let inside = |v: f64| (0.0..=1.0).contains(&v);
            if !inside(node.x) || !inside(node.y) {
                return Err(Error::invalid(format!(
                    "node {i} at ({}, {}) lies outside the unit square",
                    node.x, node.y
                )));
            }
            if !node.tx_power_db.is_finite() {
                return Err(Error::invalid(format!("node {i} has non-finite transmit power")));
            }
        }
        let n = self.nodes.len();
        for (i, s) in self.sessions.iter().enumerate() {
            if s.source >= n || s.sink >= n {
                return Err(Error::invalid(format!("session {i} references a node outside 0..{n}")));
            }
            if s.source == s.sink {
                return Err(Error::invalid(format!("session {i} has source equal to sink")));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let fixture: TopologyFixture =
            serde_json::from_str(text).map_err(|e| Error::invalid(format!("topology fixture: {e}")))?;
        fixture.validate()?;
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
        serde_json::to_string_pretty(self).expect("topology serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> Vec<Node> {
        xs.iter().enumerate().map(|(i, &x)| Node::new(i, x, 0.0)).collect()
    }

    #[test]
    fn generated_nodes_stay_in_unit_square() {
        let nodes = generate_nodes(10, 7).unwrap();
        assert_eq!(nodes.len(), 10);
        for (i, n) in nodes.iter().enumerate() {
            assert_eq!(n.id, i);
            assert!((0.0..=1.0).contains(&n.x) && (0.0..=1.0).contains(&n.y));
            assert_eq!(n.tx_power_db, 0.0);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(generate_nodes(1, 42).unwrap(), generate_nodes(1, 42).unwrap());
    }

    #[test]
    fn zero_nodes_rejected() {
        assert!(matches!(generate_nodes(0, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn received_power_examples() {
        let p4 = PropagationParams::default();
        let tx = Node::new(0, 0.0, 0.0);
        assert_eq!(received_power_db(&tx, (1.0, 0.0), &p4), 0.0);
        assert!((received_power_db(&tx, (0.1, 0.0), &p4) - 40.0).abs() < 1e-12);
        let p2 = PropagationParams::with_alpha(2.0).unwrap();
        // 20 * log10(2)
        assert!((received_power_db(&tx, (0.5, 0.0), &p2) - 6.020599913279624).abs() < 1e-12);
    }

    #[test]
    fn received_power_is_clamped() {
        let p = PropagationParams::default();
        let tx = Node::new(0, 0.3, 0.3);
        let at_zero = received_power_db(&tx, (0.3, 0.3), &p);
        assert!(at_zero.is_finite());
        assert!((at_zero - 240.0).abs() < 1e-9);
    }

    #[test]
    fn two_nodes_route_directly() {
        let nodes = line(&[0.0, 0.3]);
        let path = shortest_path(&nodes, 0, 1, &PropagationParams::default()).unwrap();
        assert_eq!(path, vec![0, 1]);
    }

    #[test]
    fn collinear_relay_preferred() {
        let nodes = line(&[0.0, 0.5, 1.0]);
        let params = PropagationParams::default();
        let path = shortest_path(&nodes, 0, 2, &params).unwrap();
        assert_eq!(path, vec![0, 1, 2]);
        assert!((path_cost(&nodes, &path, &params) - 0.125).abs() < 1e-12);
        assert!((path_cost(&nodes, &[0, 2], &params) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equal_cost_tie_goes_to_fewer_hops_then_lexicographic() {
        // alpha = 1 on a line makes relaying cost-neutral, so the direct hop wins.
        let nodes = line(&[0.0, 0.25, 0.5]);
        let p1 = PropagationParams::with_alpha(1.0).unwrap();
        assert_eq!(shortest_path(&nodes, 0, 2, &p1).unwrap(), vec![0, 2]);
        // Mirror-image relays: both two-hop routes cost the same.
        let nodes = vec![
            Node::new(0, 0.0, 0.5),
            Node::new(1, 0.5, 0.4),
            Node::new(2, 0.5, 0.6),
            Node::new(3, 1.0, 0.5),
        ];
        let p = PropagationParams::default();
        assert_eq!(shortest_path(&nodes, 0, 3, &p).unwrap(), vec![0, 1, 3]);
    }

    #[test]
    fn source_equal_sink_rejected() {
        let nodes = line(&[0.0, 0.5]);
        let sessions = [Session {
            source: 1,
            sink: 1,
            packets: 1,
        }];
        let err = route_sessions(&nodes, &sessions, &PropagationParams::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn rates_single_session() {
        let nodes = line(&[0.0, 0.5, 1.0]);
        let sessions = [Session {
            source: 0,
            sink: 2,
            packets: 3,
        }];
        let paths = vec![vec![0, 1, 2]];
        let (links, rates) = accumulate_rates(&nodes, &paths, &sessions).unwrap();
        assert_eq!(
            links.iter().map(|l| (l.tx, l.rx)).collect::<Vec<_>>(),
            vec![(0, 1), (1, 2)]
        );
        assert_eq!(rates.as_slice(), &[3, 3]);
        assert!((links[0].distance - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rates_add_over_shared_links() {
        let nodes = line(&[0.0, 0.3, 0.6, 0.9]);
        let sessions = [
            Session {
                source: 0,
                sink: 2,
                packets: 2,
            },
            Session {
                source: 1,
                sink: 3,
                packets: 3,
            },
        ];
        let paths = vec![vec![0, 1, 2], vec![1, 2, 3]];
        let (links, rates) = accumulate_rates(&nodes, &paths, &sessions).unwrap();
        let shared = links.iter().position(|l| l.tx == 1 && l.rx == 2).unwrap();
        assert_eq!(rates.get(shared), 5);
        assert_eq!(links.len(), 3);
    }

    #[test]
    fn zero_packet_session_adds_nothing() {
        let nodes = line(&[0.0, 0.5]);
        let sessions = [Session {
            source: 0,
            sink: 1,
            packets: 0,
        }];
        let (links, rates) = accumulate_rates(&nodes, &[vec![0, 1]], &sessions).unwrap();
        assert!(links.is_empty());
        assert!(rates.is_empty());
    }

    #[test]
    fn too_many_sessions_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let err = sample_sessions(&mut rng, 3, 7, 5.0).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
        assert_eq!(sample_sessions(&mut rng, 3, 6, 5.0).unwrap().len(), 6);
    }

    #[test]
    fn sampled_sessions_are_distinct_and_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sessions = sample_sessions(&mut rng, 5, 20, 0.5).unwrap();
        let mut pairs: Vec<_> = sessions.iter().map(|s| (s.source, s.sink)).collect();
        pairs.sort();
        pairs.dedup();
        assert_eq!(pairs.len(), 20);
        assert!(sessions.iter().all(|s| s.source != s.sink && s.packets >= 1));
    }

    #[test]
    fn fixture_validation() {
        let ok = r#"{"nodes":[{"id":0,"x":0.1,"y":0.2},{"id":1,"x":0.5,"y":0.5,"tx_power_db":3.0}],
                     "sessions":[{"source":0,"sink":1,"packets":4}]}"#;
        let fixture = TopologyFixture::from_json(ok).unwrap();
        assert_eq!(fixture.nodes[1].tx_power_db, 3.0);
        assert_eq!(TopologyFixture::from_json(&fixture.to_json()).unwrap(), fixture);

        let outside = ok.replace("0.5,\"y\"", "1.5,\"y\"");
        assert!(TopologyFixture::from_json(&outside).is_err());
        let sparse = ok.replace("\"id\":1", "\"id\":2");
        assert!(TopologyFixture::from_json(&sparse).is_err());
        let loop_session = ok.replace("\"sink\":1", "\"sink\":0");
        assert!(TopologyFixture::from_json(&loop_session).is_err());
    }
}
