//! Route computation and regenerator placement.
//!
//! Routing is single shortest path by total fibre length. Ties are broken
//! by comparing the node walk, then the link walk, lexicographically by
//! id, which makes the result independent of file order and identical
//! across runs. Demands whose route exceeds the optical reach limits are
//! split at intermediate nodes into back-to-back segments by a greedy
//! farthest-feasible sweep; on a fixed path that greedy uses the minimum
//! possible number of regenerators.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::topology::NetworkTopology;
use crate::traffic::TrafficDemand;
use crate::Real;

#[derive(Debug, Error)]
pub enum RoutingError {
    #[error("unknown node id {0}")]
    UnknownNode(String),
    #[error("source and destination must differ (got {0})")]
    SameEndpoints(String),
    #[error("no route between {from} and {to}")]
    NoRoute { from: String, to: String },
    #[error(
        "link {link} is {length_km} km, beyond the {max_length_km} km reach; \
         no regenerator placement can fix a single over-reach link"
    )]
    SingleLinkTooLong {
        link: String,
        length_km: Real,
        max_length_km: Real,
    },
}

/// A simple path through the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    /// Traversed link ids, in order.
    pub links: Vec<String>,
    /// Visited node ids, in order; `links.len() + 1` entries.
    pub node_walk: Vec<String>,
    /// Total fibre length, km.
    pub length_km: Real,
}

impl Route {
    /// Nodes strictly between the endpoints.
    pub fn intermediate_count(&self) -> usize {
        self.node_walk.len().saturating_sub(2)
    }

    pub fn source(&self) -> &str {
        self.node_walk.first().expect("routes are non-empty")
    }

    pub fn destination(&self) -> &str {
        self.node_walk.last().expect("routes are non-empty")
    }
}

/// Optical reach of a transparent segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReachLimits {
    pub max_length_km: Real,
    pub max_intermediate_nodes: usize,
}

/// A demand after regenerator placement.
#[derive(Debug, Clone, PartialEq)]
pub struct RegeneratedDemand {
    pub original_id: String,
    /// Transparent segments in path order, each carrying the full
    /// original rate. A demand within reach has exactly one segment
    /// holding the unchanged original demand.
    pub segments: Vec<(Route, TrafficDemand)>,
    /// Nodes where the demand is electrically regenerated, in path order.
    pub regen_nodes: Vec<String>,
}

#[derive(PartialEq)]
struct HeapKey {
    length_km: Real,
    /// Node walk mapped to id-sorted ranks; lexicographic order over this
    /// equals lexicographic order over the id sequences.
    node_key: Vec<u32>,
    link_key: Vec<u32>,
}

impl Eq for HeapKey {}

impl Ord for HeapKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.length_km
            .total_cmp(&other.length_km)
            .then_with(|| self.node_key.cmp(&other.node_key))
            .then_with(|| self.link_key.cmp(&other.link_key))
    }
}

impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct HeapEntry {
    key: HeapKey,
    node: usize,
    links: Vec<usize>,
    nodes: Vec<usize>,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}
impl Eq for HeapEntry {}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.cmp(&other.key)
    }
}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Ranks of `items` under their sorted order; a permutation, so comparing
/// rank sequences is the same as comparing the underlying id sequences.
fn sorted_ranks<T: Ord>(items: &[T]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| items[a].cmp(&items[b]));
    let mut ranks = vec![0u32; items.len()];
    for (rank, idx) in order.into_iter().enumerate() {
        ranks[idx] = rank as u32;
    }
    ranks
}

/// Shortest route by total length with deterministic tie-breaking.
///
/// Dijkstra over an extended key (length, node walk, link walk). Appending
/// a fixed step preserves the order of keys at a node, so the first time a
/// node is settled its key is final; positive span lengths keep every
/// returned walk simple.
pub fn shortest_route(
    topology: &NetworkTopology,
    source: &str,
    destination: &str,
) -> Result<Route, RoutingError> {
    for id in [source, destination] {
        if !topology.contains_node(id) {
            return Err(RoutingError::UnknownNode(id.to_string()));
        }
    }
    if source == destination {
        return Err(RoutingError::SameEndpoints(source.to_string()));
    }

    let nodes = topology.nodes();
    let links = topology.links();
    let node_idx = |id: &str| nodes.iter().position(|n| n.id == id).expect("checked above");
    let node_ids: Vec<&str> = nodes.iter().map(|n| n.id.as_str()).collect();
    let link_ids: Vec<&str> = links.iter().map(|l| l.id.as_str()).collect();
    let node_rank = sorted_ranks(&node_ids);
    let link_rank = sorted_ranks(&link_ids);

    let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes.len()];
    for (li, link) in links.iter().enumerate() {
        let a = node_idx(&link.endpoints.0);
        let b = node_idx(&link.endpoints.1);
        adjacency[a].push((li, b));
        adjacency[b].push((li, a));
    }

    let src = node_idx(source);
    let dst = node_idx(destination);
    let mut settled = vec![false; nodes.len()];
    let mut heap = BinaryHeap::new();
    heap.push(Reverse(HeapEntry {
        key: HeapKey {
            length_km: 0.0,
            node_key: vec![node_rank[src]],
            link_key: Vec::new(),
        },
        node: src,
        links: Vec::new(),
        nodes: vec![src],
    }));

    while let Some(Reverse(entry)) = heap.pop() {
        if settled[entry.node] {
            continue;
        }
        settled[entry.node] = true;
        if entry.node == dst {
            return Ok(Route {
                links: entry.links.iter().map(|&l| links[l].id.clone()).collect(),
                node_walk: entry.nodes.iter().map(|&n| nodes[n].id.clone()).collect(),
                length_km: entry.key.length_km,
            });
        }
        for &(li, other) in &adjacency[entry.node] {
            if settled[other] {
                continue;
            }
            let mut node_key = entry.key.node_key.clone();
            node_key.push(node_rank[other]);
            let mut link_key = entry.key.link_key.clone();
            link_key.push(link_rank[li]);
            let mut walk_links = entry.links.clone();
            walk_links.push(li);
            let mut walk_nodes = entry.nodes.clone();
            walk_nodes.push(other);
            heap.push(Reverse(HeapEntry {
                key: HeapKey {
                    length_km: entry.key.length_km + links[li].length_km(),
                    node_key,
                    link_key,
                },
                node: other,
                links: walk_links,
                nodes: walk_nodes,
            }));
        }
    }

    Err(RoutingError::NoRoute {
        from: source.to_string(),
        to: destination.to_string(),
    })
}

/// Splits a routed demand into transparent segments within reach.
///
/// Greedy farthest-feasible: links are consumed in order, and a cut is
/// made at the last node that keeps the running segment within both the
/// length and the intermediate-node limits. Each cut node hosts an
/// electrical regenerator; every segment carries the original rate.
pub fn place_regenerators(
    topology: &NetworkTopology,
    route: &Route,
    demand: &TrafficDemand,
    limits: &ReachLimits,
) -> Result<RegeneratedDemand, RoutingError> {
    let link_lengths: Vec<Real> = route
        .links
        .iter()
        .map(|id| topology.link(id).expect("route links exist in topology").length_km())
        .collect();
    for (id, &len) in route.links.iter().zip(&link_lengths) {
        if len > limits.max_length_km {
            return Err(RoutingError::SingleLinkTooLong {
                link: id.clone(),
                length_km: len,
                max_length_km: limits.max_length_km,
            });
        }
    }

    // Segment boundaries as indices into route.node_walk.
    let mut boundaries = vec![0usize];
    let mut seg_len = 0.0;
    let mut seg_links = 0usize;
    for (k, &len) in link_lengths.iter().enumerate() {
        let fits = seg_links == 0
            || (seg_len + len <= limits.max_length_km && seg_links <= limits.max_intermediate_nodes);
        if fits {
            seg_len += len;
            seg_links += 1;
        } else {
            boundaries.push(k);
            seg_len = len;
            seg_links = 1;
        }
    }
    boundaries.push(route.links.len());

    if boundaries.len() == 2 {
        return Ok(RegeneratedDemand {
            original_id: demand.id.clone(),
            segments: vec![(route.clone(), demand.clone())],
            regen_nodes: Vec::new(),
        });
    }

    let mut segments = Vec::with_capacity(boundaries.len() - 1);
    let mut regen_nodes = Vec::with_capacity(boundaries.len() - 2);
    for (s, window) in boundaries.windows(2).enumerate() {
        let (start, end) = (window[0], window[1]);
        let seg_route = Route {
            links: route.links[start..end].to_vec(),
            node_walk: route.node_walk[start..=end].to_vec(),
            length_km: link_lengths[start..end].iter().sum(),
        };
        let seg_demand = TrafficDemand {
            id: format!("{}#s{}", demand.id, s),
            source: seg_route.source().to_string(),
            destination: seg_route.destination().to_string(),
            rate_by_period: demand.rate_by_period.clone(),
        };
        if end < route.links.len() {
            regen_nodes.push(route.node_walk[end].clone());
        }
        segments.push((seg_route, seg_demand));
    }

    Ok(RegeneratedDemand {
        original_id: demand.id.clone(),
        segments,
        regen_nodes,
    })
}
