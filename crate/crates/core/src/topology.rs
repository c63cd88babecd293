//! Fibre network model: nodes, links, spans, and inline amplifiers.
//!
//! Topologies are loaded from a versioned JSON schema. Every link is an
//! ordered chain of fibre spans, each followed by an amplifier whose gain
//! is normalised to exactly compensate the span loss at load time, so a
//! signal leaves every link at its launch power. Chromatic dispersion may
//! be given either as `beta2_ps2_per_km` or as `dispersion_ps_nm_km`; the
//! latter is converted at the 1550 nm reference wavelength.
//!
//! Links are bidirectional; endpoint order carries no meaning beyond
//! naming.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::dispersion_to_beta2_ps2_km;
use crate::Real;

/// Version accepted by [`load_topology`].
pub const TOPOLOGY_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("failed to read topology file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("topology schema error: {0}")]
    Schema(String),
    #[error("unsupported topology schema_version {found} (expected {TOPOLOGY_SCHEMA_VERSION})")]
    SchemaVersion { found: u32 },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("unknown link id {0}")]
    UnknownLink(String),
    #[error("unknown node id {0}")]
    UnknownNode(String),
}

/// Add/drop site or pure transit site in the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub name: String,
    /// Whether traffic may originate or terminate here.
    pub add_drop: bool,
}

/// One amplified fibre section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberSpan {
    pub length_km: Real,
    pub attenuation_db_per_km: Real,
    /// Group-velocity dispersion, ps^2/km (negative in the anomalous
    /// regime used by standard single-mode fibre).
    pub beta2_ps2_per_km: Real,
    /// Nonlinear coefficient, 1/(W km).
    pub gamma_per_w_km: Real,
}

impl FiberSpan {
    /// Lumped span loss in dB.
    pub fn loss_db(&self) -> Real {
        self.length_km * self.attenuation_db_per_km
    }
}

/// Lumped amplifier at the end of a span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Amplifier {
    pub noise_figure_db: Real,
    /// Normalised to the preceding span's loss at load time.
    pub gain_db: Real,
}

/// Bidirectional fibre link: an ordered chain of amplified spans.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub id: String,
    /// Endpoint node ids; order is cosmetic.
    pub endpoints: (String, String),
    pub spans: Vec<(FiberSpan, Amplifier)>,
}

impl Link {
    /// Total fibre length in km.
    pub fn length_km(&self) -> Real {
        self.spans.iter().map(|(s, _)| s.length_km).sum()
    }

    /// Total lumped loss in dB.
    pub fn loss_db(&self) -> Real {
        self.spans.iter().map(|(s, _)| s.loss_db()).sum()
    }

    /// The opposite endpoint, if `node` is one of the two.
    pub fn other_endpoint(&self, node: &str) -> Option<&str> {
        if self.endpoints.0 == node {
            Some(&self.endpoints.1)
        } else if self.endpoints.1 == node {
            Some(&self.endpoints.0)
        } else {
            None
        }
    }
}

/// Validated in-memory network.
#[derive(Debug, Clone)]
pub struct NetworkTopology {
    nodes: Vec<Node>,
    links: Vec<Link>,
    node_index: BTreeMap<String, usize>,
    link_index: BTreeMap<String, usize>,
    /// Non-fatal findings from validation (e.g. a disconnected graph).
    pub warnings: Vec<String>,
}

impl NetworkTopology {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.node_index.get(id).map(|&i| &self.nodes[i])
    }

    pub fn link(&self, id: &str) -> Option<&Link> {
        self.link_index.get(id).map(|&i| &self.links[i])
    }

    pub fn contains_node(&self, id: &str) -> bool {
        self.node_index.contains_key(id)
    }

    /// Links incident to `node`, in file order.
    pub fn incident_links(&self, node: &str) -> Vec<&Link> {
        self.links
            .iter()
            .filter(|l| l.endpoints.0 == node || l.endpoints.1 == node)
            .collect()
    }

    /// Sum of link lengths over a sequence of link ids.
    ///
    /// Purely additive; contiguity is the route layer's concern.
    pub fn path_length_km(&self, link_ids: &[String]) -> Result<Real, TopologyError> {
        let mut total = 0.0;
        for id in link_ids {
            let link = self
                .link(id)
                .ok_or_else(|| TopologyError::UnknownLink(id.clone()))?;
            total += link.length_km();
        }
        Ok(total)
    }

    /// All spans (with their amplifiers) along a sequence of link ids, in
    /// traversal order. Span order within a link follows the file; the
    /// model is symmetric so direction does not matter.
    pub fn path_spans(&self, link_ids: &[String]) -> Result<Vec<&(FiberSpan, Amplifier)>, TopologyError> {
        let mut spans = Vec::new();
        for id in link_ids {
            let link = self
                .link(id)
                .ok_or_else(|| TopologyError::UnknownLink(id.clone()))?;
            spans.extend(link.spans.iter());
        }
        Ok(spans)
    }

    /// True when every node is reachable from every other.
    pub fn is_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            let id = &self.nodes[i].id;
            for link in self.links.iter() {
                if let Some(other) = link.other_endpoint(id) {
                    let j = self.node_index[other];
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

// --- file schema -----------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct TopologyFile {
    schema_version: u32,
    nodes: Vec<Node>,
    links: Vec<LinkSchema>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LinkSchema {
    id: String,
    endpoints: [String; 2],
    spans: Vec<SpanSchema>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SpanSchema {
    length_km: Real,
    attenuation_db_per_km: Real,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta2_ps2_per_km: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dispersion_ps_nm_km: Option<Real>,
    gamma_per_w_km: Real,
    amp_noise_figure_db: Real,
}

fn invalid(path: String, message: impl Into<String>) -> TopologyError {
    TopologyError::Invalid {
        path,
        message: message.into(),
    }
}

fn check_finite(value: Real, path: &str) -> Result<(), TopologyError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(invalid(path.to_string(), "must be finite"))
    }
}

/// Parses and validates a topology.
///
/// Amplifier gains are normalised to their span losses here; the loaded
/// model always has exact per-span loss compensation.
pub fn load_topology(path: impl AsRef<Path>) -> Result<NetworkTopology, TopologyError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| TopologyError::Io {
        path: path.display().to_string(),
        source,
    })?;
    topology_from_str(&text)
}

/// Parses and validates a topology from JSON text.
pub fn topology_from_str(text: &str) -> Result<NetworkTopology, TopologyError> {
    let file: TopologyFile =
        serde_json::from_str(text).map_err(|e| TopologyError::Schema(e.to_string()))?;
    if file.schema_version != TOPOLOGY_SCHEMA_VERSION {
        return Err(TopologyError::SchemaVersion {
            found: file.schema_version,
        });
    }

    let mut node_index = BTreeMap::new();
    for (i, node) in file.nodes.iter().enumerate() {
        if node.id.is_empty() {
            return Err(invalid(format!("nodes[{i}].id"), "must not be empty"));
        }
        if node_index.insert(node.id.clone(), i).is_some() {
            return Err(invalid(
                format!("nodes[{i}].id"),
                format!("duplicate node id {:?}", node.id),
            ));
        }
    }

    let mut links = Vec::with_capacity(file.links.len());
    let mut link_index = BTreeMap::new();
    for (i, link) in file.links.into_iter().enumerate() {
        let at = |field: &str| format!("links[{i}].{field}");
        if link_index.insert(link.id.clone(), i).is_some() {
            return Err(invalid(at("id"), format!("duplicate link id {:?}", link.id)));
        }
        let [a, b] = link.endpoints;
        for end in [&a, &b] {
            if !node_index.contains_key(end.as_str()) {
                return Err(invalid(
                    at("endpoints"),
                    format!("endpoint {end:?} is not a declared node"),
                ));
            }
        }
        if a == b {
            return Err(invalid(at("endpoints"), "link endpoints must differ"));
        }
        if link.spans.is_empty() {
            return Err(invalid(at("spans"), "a link needs at least one span"));
        }

        let mut spans = Vec::with_capacity(link.spans.len());
        for (j, span) in link.spans.into_iter().enumerate() {
            let at = |field: &str| format!("links[{i}].spans[{j}].{field}");
            check_finite(span.length_km, &at("length_km"))?;
            check_finite(span.attenuation_db_per_km, &at("attenuation_db_per_km"))?;
            check_finite(span.gamma_per_w_km, &at("gamma_per_w_km"))?;
            check_finite(span.amp_noise_figure_db, &at("amp_noise_figure_db"))?;
            if span.length_km <= 0.0 {
                return Err(invalid(at("length_km"), "must be > 0"));
            }
            if span.attenuation_db_per_km <= 0.0 {
                return Err(invalid(at("attenuation_db_per_km"), "must be > 0"));
            }
            if span.gamma_per_w_km < 0.0 {
                return Err(invalid(at("gamma_per_w_km"), "must be >= 0"));
            }
            if span.amp_noise_figure_db < 0.0 {
                return Err(invalid(at("amp_noise_figure_db"), "must be >= 0"));
            }
            let beta2 = match (span.beta2_ps2_per_km, span.dispersion_ps_nm_km) {
                (Some(b), None) => b,
                (None, Some(d)) => dispersion_to_beta2_ps2_km(d),
                (Some(_), Some(_)) => {
                    return Err(invalid(
                        at("beta2_ps2_per_km"),
                        "give either beta2_ps2_per_km or dispersion_ps_nm_km, not both",
                    ))
                }
                (None, None) => {
                    return Err(invalid(
                        at("beta2_ps2_per_km"),
                        "one of beta2_ps2_per_km or dispersion_ps_nm_km is required",
                    ))
                }
            };
            check_finite(beta2, &at("beta2_ps2_per_km"))?;
            let fiber = FiberSpan {
                length_km: span.length_km,
                attenuation_db_per_km: span.attenuation_db_per_km,
                beta2_ps2_per_km: beta2,
                gamma_per_w_km: span.gamma_per_w_km,
            };
            let amplifier = Amplifier {
                noise_figure_db: span.amp_noise_figure_db,
                gain_db: fiber.loss_db(),
            };
            spans.push((fiber, amplifier));
        }

        links.push(Link {
            id: link.id,
            endpoints: (a, b),
            spans,
        });
    }

    let mut topology = NetworkTopology {
        nodes: file.nodes,
        links,
        node_index,
        link_index,
        warnings: Vec::new(),
    };
    if !topology.is_connected() {
        topology
            .warnings
            .push("topology graph is not connected; some node pairs are unroutable".to_string());
    }
    Ok(topology)
}

/// Serialises a topology back to its file schema.
///
/// Dispersion is always written as `beta2_ps2_per_km`; a file that used
/// `dispersion_ps_nm_km` round-trips to the identical in-memory model.
pub fn save_topology(topology: &NetworkTopology, path: impl AsRef<Path>) -> Result<(), TopologyError> {
    let text = topology_to_string(topology);
    std::fs::write(path.as_ref(), text).map_err(|source| TopologyError::Io {
        path: path.as_ref().display().to_string(),
        source,
    })
}

/// Schema-shaped JSON for a topology.
pub fn topology_to_string(topology: &NetworkTopology) -> String {
    let file = TopologyFile {
        schema_version: TOPOLOGY_SCHEMA_VERSION,
        nodes: topology.nodes.clone(),
        links: topology
            .links
            .iter()
            .map(|l| LinkSchema {
                id: l.id.clone(),
                endpoints: [l.endpoints.0.clone(), l.endpoints.1.clone()],
                spans: l
                    .spans
                    .iter()
                    .map(|(s, a)| SpanSchema {
                        length_km: s.length_km,
                        attenuation_db_per_km: s.attenuation_db_per_km,
                        beta2_ps2_per_km: Some(s.beta2_ps2_per_km),
                        dispersion_ps_nm_km: None,
                        gamma_per_w_km: s.gamma_per_w_km,
                        amp_noise_figure_db: a.noise_figure_db,
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("topology serialisation cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn two_node_json() -> String {
        r#"{
            "schema_version": 1,
            "nodes": [
                {"id": "A", "name": "Alpha", "add_drop": true},
                {"id": "B", "name": "Bravo", "add_drop": true}
            ],
            "links": [
                {
                    "id": "A-B",
                    "endpoints": ["A", "B"],
                    "spans": [
                        {
                            "length_km": 80.0,
                            "attenuation_db_per_km": 0.2,
                            "beta2_ps2_per_km": -21.3,
                            "gamma_per_w_km": 1.3,
                            "amp_noise_figure_db": 5.0
                        }
                    ]
                }
            ]
        }"#
        .to_string()
    }

    #[test]
    fn loads_two_node_network_and_normalises_gain() {
        let topo = topology_from_str(&two_node_json()).unwrap();
        assert_eq!(topo.nodes().len(), 2);
        assert_eq!(topo.links().len(), 1);
        let link = topo.link("A-B").unwrap();
        let (span, amp) = &link.spans[0];
        assert_relative_eq!(amp.gain_db, span.loss_db(), epsilon = 1e-9);
        assert_relative_eq!(amp.gain_db, 16.0, epsilon = 1e-9);
        assert!(topo.warnings.is_empty());
    }

    #[test]
    fn link_loss_sums_spans() {
        let mut json: serde_json::Value = serde_json::from_str(&two_node_json()).unwrap();
        json["links"][0]["spans"] = serde_json::json!([
            {"length_km": 16.0, "attenuation_db_per_km": 1.0,
             "beta2_ps2_per_km": -21.3, "gamma_per_w_km": 1.3, "amp_noise_figure_db": 5.0},
            {"length_km": 100.0, "attenuation_db_per_km": 0.2,
             "beta2_ps2_per_km": -21.3, "gamma_per_w_km": 1.3, "amp_noise_figure_db": 5.0}
        ]);
        let topo = topology_from_str(&json.to_string()).unwrap();
        let link = topo.link("A-B").unwrap();
        assert_relative_eq!(link.spans[0].0.loss_db(), 16.0, epsilon = 1e-12);
        assert_relative_eq!(link.loss_db(), 36.0, epsilon = 1e-12);
        assert_relative_eq!(link.length_km(), 116.0, epsilon = 1e-12);
        assert_relative_eq!(
            topo.path_length_km(&["A-B".to_string()]).unwrap(),
            116.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn dispersion_input_converts_to_beta2() {
        let mut json: serde_json::Value = serde_json::from_str(&two_node_json()).unwrap();
        let span = &mut json["links"][0]["spans"][0];
        span.as_object_mut().unwrap().remove("beta2_ps2_per_km");
        span["dispersion_ps_nm_km"] = serde_json::json!(16.7);
        let topo = topology_from_str(&json.to_string()).unwrap();
        let beta2 = topo.link("A-B").unwrap().spans[0].0.beta2_ps2_per_km;
        assert_relative_eq!(beta2, -21.3, epsilon = 0.05);
    }

    #[test]
    fn rejects_dangling_endpoint() {
        let json = two_node_json().replace("[\"A\", \"B\"]", "[\"A\", \"X\"]");
        let err = topology_from_str(&json).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("links[0].endpoints"), "got: {msg}");
        assert!(msg.contains("\"X\""), "got: {msg}");
    }

    #[test]
    fn rejects_duplicate_ids_and_bad_spans() {
        let mut json: serde_json::Value = serde_json::from_str(&two_node_json()).unwrap();
        let node = json["nodes"][0].clone();
        json["nodes"][1] = node;
        assert!(topology_from_str(&json.to_string())
            .unwrap_err()
            .to_string()
            .contains("duplicate node id"));

        let mut json: serde_json::Value = serde_json::from_str(&two_node_json()).unwrap();
        json["links"][0]["spans"][0]["length_km"] = serde_json::json!(0.0);
        assert!(topology_from_str(&json.to_string())
            .unwrap_err()
            .to_string()
            .contains("links[0].spans[0].length_km"));

        let mut json: serde_json::Value = serde_json::from_str(&two_node_json()).unwrap();
        json["links"][0]["spans"][0]["dispersion_ps_nm_km"] = serde_json::json!(16.7);
        assert!(topology_from_str(&json.to_string())
            .unwrap_err()
            .to_string()
            .contains("not both"));
    }

    #[test]
    fn rejects_wrong_schema_version() {
        let json = two_node_json().replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(matches!(
            topology_from_str(&json).unwrap_err(),
            TopologyError::SchemaVersion { found: 2 }
        ));
    }

    #[test]
    fn warns_on_disconnected_graph() {
        let mut json: serde_json::Value = serde_json::from_str(&two_node_json()).unwrap();
        json["nodes"]
            .as_array_mut()
            .unwrap()
            .push(serde_json::json!({"id": "C", "name": "Charlie", "add_drop": false}));
        let topo = topology_from_str(&json.to_string()).unwrap();
        assert!(!topo.is_connected());
        assert_eq!(topo.warnings.len(), 1);
    }

    #[test]
    fn round_trip_preserves_the_model() {
        let mut json: serde_json::Value = serde_json::from_str(&two_node_json()).unwrap();
        let span = &mut json["links"][0]["spans"][0];
        span.as_object_mut().unwrap().remove("beta2_ps2_per_km");
        span["dispersion_ps_nm_km"] = serde_json::json!(16.7);
        let first = topology_from_str(&json.to_string()).unwrap();
        let second = topology_from_str(&topology_to_string(&first)).unwrap();
        assert_eq!(first.nodes(), second.nodes());
        assert_eq!(first.links(), second.links());
    }

    #[test]
    fn path_spans_flattens_in_order() {
        let mut json: serde_json::Value = serde_json::from_str(&two_node_json()).unwrap();
        json["nodes"]
            .as_array_mut()
            .unwrap()
            .push(serde_json::json!({"id": "C", "name": "Charlie", "add_drop": true}));
        json["links"].as_array_mut().unwrap().push(serde_json::json!({
            "id": "B-C",
            "endpoints": ["B", "C"],
            "spans": [
                {"length_km": 50.0, "attenuation_db_per_km": 0.25,
                 "beta2_ps2_per_km": -21.3, "gamma_per_w_km": 1.3, "amp_noise_figure_db": 4.5},
                {"length_km": 60.0, "attenuation_db_per_km": 0.25,
                 "beta2_ps2_per_km": -21.3, "gamma_per_w_km": 1.3, "amp_noise_figure_db": 4.5}
            ]
        }));
        let topo = topology_from_str(&json.to_string()).unwrap();
        let ids = vec!["A-B".to_string(), "B-C".to_string()];
        let spans = topo.path_spans(&ids).unwrap();
        assert_eq!(spans.len(), 3);
        assert_relative_eq!(spans[0].0.length_km, 80.0);
        assert_relative_eq!(spans[2].0.length_km, 60.0);
        assert!(matches!(
            topo.path_spans(&["nope".to_string()]).unwrap_err(),
            TopologyError::UnknownLink(_)
        ));
    }
}
