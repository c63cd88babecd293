//! Traffic demands over planning periods: generation and grouping.
//!
//! A traffic scenario declares per-demand base rates and growth factors;
//! [`GrowthModel::generate_periods`] expands them into one rate per
//! planning period, quantised to whole Gbps so every downstream
//! comparison is exact. Optional bounded jitter draws from a per-demand
//! seeded stream and is bit-reproducible across runs and platforms.
//!
//! After routing (and regenerator splitting), demands sharing the same
//! source, destination, and route are merged by [`group_demands`]; the
//! group is the unit for which GSNR is bounded and transceivers are
//! allocated.

use std::collections::BTreeMap;
use std::path::Path;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::routing::Route;
use crate::Real;

/// Version accepted by [`load_traffic`].
pub const TRAFFIC_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum TrafficError {
    #[error("failed to read traffic file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("traffic schema error: {0}")]
    Schema(String),
    #[error("unsupported traffic schema_version {found} (expected {TRAFFIC_SCHEMA_VERSION})")]
    SchemaVersion { found: u32 },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

/// Bounded random rate perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jitter {
    /// Symmetric bound: each period's draw lies in [-max_gbps, +max_gbps].
    pub max_gbps: u64,
    /// Per-demand stream seed, mixed with the scenario seed.
    pub seed: u64,
}

/// One demand's growth description.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandGrowth {
    pub id: String,
    pub source: String,
    pub destination: String,
    pub base_rate_gbps: Real,
    /// Multiplicative factor applied once per period.
    pub growth_factor: Real,
    pub jitter: Option<Jitter>,
}

/// A scenario's demand set before expansion into periods.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthModel {
    pub periods: usize,
    pub demands: Vec<DemandGrowth>,
}

/// A demand with its rate fixed for every planning period.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficDemand {
    pub id: String,
    pub source: String,
    pub destination: String,
    /// Whole Gbps, one entry per period.
    pub rate_by_period: Vec<u64>,
}

impl TrafficDemand {
    pub fn rate(&self, period: usize) -> u64 {
        self.rate_by_period[period]
    }
}

/// Identity of a demand group: endpoints plus the exact route.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct GroupKey {
    pub source: String,
    pub destination: String,
    pub links: Vec<String>,
}

impl std::fmt::Display for GroupKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}->{}[{}]", self.source, self.destination, self.links.join(","))
    }
}

/// Demands merged over a shared (source, destination, route).
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedDemand {
    pub key: GroupKey,
    pub route: Route,
    /// Member demand ids, sorted; segment demands keep their derived ids.
    pub members: Vec<String>,
    /// Per-period sums over members, whole Gbps.
    pub rate_by_period: Vec<u64>,
}

impl GroupedDemand {
    pub fn rate(&self, period: usize) -> u64 {
        self.rate_by_period[period]
    }
}

impl GrowthModel {
    /// Expands every demand into per-period rates.
    ///
    /// rate(p) = round(base * growth^p) + jitter_p, clamped at zero and
    /// quantised to whole Gbps. Jitter draws come from a ChaCha stream
    /// seeded by the scenario seed XOR the demand's jitter seed, one draw
    /// per period in order, so any (scenario, seed) pair reproduces the
    /// same rates bit for bit.
    pub fn generate_periods(&self, scenario_seed: u64) -> Result<Vec<TrafficDemand>, TrafficError> {
        if self.periods == 0 {
            return Err(TrafficError::Invalid {
                path: "periods".to_string(),
                message: "must be >= 1".to_string(),
            });
        }
        let mut out = Vec::with_capacity(self.demands.len());
        for (i, demand) in self.demands.iter().enumerate() {
            let at = |field: &str| format!("demands[{i}].{field}");
            if !(demand.base_rate_gbps.is_finite() && demand.base_rate_gbps >= 0.0) {
                return Err(TrafficError::Invalid {
                    path: at("base_rate_gbps"),
                    message: "must be finite and >= 0".to_string(),
                });
            }
            if !(demand.growth_factor.is_finite() && demand.growth_factor > 0.0) {
                return Err(TrafficError::Invalid {
                    path: at("growth_factor"),
                    message: "must be finite and > 0".to_string(),
                });
            }
            let mut rng = demand
                .jitter
                .map(|j| ChaCha8Rng::seed_from_u64(scenario_seed ^ j.seed));
            let mut rates = Vec::with_capacity(self.periods);
            for p in 0..self.periods {
                let nominal = demand.base_rate_gbps * demand.growth_factor.powi(p as i32);
                let mut rate = nominal.round() as i128;
                if let (Some(rng), Some(jitter)) = (rng.as_mut(), demand.jitter.as_ref()) {
                    let width = 2 * jitter.max_gbps + 1;
                    let draw = (rng.next_u64() % width) as i128 - jitter.max_gbps as i128;
                    rate += draw;
                }
                rates.push(rate.max(0) as u64);
            }
            out.push(TrafficDemand {
                id: demand.id.clone(),
                source: demand.source.clone(),
                destination: demand.destination.clone(),
                rate_by_period: rates,
            });
        }
        Ok(out)
    }
}

/// Merges routed demands that share (source, destination, route).
///
/// Returns groups sorted by key; member lists are sorted by demand id.
/// Per-period group rates are the exact sums of member rates, so the
/// result partitions the input traffic and is independent of input order.
pub fn group_demands(routed: &[(TrafficDemand, Route)]) -> Vec<GroupedDemand> {
    let mut map: BTreeMap<GroupKey, GroupedDemand> = BTreeMap::new();
    for (demand, route) in routed {
        let key = GroupKey {
            source: demand.source.clone(),
            destination: demand.destination.clone(),
            links: route.links.clone(),
        };
        let entry = map.entry(key.clone()).or_insert_with(|| GroupedDemand {
            key,
            route: route.clone(),
            members: Vec::new(),
            rate_by_period: vec![0; demand.rate_by_period.len()],
        });
        assert_eq!(
            entry.rate_by_period.len(),
            demand.rate_by_period.len(),
            "all demands must cover the same planning periods"
        );
        entry.members.push(demand.id.clone());
        for (total, rate) in entry.rate_by_period.iter_mut().zip(&demand.rate_by_period) {
            *total += rate;
        }
    }
    let mut groups: Vec<GroupedDemand> = map.into_values().collect();
    for group in &mut groups {
        group.members.sort();
    }
    groups
}

// --- file schema -----------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct TrafficFile {
    schema_version: u32,
    periods: usize,
    demands: Vec<DemandSchema>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DemandSchema {
    id: String,
    source: String,
    destination: String,
    base_rate_gbps: Real,
    #[serde(default)]
    growth_factor: Option<Real>,
    #[serde(default)]
    jitter: Option<Jitter>,
}

/// Parses and validates a traffic scenario.
pub fn load_traffic(path: impl AsRef<Path>) -> Result<GrowthModel, TrafficError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| TrafficError::Io {
        path: path.display().to_string(),
        source,
    })?;
    traffic_from_str(&text)
}

/// Parses and validates a traffic scenario from JSON text.
pub fn traffic_from_str(text: &str) -> Result<GrowthModel, TrafficError> {
    let file: TrafficFile =
        serde_json::from_str(text).map_err(|e| TrafficError::Schema(e.to_string()))?;
    if file.schema_version != TRAFFIC_SCHEMA_VERSION {
        return Err(TrafficError::SchemaVersion {
            found: file.schema_version,
        });
    }
    if file.periods == 0 {
        return Err(TrafficError::Invalid {
            path: "periods".to_string(),
            message: "must be >= 1".to_string(),
        });
    }
    let mut seen = BTreeMap::new();
    let mut demands = Vec::with_capacity(file.demands.len());
    for (i, d) in file.demands.into_iter().enumerate() {
        let at = |field: &str| format!("demands[{i}].{field}");
        if d.id.is_empty() {
            return Err(TrafficError::Invalid {
                path: at("id"),
                message: "must not be empty".to_string(),
            });
        }
        if seen.insert(d.id.clone(), i).is_some() {
            return Err(TrafficError::Invalid {
                path: at("id"),
                message: format!("duplicate demand id {:?}", d.id),
            });
        }
        if d.source == d.destination {
            return Err(TrafficError::Invalid {
                path: at("destination"),
                message: "source and destination must differ".to_string(),
            });
        }
        if !(d.base_rate_gbps.is_finite() && d.base_rate_gbps >= 0.0) {
            return Err(TrafficError::Invalid {
                path: at("base_rate_gbps"),
                message: "must be finite and >= 0".to_string(),
            });
        }
        let growth = d.growth_factor.unwrap_or(1.0);
        if !(growth.is_finite() && growth > 0.0) {
            return Err(TrafficError::Invalid {
                path: at("growth_factor"),
                message: "must be finite and > 0".to_string(),
            });
        }
        demands.push(DemandGrowth {
            id: d.id,
            source: d.source,
            destination: d.destination,
            base_rate_gbps: d.base_rate_gbps,
            growth_factor: growth,
            jitter: d.jitter,
        });
    }
    Ok(GrowthModel {
        periods: file.periods,
        demands,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model(entries: Vec<DemandGrowth>, periods: usize) -> GrowthModel {
        GrowthModel {
            periods,
            demands: entries,
        }
    }

    fn growth(id: &str, src: &str, dst: &str, base: Real, factor: Real) -> DemandGrowth {
        DemandGrowth {
            id: id.to_string(),
            source: src.to_string(),
            destination: dst.to_string(),
            base_rate_gbps: base,
            growth_factor: factor,
            jitter: None,
        }
    }

    fn route(nodes: &[&str], links: &[&str]) -> Route {
        Route {
            links: links.iter().map(|s| s.to_string()).collect(),
            node_walk: nodes.iter().map(|s| s.to_string()).collect(),
            length_km: 100.0 * links.len() as Real,
        }
    }

    #[test]
    fn unit_growth_is_constant() {
        let m = model(vec![growth("d1", "A", "B", 100.0, 1.0)], 4);
        let demands = m.generate_periods(0).unwrap();
        assert_eq!(demands[0].rate_by_period, vec![100, 100, 100, 100]);
    }

    #[test]
    fn doubling_growth_doubles_each_period() {
        let m = model(vec![growth("d1", "A", "B", 100.0, 2.0)], 3);
        let demands = m.generate_periods(0).unwrap();
        assert_eq!(demands[0].rate_by_period, vec![100, 200, 400]);
    }

    #[test]
    fn fractional_growth_rounds_to_whole_gbps() {
        let m = model(vec![growth("d1", "A", "B", 100.0, 1.3)], 4);
        let demands = m.generate_periods(0).unwrap();
        // 100, 130, 169, 219.7 -> 220
        assert_eq!(demands[0].rate_by_period, vec![100, 130, 169, 220]);
    }

    #[test]
    fn jitter_is_bounded_and_reproducible() {
        let mut d = growth("d1", "A", "B", 100.0, 1.3);
        d.jitter = Some(Jitter {
            max_gbps: 10,
            seed: 42,
        });
        let m = model(vec![d], 8);
        let first = m.generate_periods(7).unwrap();
        let second = m.generate_periods(7).unwrap();
        assert_eq!(first, second);
        for (p, rate) in first[0].rate_by_period.iter().enumerate() {
            let nominal = (100.0 * 1.3f64.powi(p as i32)).round() as i128;
            let delta = (*rate as i128 - nominal).abs();
            assert!(delta <= 10, "period {p}: delta {delta}");
        }
        // A different scenario seed shifts the stream.
        let other = m.generate_periods(8).unwrap();
        assert_ne!(first, other);
    }

    #[test]
    fn rejects_zero_periods_and_negative_base() {
        let m = model(vec![growth("d1", "A", "B", 100.0, 1.0)], 0);
        assert!(m.generate_periods(0).is_err());
        let m = model(vec![growth("d1", "A", "B", -1.0, 1.0)], 2);
        assert!(m.generate_periods(0).is_err());
    }

    #[test]
    fn grouping_merges_same_key_and_sums_rates() {
        let r = route(&["A", "B"], &["A-B"]);
        let d1 = TrafficDemand {
            id: "d1".into(),
            source: "A".into(),
            destination: "B".into(),
            rate_by_period: vec![100, 130],
        };
        let d2 = TrafficDemand {
            id: "d2".into(),
            source: "A".into(),
            destination: "B".into(),
            rate_by_period: vec![200, 260],
        };
        let groups = group_demands(&[(d1, r.clone()), (d2, r)]);
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].rate_by_period, vec![300, 390]);
        assert_eq!(groups[0].members, vec!["d1", "d2"]);
    }

    #[test]
    fn distinct_routes_group_separately() {
        let short = route(&["A", "B"], &["A-B"]);
        let long = route(&["A", "C", "B"], &["A-C", "C-B"]);
        let d1 = TrafficDemand {
            id: "d1".into(),
            source: "A".into(),
            destination: "B".into(),
            rate_by_period: vec![100],
        };
        let mut d2 = d1.clone();
        d2.id = "d2".into();
        let groups = group_demands(&[(d1, short), (d2, long)]);
        assert_eq!(groups.len(), 2);
    }

    #[test]
    fn segment_demands_group_per_segment_key() {
        // Two post-split segment demands plus a plain demand on the first
        // segment's endpoints merge into two groups.
        let seg_a = route(&["N3", "N1"], &["N3-N1"]);
        let seg_b = route(&["N1", "N2"], &["N1-N2"]);
        let split_a = TrafficDemand {
            id: "t1#s0".into(),
            source: "N3".into(),
            destination: "N1".into(),
            rate_by_period: vec![400],
        };
        let split_b = TrafficDemand {
            id: "t1#s1".into(),
            source: "N1".into(),
            destination: "N2".into(),
            rate_by_period: vec![400],
        };
        let plain = TrafficDemand {
            id: "t2".into(),
            source: "N3".into(),
            destination: "N1".into(),
            rate_by_period: vec![400],
        };
        let groups = group_demands(&[(split_a, seg_a.clone()), (split_b, seg_b), (plain, seg_a)]);
        assert_eq!(groups.len(), 2);
        let n3n1 = groups.iter().find(|g| g.key.source == "N3").unwrap();
        assert_eq!(n3n1.rate_by_period, vec![800]);
        assert_eq!(n3n1.members, vec!["t1#s0", "t2"]);
    }

    #[test]
    fn loads_and_validates_scenario_files() {
        let text = r#"{
            "schema_version": 1,
            "periods": 3,
            "demands": [
                {"id": "d1", "source": "A", "destination": "B", "base_rate_gbps": 100},
                {"id": "d2", "source": "B", "destination": "C", "base_rate_gbps": 50,
                 "growth_factor": 1.5, "jitter": {"max_gbps": 5, "seed": 9}}
            ]
        }"#;
        let m = traffic_from_str(text).unwrap();
        assert_eq!(m.periods, 3);
        assert_eq!(m.demands[0].growth_factor, 1.0);
        assert_eq!(m.demands[1].jitter.unwrap().max_gbps, 5);

        let dup = text.replace("\"d2\"", "\"d1\"");
        assert!(traffic_from_str(&dup).unwrap_err().to_string().contains("duplicate"));

        let self_loop = text.replace("\"destination\": \"B\", \"base_rate_gbps\": 100", "\"destination\": \"A\", \"base_rate_gbps\": 100");
        assert!(traffic_from_str(&self_loop)
            .unwrap_err()
            .to_string()
            .contains("must differ"));
    }

    proptest! {
        /// Groups partition the input: per-period sums are conserved and
        /// the result does not depend on input order.
        #[test]
        fn grouping_conserves_rates_and_ignores_order(
            picks in proptest::collection::vec((0usize..4, 1u64..500, 1u64..500), 1..12),
            rotation in 0usize..12,
        ) {
            let routes = [
                route(&["A", "B"], &["A-B"]),
                route(&["A", "C", "B"], &["A-C", "C-B"]),
                route(&["B", "C"], &["B-C"]),
                route(&["C", "A"], &["C-A"]),
            ];
            let routed: Vec<(TrafficDemand, Route)> = picks
                .iter()
                .enumerate()
                .map(|(i, (which, r0, r1))| {
                    let r = &routes[*which];
                    (
                        TrafficDemand {
                            id: format!("d{i}"),
                            source: r.node_walk.first().unwrap().clone(),
                            destination: r.node_walk.last().unwrap().clone(),
                            rate_by_period: vec![*r0, *r1],
                        },
                        r.clone(),
                    )
                })
                .collect();

            let groups = group_demands(&routed);
            for p in 0..2 {
                let demand_sum: u64 = routed.iter().map(|(d, _)| d.rate_by_period[p]).sum();
                let group_sum: u64 = groups.iter().map(|g| g.rate_by_period[p]).sum();
                prop_assert_eq!(demand_sum, group_sum);
            }
            let total_members: usize = groups.iter().map(|g| g.members.len()).sum();
            prop_assert_eq!(total_members, routed.len());

            let mut shuffled = routed.clone();
            shuffled.rotate_left(rotation % routed.len().max(1));
            prop_assert_eq!(group_demands(&shuffled), groups);
        }
    }
}
