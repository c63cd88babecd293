//! Multi-period planning workflow.
//!
//! A scenario fixes a topology, a traffic growth model, a transceiver
//! catalog, and engine options. The planner routes every demand once,
//! splits routes that exceed optical reach at regeneration sites, and
//! merges demands sharing a route into groups. Then, period by period:
//!
//! 1. every group's GSNR is re-bracketed (two model evaluations) and the
//!    catalog is filtered to the configs admissible under the lower bound
//!    plus margin, after a cheap route-OSNR pre-filter;
//! 2. each group's uncovered residual rate is covered by a
//!    minimum-bandwidth multiset of admissible configs, leaving earlier
//!    lightpaths untouched;
//! 3. new lightpaths receive first-fit spectrum in a fixed serial order
//!    (groups by descending first-period rate then key, lightpaths by
//!    config id); a lightpath that finds no contiguous slots is dropped
//!    and its capacity shortfall returns to the residual of the next
//!    period;
//! 4. served capacity is attributed to member demands in id order, and
//!    end-to-end service of a regenerated demand is the minimum over its
//!    segments.
//!
//! Every collection is iterated in a deterministic order, so a scenario
//! plus seed reproduces reports byte for byte.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qot::{QotEngine, QotError, QotParams};
use crate::routing::{place_regenerators, shortest_route, ReachLimits, RoutingError};
use crate::spectrum::{slots_needed, SpectrumDump, SpectrumError, SpectrumGrid};
use crate::topology::{load_topology, NetworkTopology, TopologyError};
use crate::traffic::{group_demands, load_traffic, GrowthModel, TrafficError};
use crate::transceiver::{
    incremental_allocate, load_catalog, Allocation, Catalog, TransceiverError, TrxConfig,
};
use crate::Real;

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error(transparent)]
    Transceiver(#[from] TransceiverError),
    #[error(transparent)]
    Qot(#[from] QotError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("scenario is not valid JSON: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("unsupported scenario schema_version {found} (expected {SCENARIO_SCHEMA_VERSION})")]
    ScenarioVersion { found: u32 },
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("plans cannot be compared: {0}")]
    Compare(String),
}

fn io_err(path: &Path, source: std::io::Error) -> PlannerError {
    PlannerError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Engine options for one planning run.
#[derive(Debug, Clone, Default)]
pub struct PlannerOptions {
    pub seed: u64,
    /// Optical reach for regenerator placement; `None` disables
    /// regeneration and keeps every demand on its transparent route.
    pub reach: Option<ReachLimits>,
    pub qot: QotParams,
    /// Admission margin override; `None` uses the catalog default.
    pub margin_db: Option<Real>,
}

/// Everything a planning run consumes, already loaded and validated.
#[derive(Debug, Clone)]
pub struct PlanInputs {
    pub name: String,
    pub topology: NetworkTopology,
    pub traffic: GrowthModel,
    pub catalog: Catalog,
    pub options: PlannerOptions,
}

// --- scenario file ----------------------------------------------------------

#[derive(Debug, Deserialize)]
struct ScenarioFile {
    schema_version: u32,
    name: String,
    topology: String,
    traffic: String,
    catalog: String,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    regeneration: Option<RegenSection>,
    #[serde(default)]
    qot: Option<QotSection>,
    #[serde(default)]
    margin_db: Option<Real>,
}

#[derive(Debug, Deserialize)]
struct RegenSection {
    enabled: bool,
    #[serde(default)]
    max_length_km: Option<Real>,
    #[serde(default)]
    max_intermediate_nodes: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
struct QotSection {
    #[serde(default)]
    launch_power_dbm: Option<Real>,
    #[serde(default)]
    quadrature_rel_tol: Option<Real>,
    #[serde(default)]
    max_quad_cells: Option<usize>,
    #[serde(default)]
    l_band: Option<bool>,
    #[serde(default)]
    c_start_thz: Option<Real>,
    #[serde(default)]
    c_end_thz: Option<Real>,
}

/// A parsed scenario: input file locations plus run options.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub topology_path: PathBuf,
    pub traffic_path: PathBuf,
    pub catalog_path: PathBuf,
    pub options: PlannerOptions,
}

/// Parses a scenario file; input paths resolve relative to its directory.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, PlannerError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let file: ScenarioFile = serde_json::from_str(&text)?;
    if file.schema_version != SCENARIO_SCHEMA_VERSION {
        return Err(PlannerError::ScenarioVersion {
            found: file.schema_version,
        });
    }
    if file.name.is_empty() {
        return Err(PlannerError::Scenario("name must be non-empty".into()));
    }
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let resolve = |p: &str| base.join(p);

    let reach = match file.regeneration {
        Some(section) if section.enabled => {
            let max_length_km = section.max_length_km.ok_or_else(|| {
                PlannerError::Scenario(
                    "regeneration.max_length_km is required when regeneration is enabled".into(),
                )
            })?;
            if !(max_length_km > 0.0 && max_length_km.is_finite()) {
                return Err(PlannerError::Scenario(
                    "regeneration.max_length_km must be finite and > 0".into(),
                ));
            }
            Some(ReachLimits {
                max_length_km,
                max_intermediate_nodes: section.max_intermediate_nodes.unwrap_or(usize::MAX),
            })
        }
        _ => None,
    };

    let q = file.qot.unwrap_or_default();
    let mut qot = QotParams::default();
    if let Some(v) = q.launch_power_dbm {
        qot.launch_power_dbm = v;
    }
    if let Some(v) = q.quadrature_rel_tol {
        if !(v > 0.0 && v.is_finite()) {
            return Err(PlannerError::Scenario(
                "qot.quadrature_rel_tol must be finite and > 0".into(),
            ));
        }
        qot.quadrature_rel_tol = v;
    }
    if let Some(v) = q.max_quad_cells {
        qot.max_quad_cells = v;
    }
    if let Some(v) = q.l_band {
        qot.band.l_enabled = v;
    }
    if let Some(v) = q.c_start_thz {
        qot.band.c_start_thz = v;
    }
    if let Some(v) = q.c_end_thz {
        qot.band.c_end_thz = v;
    }
    qot.band
        .validate()
        .map_err(|e| PlannerError::Scenario(e.to_string()))?;

    if let Some(m) = file.margin_db {
        if !(m >= 0.0 && m.is_finite()) {
            return Err(PlannerError::Scenario("margin_db must be finite and >= 0".into()));
        }
    }

    Ok(Scenario {
        name: file.name,
        topology_path: resolve(&file.topology),
        traffic_path: resolve(&file.traffic),
        catalog_path: resolve(&file.catalog),
        options: PlannerOptions {
            seed: file.seed,
            reach,
            qot,
            margin_db: file.margin_db,
        },
    })
}

/// Loads the three input files a scenario points at.
pub fn load_inputs(scenario: &Scenario) -> Result<PlanInputs, PlannerError> {
    Ok(PlanInputs {
        name: scenario.name.clone(),
        topology: load_topology(&scenario.topology_path)?,
        traffic: load_traffic(&scenario.traffic_path)?,
        catalog: load_catalog(&scenario.catalog_path)?,
        options: scenario.options.clone(),
    })
}

/// Loads and runs a scenario file in one step.
pub fn run_scenario(path: impl AsRef<Path>) -> Result<PlanRun, PlannerError> {
    let scenario = load_scenario(path)?;
    run_plan(&load_inputs(&scenario)?)
}

// --- results ----------------------------------------------------------------

/// One lightpath decision. `start_slot` is `None` when the lightpath
/// found no contiguous spectrum and was dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LightpathRecord {
    pub id: String,
    pub config_id: String,
    pub data_rate_gbps: u64,
    pub slot_count: usize,
    pub start_slot: Option<usize>,
}

/// One group's state in one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupPeriod {
    pub period: usize,
    pub rate_gbps: u64,
    pub gsnr_lower_db: Option<Real>,
    pub gsnr_upper_db: Option<Real>,
    pub admissible_configs: Vec<String>,
    /// Lightpaths attempted this period, placed or dropped.
    pub lightpaths: Vec<LightpathRecord>,
    /// Cumulative placed capacity after this period's assignment.
    pub placed_capacity_gbps: u64,
    pub served_gbps: u64,
    pub blocked_gbps: u64,
    pub blocking_reason: Option<String>,
}

/// One group over the whole horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub key: String,
    pub source: String,
    pub destination: String,
    pub links: Vec<String>,
    pub node_walk: Vec<String>,
    pub length_km: Real,
    pub route_osnr_db: Real,
    pub members: Vec<String>,
    pub periods: Vec<GroupPeriod>,
}

/// End-to-end service of one original demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandReport {
    pub id: String,
    pub source: String,
    pub destination: String,
    pub regen_nodes: Vec<String>,
    pub segments: usize,
    pub requested_gbps: Vec<u64>,
    pub served_gbps: Vec<u64>,
    pub blocked_gbps: Vec<u64>,
}

/// Network totals at the end of one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodSummary {
    pub period: usize,
    pub requested_gbps: u64,
    pub served_gbps: u64,
    pub blocked_gbps: u64,
    pub new_lightpaths: usize,
    pub cumulative_lightpaths: usize,
    pub transceivers: usize,
    pub regenerator_sites: usize,
    pub occupied_slots: usize,
    pub equivalent_50ghz_wavelengths: usize,
}

/// Full planning result for one scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub scenario: String,
    pub seed: u64,
    pub regeneration_enabled: bool,
    pub margin_db: Real,
    pub periods: Vec<PeriodSummary>,
    pub groups: Vec<GroupReport>,
    pub demands: Vec<DemandReport>,
    pub gn_evaluations: u64,
    pub warnings: Vec<String>,
}

/// Planning result plus the final spectrum state.
#[derive(Debug, Clone)]
pub struct PlanRun {
    pub result: PlanResult,
    pub spectrum: SpectrumDump,
}

// --- workflow ---------------------------------------------------------------

pub fn run_plan(inputs: &PlanInputs) -> Result<PlanRun, PlannerError> {
    let PlanInputs {
        name,
        topology,
        traffic,
        catalog,
        options,
    } = inputs;
    options
        .qot
        .band
        .validate()
        .map_err(|e| PlannerError::Scenario(e.to_string()))?;
    let margin = options.margin_db.unwrap_or(catalog.default_margin_db);
    let mut warnings = topology.warnings.clone();
    warnings.extend(catalog.warnings.iter().cloned());

    let demands = traffic.generate_periods(options.seed)?;
    let periods = traffic.periods;

    // Route once, split at regeneration sites, remember the segment ids
    // behind every original demand.
    let mut pairs = Vec::new();
    let mut originals: Vec<(crate::traffic::TrafficDemand, Vec<String>, Vec<String>)> = Vec::new();
    for demand in &demands {
        let route = shortest_route(topology, &demand.source, &demand.destination)?;
        match &options.reach {
            Some(limits) => {
                let regen = place_regenerators(topology, &route, demand, limits)?;
                let segment_ids = regen.segments.iter().map(|(_, d)| d.id.clone()).collect();
                originals.push((demand.clone(), regen.regen_nodes, segment_ids));
                for (seg_route, seg_demand) in regen.segments {
                    pairs.push((seg_demand, seg_route));
                }
            }
            None => {
                originals.push((demand.clone(), Vec::new(), vec![demand.id.clone()]));
                pairs.push((demand.clone(), route));
            }
        }
    }
    let groups = group_demands(&pairs);
    let member_rates: BTreeMap<&str, &Vec<u64>> = pairs
        .iter()
        .map(|(d, _)| (d.id.as_str(), &d.rate_by_period))
        .collect();
    let regenerator_sites: usize = originals.iter().map(|(_, regen, _)| regen.len()).sum();

    let engine = QotEngine::new(topology, options.qot);
    let mut grid = SpectrumGrid::new(topology, &options.qot.band);

    let route_osnr: Vec<Real> = groups
        .iter()
        .map(|g| {
            engine.ase_osnr(
                &g.route,
                options.qot.launch_power_dbm,
                options.qot.reference_bandwidth_ghz,
            )
        })
        .collect::<Result<_, _>>()?;

    // Serial spectrum-assignment priority, fixed for the whole horizon:
    // heavier first-period groups first, key order on ties.
    let mut priority: Vec<usize> = (0..groups.len()).collect();
    priority.sort_by(|&a, &b| {
        groups[b]
            .rate(0)
            .cmp(&groups[a].rate(0))
            .then_with(|| groups[a].key.cmp(&groups[b].key))
    });

    let mut placed: Vec<Allocation> = vec![Allocation::empty(); groups.len()];
    let mut group_periods: Vec<Vec<GroupPeriod>> = vec![Vec::new(); groups.len()];
    let mut member_served: BTreeMap<&str, Vec<u64>> = pairs
        .iter()
        .map(|(d, _)| (d.id.as_str(), vec![0u64; periods]))
        .collect();
    let mut period_summaries = Vec::with_capacity(periods);

    for p in 0..periods {
        // Admission and allocation planning, in group-key order.
        let mut additions: Vec<Allocation> = Vec::with_capacity(groups.len());
        for (gi, group) in groups.iter().enumerate() {
            let prefiltered = catalog.admissible(route_osnr[gi], margin);
            let (lower, upper, admissible, reason) = if prefiltered.is_empty() {
                (
                    None,
                    None,
                    Vec::new(),
                    Some("no transceiver config within the route OSNR budget".to_string()),
                )
            } else {
                match engine.gsnr_bounds(group, &prefiltered, p) {
                    Ok(bound) => {
                        let admissible: Vec<TrxConfig> = prefiltered
                            .into_iter()
                            .filter(|c| c.min_osnr_db + margin <= bound.lower_db)
                            .collect();
                        let reason = admissible
                            .is_empty()
                            .then(|| "no transceiver config within the GSNR bound".to_string());
                        (Some(bound.lower_db), Some(bound.upper_db), admissible, reason)
                    }
                    Err(QotError::BoundUnavailable { reasons }) => (
                        None,
                        None,
                        Vec::new(),
                        Some(format!("no in-band probe placement: {reasons}")),
                    ),
                    Err(e) => return Err(e.into()),
                }
            };

            let addition = incremental_allocate(&placed[gi], group.rate(p), &admissible)
                .unwrap_or_else(Allocation::empty);
            additions.push(addition);
            group_periods[gi].push(GroupPeriod {
                period: p,
                rate_gbps: group.rate(p),
                gsnr_lower_db: lower,
                gsnr_upper_db: upper,
                admissible_configs: admissible.iter().map(|c| c.id.clone()).collect(),
                lightpaths: Vec::new(),
                placed_capacity_gbps: 0,
                served_gbps: 0,
                blocked_gbps: 0,
                blocking_reason: reason,
            });
        }

        // Spectrum assignment, serialized in the fixed priority order.
        let mut new_lightpaths = 0usize;
        for &gi in &priority {
            let group = &groups[gi];
            let record = group_periods[gi].last_mut().expect("pushed above");
            for (seq, config) in additions[gi].lightpaths.iter().enumerate() {
                let lp_id = format!("{}|p{p}|{seq}", group.key);
                let slot_count = slots_needed(config.bandwidth_ghz);
                let channel = grid.allocate_first_fit(&lp_id, &group.route.links, slot_count)?;
                if channel.is_some() {
                    placed[gi].lightpaths.push(config.clone());
                    new_lightpaths += 1;
                }
                record.lightpaths.push(LightpathRecord {
                    id: lp_id,
                    config_id: config.id.clone(),
                    data_rate_gbps: config.data_rate_gbps,
                    slot_count,
                    start_slot: channel.map(|c| c.start_slot),
                });
            }
            placed[gi].lightpaths.sort_by(|a, b| a.id.cmp(&b.id));
        }

        // Serve members in id order from the cumulative placed capacity.
        for (gi, group) in groups.iter().enumerate() {
            let capacity = placed[gi].total_rate_gbps();
            let record = group_periods[gi].last_mut().expect("pushed above");
            record.placed_capacity_gbps = capacity;
            record.served_gbps = capacity.min(group.rate(p));
            record.blocked_gbps = group.rate(p) - record.served_gbps;
            if record.blocked_gbps > 0 && record.blocking_reason.is_none() {
                record.blocking_reason = Some("insufficient spectrum on the route".to_string());
            }
            let mut remaining = record.served_gbps;
            for member in &group.members {
                let want = member_rates[member.as_str()][p];
                let got = want.min(remaining);
                remaining -= got;
                member_served.get_mut(member.as_str()).expect("member of a group")[p] = got;
            }
        }

        // End-to-end service is the weakest segment of each demand.
        let mut requested = 0u64;
        let mut served = 0u64;
        for (demand, _, segment_ids) in &originals {
            let rate = demand.rate(p);
            let end_to_end = segment_ids
                .iter()
                .map(|id| member_served[id.as_str()][p])
                .min()
                .unwrap_or(0);
            requested += rate;
            served += end_to_end;
        }
        let cumulative: usize = placed.iter().map(|a| a.lp_count()).sum();
        period_summaries.push(PeriodSummary {
            period: p,
            requested_gbps: requested,
            served_gbps: served,
            blocked_gbps: requested - served,
            new_lightpaths,
            cumulative_lightpaths: cumulative,
            transceivers: 2 * cumulative,
            regenerator_sites,
            occupied_slots: grid.total_occupied_slots(),
            equivalent_50ghz_wavelengths: grid.max_equivalent_50ghz_wavelengths(),
        });
    }

    let group_reports = groups
        .iter()
        .zip(group_periods)
        .zip(&route_osnr)
        .map(|((group, periods), &osnr)| GroupReport {
            key: group.key.to_string(),
            source: group.key.source.clone(),
            destination: group.key.destination.clone(),
            links: group.route.links.clone(),
            node_walk: group.route.node_walk.clone(),
            length_km: group.route.length_km,
            route_osnr_db: osnr,
            members: group.members.clone(),
            periods,
        })
        .collect();

    let demand_reports = originals
        .iter()
        .map(|(demand, regen_nodes, segment_ids)| {
            let served: Vec<u64> = (0..periods)
                .map(|p| {
                    segment_ids
                        .iter()
                        .map(|id| member_served[id.as_str()][p])
                        .min()
                        .unwrap_or(0)
                })
                .collect();
            let blocked = demand
                .rate_by_period
                .iter()
                .zip(&served)
                .map(|(r, s)| r - s)
                .collect();
            DemandReport {
                id: demand.id.clone(),
                source: demand.source.clone(),
                destination: demand.destination.clone(),
                regen_nodes: regen_nodes.clone(),
                segments: segment_ids.len(),
                requested_gbps: demand.rate_by_period.clone(),
                served_gbps: served,
                blocked_gbps: blocked,
            }
        })
        .collect();

    Ok(PlanRun {
        result: PlanResult {
            scenario: name.clone(),
            seed: options.seed,
            regeneration_enabled: options.reach.is_some(),
            margin_db: margin,
            periods: period_summaries,
            groups: group_reports,
            demands: demand_reports,
            gn_evaluations: engine.gn_evaluations(),
            warnings,
        },
        spectrum: grid.dump(),
    })
}

// --- reports ----------------------------------------------------------------

/// Per-period totals as CSV, one row per period.
pub fn summary_csv(result: &PlanResult) -> String {
    let mut out = String::from(
        "period,requested_gbps,served_gbps,blocked_gbps,new_lightpaths,\
         cumulative_lightpaths,transceivers,regenerator_sites,occupied_slots,\
         equivalent_50ghz_wavelengths\n",
    );
    for p in &result.periods {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            p.period,
            p.requested_gbps,
            p.served_gbps,
            p.blocked_gbps,
            p.new_lightpaths,
            p.cumulative_lightpaths,
            p.transceivers,
            p.regenerator_sites,
            p.occupied_slots,
            p.equivalent_50ghz_wavelengths
        ));
    }
    out
}

/// Writes `summary.csv` and `allocations.json` (and `spectrum.json` when
/// a dump is provided) into `out_dir`. Output is byte-stable for a fixed
/// scenario and seed.
pub fn emit_report(
    result: &PlanResult,
    spectrum: Option<&SpectrumDump>,
    out_dir: impl AsRef<Path>,
) -> Result<(), PlannerError> {
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    let write = |file: &str, content: String| -> Result<(), PlannerError> {
        let path = out_dir.join(file);
        std::fs::write(&path, content).map_err(|e| io_err(&path, e))
    };
    write("summary.csv", summary_csv(result))?;
    write(
        "allocations.json",
        format!("{}\n", serde_json::to_string_pretty(result)?),
    )?;
    if let Some(dump) = spectrum {
        write("spectrum.json", format!("{}\n", serde_json::to_string_pretty(dump)?))?;
    }
    Ok(())
}

/// Reads a previously emitted `allocations.json`.
pub fn load_result(path: impl AsRef<Path>) -> Result<PlanResult, PlannerError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Side-by-side per-period metrics of two runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub period: usize,
    pub served_a_gbps: u64,
    pub served_b_gbps: u64,
    pub blocked_a_gbps: u64,
    pub blocked_b_gbps: u64,
    pub lightpaths_a: usize,
    pub lightpaths_b: usize,
    pub transceivers_a: usize,
    pub transceivers_b: usize,
    pub occupied_slots_a: usize,
    pub occupied_slots_b: usize,
    pub wavelengths_a: usize,
    pub wavelengths_b: usize,
}

/// Pairs two runs period by period. Both must cover the same horizon.
pub fn compare_runs(a: &PlanResult, b: &PlanResult) -> Result<Vec<CompareRow>, PlannerError> {
    if a.periods.len() != b.periods.len() {
        return Err(PlannerError::Compare(format!(
            "different horizons: {} vs {} periods",
            a.periods.len(),
            b.periods.len()
        )));
    }
    Ok(a.periods
        .iter()
        .zip(&b.periods)
        .map(|(pa, pb)| CompareRow {
            period: pa.period,
            served_a_gbps: pa.served_gbps,
            served_b_gbps: pb.served_gbps,
            blocked_a_gbps: pa.blocked_gbps,
            blocked_b_gbps: pb.blocked_gbps,
            lightpaths_a: pa.cumulative_lightpaths,
            lightpaths_b: pb.cumulative_lightpaths,
            transceivers_a: pa.transceivers,
            transceivers_b: pb.transceivers,
            occupied_slots_a: pa.occupied_slots,
            occupied_slots_b: pb.occupied_slots,
            wavelengths_a: pa.equivalent_50ghz_wavelengths,
            wavelengths_b: pb.equivalent_50ghz_wavelengths,
        })
        .collect())
}

pub fn comparison_csv(rows: &[CompareRow]) -> String {
    let mut out = String::from(
        "period,served_a_gbps,served_b_gbps,blocked_a_gbps,blocked_b_gbps,\
         lightpaths_a,lightpaths_b,transceivers_a,transceivers_b,\
         occupied_slots_a,occupied_slots_b,wavelengths_a,wavelengths_b\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.period,
            r.served_a_gbps,
            r.served_b_gbps,
            r.blocked_a_gbps,
            r.blocked_b_gbps,
            r.lightpaths_a,
            r.lightpaths_b,
            r.transceivers_a,
            r.transceivers_b,
            r.occupied_slots_a,
            r.occupied_slots_b,
            r.wavelengths_a,
            r.wavelengths_b
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::topology_from_str;
    use crate::traffic::traffic_from_str;
    use crate::transceiver::catalog_from_str;
    use approx::assert_relative_eq;

    fn span(length_km: f64, gamma: f64) -> serde_json::Value {
        serde_json::json!({
            "length_km": length_km,
            "attenuation_db_per_km": 0.2,
            "beta2_ps2_per_km": -21.3,
            "gamma_per_w_km": gamma,
            "amp_noise_figure_db": 5.0
        })
    }

    fn two_node_inputs() -> PlanInputs {
        let topology = topology_from_str(
            &serde_json::json!({
                "schema_version": 1,
                "nodes": [
                    {"id": "A", "name": "A", "add_drop": true},
                    {"id": "B", "name": "B", "add_drop": true}
                ],
                "links": [
                    {"id": "AB", "endpoints": ["A", "B"], "spans": [span(80.0, 0.0), span(80.0, 0.0)]}
                ]
            })
            .to_string(),
        )
        .unwrap();
        let traffic = traffic_from_str(
            &serde_json::json!({
                "schema_version": 1,
                "periods": 2,
                "demands": [
                    {"id": "d1", "source": "A", "destination": "B",
                     "base_rate_gbps": 200.0, "growth_factor": 2.0}
                ]
            })
            .to_string(),
        )
        .unwrap();
        let catalog = catalog_from_str(
            &serde_json::json!({
                "schema_version": 1,
                "reference_bandwidth_ghz": 12.5,
                "default_margin_db": 1.0,
                "configs": [
                    {"id": "100G", "data_rate_gbps": 100, "bandwidth_ghz": 37.5,
                     "symbol_rate_gbd": 32.0, "modulation": "m", "min_osnr_db": 10.0},
                    {"id": "200G", "data_rate_gbps": 200, "bandwidth_ghz": 50.0,
                     "symbol_rate_gbd": 42.0, "modulation": "m", "min_osnr_db": 13.0},
                    {"id": "400G", "data_rate_gbps": 400, "bandwidth_ghz": 75.0,
                     "symbol_rate_gbd": 64.0, "modulation": "m", "min_osnr_db": 40.0}
                ]
            })
            .to_string(),
        )
        .unwrap();
        PlanInputs {
            name: "two-node".into(),
            topology,
            traffic,
            catalog,
            options: PlannerOptions::default(),
        }
    }

    #[test]
    fn two_node_growth_hand_trace() {
        let run = run_plan(&two_node_inputs()).unwrap();
        let result = &run.result;
        assert_eq!(result.periods.len(), 2);

        // Period 0: 200 Gbps, 400G is priced out by its OSNR threshold,
        // one 200G lightpath (50 GHz) beats two 100G (75 GHz).
        let p0 = &result.periods[0];
        assert_eq!(p0.requested_gbps, 200);
        assert_eq!(p0.served_gbps, 200);
        assert_eq!(p0.blocked_gbps, 0);
        assert_eq!(p0.new_lightpaths, 1);
        assert_eq!(p0.transceivers, 2);
        assert_eq!(p0.occupied_slots, 4);

        // Period 1: rate doubles, one more 200G tops up the residual.
        let p1 = &result.periods[1];
        assert_eq!(p1.requested_gbps, 400);
        assert_eq!(p1.served_gbps, 400);
        assert_eq!(p1.cumulative_lightpaths, 2);
        assert_eq!(p1.transceivers, 4);
        assert_eq!(p1.occupied_slots, 8);
        assert_eq!(p1.equivalent_50ghz_wavelengths, 2);

        assert_eq!(result.groups.len(), 1);
        let group = &result.groups[0];
        assert_relative_eq!(group.route_osnr_db, 33.94, epsilon = 0.05);
        assert_eq!(group.periods[0].admissible_configs, vec!["100G", "200G"]);
        let lp = &group.periods[0].lightpaths[0];
        assert_eq!(lp.config_id, "200G");
        assert_eq!(lp.start_slot, Some(0));
        assert_eq!(group.periods[1].lightpaths[0].start_slot, Some(4));

        // Two bound evaluations per group per period.
        assert_eq!(result.gn_evaluations, 4);

        let demand = &result.demands[0];
        assert_eq!(demand.served_gbps, vec![200, 400]);
        assert_eq!(demand.blocked_gbps, vec![0, 0]);
    }

    #[test]
    fn unreachable_thresholds_block_everything() {
        let mut inputs = two_node_inputs();
        inputs.catalog = catalog_from_str(
            &serde_json::json!({
                "schema_version": 1,
                "reference_bandwidth_ghz": 12.5,
                "default_margin_db": 1.0,
                "configs": [
                    {"id": "100G", "data_rate_gbps": 100, "bandwidth_ghz": 37.5,
                     "symbol_rate_gbd": 32.0, "modulation": "m", "min_osnr_db": 50.0}
                ]
            })
            .to_string(),
        )
        .unwrap();
        let run = run_plan(&inputs).unwrap();
        let result = &run.result;
        for p in &result.periods {
            assert_eq!(p.served_gbps, 0);
            assert_eq!(p.blocked_gbps, p.requested_gbps);
            assert_eq!(p.cumulative_lightpaths, 0);
        }
        // Pre-filtered out by route OSNR: the full model never runs.
        assert_eq!(result.gn_evaluations, 0);
        let reason = result.groups[0].periods[0].blocking_reason.as_deref().unwrap();
        assert!(reason.contains("OSNR"), "{reason}");
    }

    fn contention_inputs() -> PlanInputs {
        let topology = topology_from_str(
            &serde_json::json!({
                "schema_version": 1,
                "nodes": [
                    {"id": "A", "name": "A", "add_drop": true},
                    {"id": "B", "name": "B", "add_drop": true},
                    {"id": "C", "name": "C", "add_drop": true}
                ],
                "links": [
                    {"id": "AB", "endpoints": ["A", "B"], "spans": [span(80.0, 0.0)]},
                    {"id": "BC", "endpoints": ["B", "C"], "spans": [span(80.0, 0.0)]}
                ]
            })
            .to_string(),
        )
        .unwrap();
        let traffic = traffic_from_str(
            &serde_json::json!({
                "schema_version": 1,
                "periods": 2,
                "demands": [
                    {"id": "dx", "source": "A", "destination": "B", "base_rate_gbps": 200.0},
                    {"id": "da", "source": "A", "destination": "C",
                     "base_rate_gbps": 60.0, "growth_factor": 1.5},
                    {"id": "db", "source": "A", "destination": "C",
                     "base_rate_gbps": 50.0, "growth_factor": 1.5}
                ]
            })
            .to_string(),
        )
        .unwrap();
        let catalog = catalog_from_str(
            &serde_json::json!({
                "schema_version": 1,
                "reference_bandwidth_ghz": 12.5,
                "default_margin_db": 1.0,
                "configs": [
                    {"id": "100G", "data_rate_gbps": 100, "bandwidth_ghz": 37.5,
                     "symbol_rate_gbd": 32.0, "modulation": "m", "min_osnr_db": 10.0}
                ]
            })
            .to_string(),
        )
        .unwrap();
        // Nine-slot C-band window: 112.5 GHz starting at 193.65 THz.
        let mut options = PlannerOptions::default();
        options.qot.band.c_start_thz = 193.65;
        options.qot.band.c_end_thz = 193.7625;
        PlanInputs {
            name: "contention".into(),
            topology,
            traffic,
            catalog,
            options,
        }
    }

    #[test]
    fn spectrum_contention_blocks_and_water_fills() {
        let run = run_plan(&contention_inputs()).unwrap();
        let result = &run.result;

        // Period 0: the heavier A->B group claims six of the nine slots
        // on AB first; the two-link group fits one of its two lightpaths.
        let p0 = &result.periods[0];
        assert_eq!(p0.requested_gbps, 310);
        assert_eq!(p0.served_gbps, 300);
        assert_eq!(p0.blocked_gbps, 10);
        assert_eq!(p0.new_lightpaths, 3);

        // Period 1: the blocked lightpath's shortfall grows; AB is full,
        // so the whole residual stays blocked.
        let p1 = &result.periods[1];
        assert_eq!(p1.requested_gbps, 365);
        assert_eq!(p1.served_gbps, 300);
        assert_eq!(p1.blocked_gbps, 65);
        assert_eq!(p1.cumulative_lightpaths, 3);

        // Member attribution is id-ordered water fill: da drinks first.
        let da = result.demands.iter().find(|d| d.id == "da").unwrap();
        let db = result.demands.iter().find(|d| d.id == "db").unwrap();
        assert_eq!(da.served_gbps, vec![60, 90]);
        assert_eq!(db.served_gbps, vec![40, 10]);
        for d in &result.demands {
            for p in 0..2 {
                assert_eq!(d.served_gbps[p] + d.blocked_gbps[p], d.requested_gbps[p]);
            }
        }

        let two_link = result.groups.iter().find(|g| g.links.len() == 2).unwrap();
        let dropped: Vec<_> = two_link.periods[0]
            .lightpaths
            .iter()
            .filter(|lp| lp.start_slot.is_none())
            .collect();
        assert_eq!(dropped.len(), 1);
        assert_eq!(
            two_link.periods[1].blocking_reason.as_deref(),
            Some("insufficient spectrum on the route")
        );
    }

    #[test]
    fn regeneration_splits_and_serves_end_to_end() {
        let topology = topology_from_str(
            &serde_json::json!({
                "schema_version": 1,
                "nodes": [
                    {"id": "A", "name": "A", "add_drop": true},
                    {"id": "B", "name": "B", "add_drop": true},
                    {"id": "C", "name": "C", "add_drop": true}
                ],
                "links": [
                    {"id": "AB", "endpoints": ["A", "B"],
                     "spans": (0..5).map(|_| span(80.0, 0.0)).collect::<Vec<_>>()},
                    {"id": "BC", "endpoints": ["B", "C"],
                     "spans": (0..5).map(|_| span(80.0, 0.0)).collect::<Vec<_>>()}
                ]
            })
            .to_string(),
        )
        .unwrap();
        let traffic = traffic_from_str(
            &serde_json::json!({
                "schema_version": 1,
                "periods": 1,
                "demands": [
                    {"id": "t", "source": "A", "destination": "C", "base_rate_gbps": 200.0}
                ]
            })
            .to_string(),
        )
        .unwrap();
        let catalog = catalog_from_str(
            &serde_json::json!({
                "schema_version": 1,
                "reference_bandwidth_ghz": 12.5,
                "default_margin_db": 1.0,
                "configs": [
                    {"id": "200G", "data_rate_gbps": 200, "bandwidth_ghz": 50.0,
                     "symbol_rate_gbd": 42.0, "modulation": "m", "min_osnr_db": 13.0}
                ]
            })
            .to_string(),
        )
        .unwrap();
        let options = PlannerOptions {
            reach: Some(ReachLimits {
                max_length_km: 500.0,
                max_intermediate_nodes: 8,
            }),
            ..Default::default()
        };
        let inputs = PlanInputs {
            name: "regen".into(),
            topology,
            traffic,
            catalog,
            options,
        };

        let run = run_plan(&inputs).unwrap();
        let result = &run.result;
        // The 800 km route splits at B into two transparent segments,
        // each with its own lightpath and transceiver pair.
        assert_eq!(result.groups.len(), 2);
        let p0 = &result.periods[0];
        assert_eq!(p0.regenerator_sites, 1);
        assert_eq!(p0.cumulative_lightpaths, 2);
        assert_eq!(p0.transceivers, 4);
        assert_eq!(p0.served_gbps, 200);
        assert_eq!(p0.blocked_gbps, 0);

        let demand = &result.demands[0];
        assert_eq!(demand.segments, 2);
        assert_eq!(demand.regen_nodes, vec!["B"]);
        assert_eq!(demand.served_gbps, vec![200]);

        // Segments reuse the same slots: both start at slot 0.
        for group in &result.groups {
            assert_eq!(group.periods[0].lightpaths[0].start_slot, Some(0));
        }
    }

    #[test]
    fn reports_are_byte_identical_across_runs() {
        let inputs = contention_inputs();
        let run1 = run_plan(&inputs).unwrap();
        let run2 = run_plan(&inputs).unwrap();
        let json1 = serde_json::to_string_pretty(&run1.result).unwrap();
        let json2 = serde_json::to_string_pretty(&run2.result).unwrap();
        assert_eq!(json1, json2);
        assert_eq!(summary_csv(&run1.result), summary_csv(&run2.result));
        assert_eq!(
            serde_json::to_string(&run1.spectrum).unwrap(),
            serde_json::to_string(&run2.spectrum).unwrap()
        );

        let dir = tempfile::tempdir().unwrap();
        let out1 = dir.path().join("a");
        let out2 = dir.path().join("b");
        emit_report(&run1.result, Some(&run1.spectrum), &out1).unwrap();
        emit_report(&run2.result, Some(&run2.spectrum), &out2).unwrap();
        for file in ["summary.csv", "allocations.json", "spectrum.json"] {
            let a = std::fs::read(out1.join(file)).unwrap();
            let b = std::fs::read(out2.join(file)).unwrap();
            assert_eq!(a, b, "{file} differs between identical runs");
        }

        // A result round-trips through its own report file.
        let loaded = load_result(out1.join("allocations.json")).unwrap();
        assert_eq!(loaded, run1.result);
    }

    #[test]
    fn comparison_pairs_periods() {
        let a = run_plan(&two_node_inputs()).unwrap().result;
        let mut b = a.clone();
        b.periods[1].blocked_gbps = 40;
        let rows = compare_runs(&a, &b).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].blocked_a_gbps, 0);
        assert_eq!(rows[1].blocked_b_gbps, 40);
        let csv = comparison_csv(&rows);
        assert!(csv.starts_with("period,"));
        assert_eq!(csv.lines().count(), 3);

        b.periods.pop();
        assert!(matches!(compare_runs(&a, &b), Err(PlannerError::Compare(_))));
    }

    #[test]
    fn scenario_files_resolve_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path();
        std::fs::write(
            base.join("scenario.json"),
            serde_json::json!({
                "schema_version": 1,
                "name": "t",
                "topology": "topo.json",
                "traffic": "traffic.json",
                "catalog": "catalog.json",
                "seed": 11,
                "regeneration": {"enabled": true, "max_length_km": 600.0,
                                  "max_intermediate_nodes": 3},
                "qot": {"launch_power_dbm": 1.0, "l_band": true},
                "margin_db": 2.0
            })
            .to_string(),
        )
        .unwrap();
        let scenario = load_scenario(base.join("scenario.json")).unwrap();
        assert_eq!(scenario.name, "t");
        assert_eq!(scenario.topology_path, base.join("topo.json"));
        assert_eq!(scenario.options.seed, 11);
        assert_eq!(scenario.options.margin_db, Some(2.0));
        assert!(scenario.options.qot.band.l_enabled);
        let reach = scenario.options.reach.unwrap();
        assert_eq!(reach.max_length_km, 600.0);
        assert_eq!(reach.max_intermediate_nodes, 3);

        // Disabled regeneration yields no reach limits.
        std::fs::write(
            base.join("off.json"),
            serde_json::json!({
                "schema_version": 1,
                "name": "t",
                "topology": "topo.json",
                "traffic": "traffic.json",
                "catalog": "catalog.json",
                "regeneration": {"enabled": false}
            })
            .to_string(),
        )
        .unwrap();
        assert!(load_scenario(base.join("off.json")).unwrap().options.reach.is_none());

        // Enabled regeneration without a reach length is rejected.
        std::fs::write(
            base.join("bad.json"),
            serde_json::json!({
                "schema_version": 1,
                "name": "t",
                "topology": "topo.json",
                "traffic": "traffic.json",
                "catalog": "catalog.json",
                "regeneration": {"enabled": true}
            })
            .to_string(),
        )
        .unwrap();
        assert!(matches!(
            load_scenario(base.join("bad.json")).unwrap_err(),
            PlannerError::Scenario(_)
        ));

        std::fs::write(
            base.join("old.json"),
            serde_json::json!({
                "schema_version": 9,
                "name": "t",
                "topology": "topo.json",
                "traffic": "traffic.json",
                "catalog": "catalog.json"
            })
            .to_string(),
        )
        .unwrap();
        assert!(matches!(
            load_scenario(base.join("old.json")).unwrap_err(),
            PlannerError::ScenarioVersion { found: 9 }
        ));
    }
}
