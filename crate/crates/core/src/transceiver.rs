//! Transceiver catalog: operating configurations, admission filtering,
//! and minimum-spectrum allocation of a demand onto lightpaths.
//!
//! Each catalog entry pairs a net data rate with the spectral width and
//! OSNR threshold the configuration needs. Admission is threshold plus
//! margin against an achieved (G)SNR figure, boundary inclusive. The
//! allocator picks the multiset of admissible configurations covering a
//! requested rate with the least total occupied bandwidth, breaking ties
//! by fewer lightpaths, then smaller rate overshoot, then the
//! lexicographically smallest id multiset, which makes the result unique
//! and reproducible.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::REFERENCE_BANDWIDTH_GHZ;
use crate::Real;

pub const CATALOG_SCHEMA_VERSION: u32 = 1;

/// Bandwidth limits a single carrier can occupy, GHz.
pub const MIN_CONFIG_BANDWIDTH_GHZ: Real = 25.0;
pub const MAX_CONFIG_BANDWIDTH_GHZ: Real = 100.0;

#[derive(Debug, Error)]
pub enum TransceiverError {
    #[error("failed to read catalog file: {0}")]
    Io(#[from] std::io::Error),
    #[error("catalog is not valid JSON: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("unsupported catalog schema_version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("invalid catalog at {path}: {message}")]
    Invalid { path: String, message: String },
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> TransceiverError {
    TransceiverError::Invalid {
        path: path.into(),
        message: message.into(),
    }
}

/// Modulation-format label; carried through to reports, never interpreted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Modulation(String);

impl Modulation {
    pub fn new(label: impl Into<String>) -> Self {
        Self(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// One operating configuration of the bandwidth-variable transceiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrxConfig {
    pub id: String,
    pub data_rate_gbps: u64,
    /// Spectral width the carrier occupies (guard bands included).
    pub bandwidth_ghz: Real,
    pub symbol_rate_gbd: Real,
    pub modulation: Modulation,
    /// Required OSNR in the 12.5 GHz reference bandwidth.
    pub min_osnr_db: Real,
}

#[derive(Debug, Deserialize)]
struct CatalogFile {
    schema_version: u32,
    #[serde(default = "default_reference_bandwidth")]
    reference_bandwidth_ghz: Real,
    #[serde(default = "default_margin")]
    default_margin_db: Real,
    configs: Vec<TrxConfig>,
}

fn default_reference_bandwidth() -> Real {
    REFERENCE_BANDWIDTH_GHZ
}

fn default_margin() -> Real {
    1.0
}

/// Validated transceiver catalog.
#[derive(Debug, Clone)]
pub struct Catalog {
    configs: Vec<TrxConfig>,
    pub default_margin_db: Real,
    /// Non-fatal oddities found while loading.
    pub warnings: Vec<String>,
}

impl Catalog {
    pub fn new(mut configs: Vec<TrxConfig>, default_margin_db: Real) -> Result<Self, TransceiverError> {
        if configs.is_empty() {
            return Err(invalid("configs", "catalog must declare at least one config"));
        }
        if !(default_margin_db >= 0.0 && default_margin_db.is_finite()) {
            return Err(invalid("default_margin_db", "margin must be finite and >= 0"));
        }
        let mut seen = BTreeSet::new();
        for (i, cfg) in configs.iter().enumerate() {
            let at = |field: &str| format!("configs[{i}].{field}");
            if cfg.id.is_empty() {
                return Err(invalid(at("id"), "id must be non-empty"));
            }
            if !seen.insert(cfg.id.clone()) {
                return Err(invalid(at("id"), format!("duplicate config id {:?}", cfg.id)));
            }
            if cfg.data_rate_gbps == 0 {
                return Err(invalid(at("data_rate_gbps"), "data rate must be > 0"));
            }
            if !(cfg.bandwidth_ghz.is_finite()
                && (MIN_CONFIG_BANDWIDTH_GHZ..=MAX_CONFIG_BANDWIDTH_GHZ)
                    .contains(&cfg.bandwidth_ghz))
            {
                return Err(invalid(
                    at("bandwidth_ghz"),
                    format!(
                        "bandwidth must lie in [{MIN_CONFIG_BANDWIDTH_GHZ}, \
                         {MAX_CONFIG_BANDWIDTH_GHZ}] GHz, got {}",
                        cfg.bandwidth_ghz
                    ),
                ));
            }
            if !(cfg.symbol_rate_gbd > 0.0 && cfg.symbol_rate_gbd.is_finite()) {
                return Err(invalid(at("symbol_rate_gbd"), "symbol rate must be finite and > 0"));
            }
            if cfg.symbol_rate_gbd > cfg.bandwidth_ghz {
                return Err(invalid(
                    at("symbol_rate_gbd"),
                    "symbol rate cannot exceed the occupied bandwidth",
                ));
            }
            if !cfg.min_osnr_db.is_finite() {
                return Err(invalid(at("min_osnr_db"), "OSNR threshold must be finite"));
            }
        }
        // Canonical id order keeps every downstream enumeration stable.
        configs.sort_by(|a, b| a.id.cmp(&b.id));

        let mut warnings = Vec::new();
        let mut by_rate: Vec<&TrxConfig> = configs.iter().collect();
        by_rate.sort_by_key(|c| c.data_rate_gbps);
        for pair in by_rate.windows(2) {
            if pair[1].data_rate_gbps > pair[0].data_rate_gbps
                && pair[1].min_osnr_db < pair[0].min_osnr_db
            {
                warnings.push(format!(
                    "config {:?} carries more than {:?} yet requires less OSNR \
                     ({} dB vs {} dB); check the catalog",
                    pair[1].id, pair[0].id, pair[1].min_osnr_db, pair[0].min_osnr_db
                ));
            }
        }
        Ok(Self {
            configs,
            default_margin_db,
            warnings,
        })
    }

    pub fn configs(&self) -> &[TrxConfig] {
        &self.configs
    }

    pub fn config(&self, id: &str) -> Option<&TrxConfig> {
        self.configs.iter().find(|c| c.id == id)
    }

    /// Configs whose threshold plus `margin_db` is met by `snr_db`,
    /// boundary inclusive. Serves both the route-OSNR pre-filter and the
    /// GSNR admission filter.
    pub fn admissible(&self, snr_db: Real, margin_db: Real) -> Vec<TrxConfig> {
        self.configs
            .iter()
            .filter(|c| c.min_osnr_db + margin_db <= snr_db)
            .cloned()
            .collect()
    }
}

pub fn catalog_from_str(text: &str) -> Result<Catalog, TransceiverError> {
    let file: CatalogFile = serde_json::from_str(text)?;
    if file.schema_version != CATALOG_SCHEMA_VERSION {
        return Err(TransceiverError::SchemaVersion {
            found: file.schema_version,
            expected: CATALOG_SCHEMA_VERSION,
        });
    }
    if file.reference_bandwidth_ghz != REFERENCE_BANDWIDTH_GHZ {
        return Err(invalid(
            "reference_bandwidth_ghz",
            format!(
                "OSNR thresholds are defined in the {REFERENCE_BANDWIDTH_GHZ} GHz reference \
                 bandwidth, got {}",
                file.reference_bandwidth_ghz
            ),
        ));
    }
    Catalog::new(file.configs, file.default_margin_db)
}

pub fn load_catalog(path: impl AsRef<Path>) -> Result<Catalog, TransceiverError> {
    catalog_from_str(&std::fs::read_to_string(path)?)
}

/// Lightpath-count window for covering `rate_gbps` from `configs`:
/// fewest possible (all highest-rate) to most needed (all lowest-rate).
/// Zero rate needs zero lightpaths.
pub fn lp_count_bounds(rate_gbps: u64, configs: &[TrxConfig]) -> (u64, u64) {
    assert!(!configs.is_empty(), "lp_count_bounds needs at least one config");
    if rate_gbps == 0 {
        return (0, 0);
    }
    let max_rate = configs.iter().map(|c| c.data_rate_gbps).max().unwrap();
    let min_rate = configs.iter().map(|c| c.data_rate_gbps).min().unwrap();
    (rate_gbps.div_ceil(max_rate), rate_gbps.div_ceil(min_rate))
}

/// A multiset of transceiver configurations covering one demand,
/// kept in id order.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub lightpaths: Vec<TrxConfig>,
}

impl Allocation {
    pub fn empty() -> Self {
        Self { lightpaths: Vec::new() }
    }

    pub fn lp_count(&self) -> usize {
        self.lightpaths.len()
    }

    pub fn total_rate_gbps(&self) -> u64 {
        self.lightpaths.iter().map(|c| c.data_rate_gbps).sum()
    }

    pub fn total_bandwidth_ghz(&self) -> Real {
        self.lightpaths.iter().map(|c| c.bandwidth_ghz).sum()
    }

    pub fn config_ids(&self) -> Vec<&str> {
        self.lightpaths.iter().map(|c| c.id.as_str()).collect()
    }
}

// Candidate ranking used during the search; indices are non-decreasing
// positions into the id-sorted config slice, so index order is id order.
fn better(
    cand: (&[usize], Real, u64),
    best: (&[usize], Real, u64),
    demand: u64,
) -> bool {
    let (c_idx, c_bw, c_rate) = cand;
    let (b_idx, b_bw, b_rate) = best;
    match c_bw.total_cmp(&b_bw) {
        core::cmp::Ordering::Less => return true,
        core::cmp::Ordering::Greater => return false,
        core::cmp::Ordering::Equal => {}
    }
    match c_idx.len().cmp(&b_idx.len()) {
        core::cmp::Ordering::Less => return true,
        core::cmp::Ordering::Greater => return false,
        core::cmp::Ordering::Equal => {}
    }
    match (c_rate - demand).cmp(&(b_rate - demand)) {
        core::cmp::Ordering::Less => return true,
        core::cmp::Ordering::Greater => return false,
        core::cmp::Ordering::Equal => {}
    }
    c_idx < b_idx
}

/// Covers `rate_gbps` with a minimum-bandwidth multiset drawn from
/// `admissible`, or `None` when the rate is positive and no config is
/// admissible. Ties fall to fewer lightpaths, then smaller overshoot,
/// then the lexicographically smallest id multiset.
pub fn allocate(rate_gbps: u64, admissible: &[TrxConfig]) -> Option<Allocation> {
    if rate_gbps == 0 {
        return Some(Allocation::empty());
    }
    if admissible.is_empty() {
        return None;
    }
    let mut configs: Vec<&TrxConfig> = admissible.iter().collect();
    configs.sort_by(|a, b| a.id.cmp(&b.id));

    let max_rate = configs.iter().map(|c| c.data_rate_gbps).max().unwrap();
    let (_, n_max) = lp_count_bounds(
        rate_gbps,
        &configs.iter().map(|c| (*c).clone()).collect::<Vec<_>>(),
    );
    let n_max = n_max as usize;

    struct Search<'a> {
        configs: &'a [&'a TrxConfig],
        demand: u64,
        n_max: usize,
        max_rate: u64,
        best: Option<(Vec<usize>, Real, u64)>,
        stack: Vec<usize>,
    }

    impl Search<'_> {
        // Extends the current partial multiset with configs at index
        // >= `from`; any feasible extension of a feasible multiset is
        // strictly wider, so recursion stops at first feasibility.
        fn explore(&mut self, from: usize, bw: Real, rate: u64) {
            if rate >= self.demand {
                let cand = (self.stack.as_slice(), bw, rate);
                let replace = match &self.best {
                    None => true,
                    Some((b_idx, b_bw, b_rate)) => {
                        better(cand, (b_idx, *b_bw, *b_rate), self.demand)
                    }
                };
                if replace {
                    self.best = Some((self.stack.clone(), bw, rate));
                }
                return;
            }
            if self.stack.len() == self.n_max {
                return;
            }
            // Even all-highest-rate extensions cannot reach the demand.
            let slots_left = (self.n_max - self.stack.len()) as u64;
            if rate + slots_left * self.max_rate < self.demand {
                return;
            }
            for i in from..self.configs.len() {
                let next_bw = bw + self.configs[i].bandwidth_ghz;
                // A partial already at the incumbent's width can only
                // finish strictly wider.
                if let Some((_, best_bw, _)) = &self.best {
                    if next_bw.total_cmp(best_bw).is_ge() && rate + self.configs[i].data_rate_gbps < self.demand {
                        continue;
                    }
                    if next_bw.total_cmp(best_bw).is_gt() {
                        continue;
                    }
                }
                self.stack.push(i);
                self.explore(i, next_bw, rate + self.configs[i].data_rate_gbps);
                self.stack.pop();
            }
        }
    }

    let mut search = Search {
        configs: &configs,
        demand: rate_gbps,
        n_max,
        max_rate,
        best: None,
        stack: Vec::new(),
    };
    search.explore(0, 0.0, 0);

    let (indices, _, _) = search.best.expect("n_max copies of any config cover the demand");
    Some(Allocation {
        lightpaths: indices.iter().map(|&i| configs[i].clone()).collect(),
    })
}

/// Tops an existing allocation up to `target_rate_gbps`, adding new
/// lightpaths only for the uncovered residual. Returns the additional
/// lightpaths; `None` when a positive residual meets an empty admissible
/// set. Already-running lightpaths are never reshaped or removed.
pub fn incremental_allocate(
    existing: &Allocation,
    target_rate_gbps: u64,
    admissible: &[TrxConfig],
) -> Option<Allocation> {
    let residual = target_rate_gbps.saturating_sub(existing.total_rate_gbps());
    allocate(residual, admissible)
}
