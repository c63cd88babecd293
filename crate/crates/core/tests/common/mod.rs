//! Reference implementations the integration suites compare the engine
//! against. Everything here favours obviousness over speed: plain
//! midpoint sums, exhaustive enumeration, no shared code with the crate.

use flexplan_core::transceiver::TrxConfig;

// --- dense-grid nonlinear interference reference ----------------------------

#[derive(Debug, Clone, Copy)]
pub struct OracleChannel {
    pub center_hz: f64,
    pub symbol_rate_hz: f64,
    pub power_w: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct OracleSpan {
    pub length_km: f64,
    pub attenuation_db_per_km: f64,
    pub beta2_ps2_per_km: f64,
    pub gamma_per_w_km: f64,
}

/// Interference spectral density one span leaves on `probe`, W/Hz,
/// by midpoint summation on a `grid` x `grid` mesh per channel pair.
///
/// Channels are rectangular spectra of width equal to their symbol
/// rate, so the product of the first two factors is piecewise constant
/// on the mesh; only the shifted third factor and the phase-mismatch
/// weight vary inside a cell.
pub fn dense_nli_psd_one_span(
    channels: &[OracleChannel],
    probe: usize,
    span: &OracleSpan,
    grid: usize,
) -> f64 {
    let alpha_per_m = span.attenuation_db_per_km * std::f64::consts::LN_10 / 10.0 / 1e3;
    let beta2_s2_per_m = span.beta2_ps2_per_km * 1e-27;
    let length_m = span.length_km * 1e3;
    let gamma_per_w_m = span.gamma_per_w_km * 1e-3;
    let f_probe = channels[probe].center_hz;

    let psd_at = |f: f64| -> f64 {
        channels
            .iter()
            .filter(|c| (f - c.center_hz).abs() <= c.symbol_rate_hz / 2.0)
            .map(|c| c.power_w / c.symbol_rate_hz)
            .sum()
    };
    let mismatch = |d1: f64, d2: f64| -> f64 {
        let detune = 4.0 * std::f64::consts::PI.powi(2) * beta2_s2_per_m * d1 * d2;
        let numer = 1.0 + (-2.0 * alpha_per_m * length_m).exp()
            - 2.0 * (-alpha_per_m * length_m).exp() * (detune * length_m).cos();
        numer / (alpha_per_m.powi(2) + detune.powi(2))
    };

    let mut total = 0.0;
    for a in channels {
        let g1 = a.power_w / a.symbol_rate_hz;
        let h1 = a.symbol_rate_hz / grid as f64;
        for b in channels {
            let g2 = b.power_w / b.symbol_rate_hz;
            let h2 = b.symbol_rate_hz / grid as f64;
            let mut cell_sum = 0.0;
            for i in 0..grid {
                let f1 = a.center_hz - a.symbol_rate_hz / 2.0 + (i as f64 + 0.5) * h1;
                for j in 0..grid {
                    let f2 = b.center_hz - b.symbol_rate_hz / 2.0 + (j as f64 + 0.5) * h2;
                    let g3 = psd_at(f1 + f2 - f_probe);
                    if g3 == 0.0 {
                        continue;
                    }
                    cell_sum += g3 * mismatch(f1 - f_probe, f2 - f_probe);
                }
            }
            total += g1 * g2 * cell_sum * h1 * h2;
        }
    }
    (16.0 / 27.0) * gamma_per_w_m.powi(2) * total
}

// --- exhaustive transceiver allocation reference ----------------------------

/// Best config multiset covering `rate_gbps`, by full enumeration of
/// every multiset up to the trivial cardinality cap. Ranking: least
/// total bandwidth, fewest lightpaths, least overshoot, smallest id
/// multiset. Returns the sorted config ids, `None` when nothing covers
/// a positive rate.
pub fn exhaustive_allocate(rate_gbps: u64, admissible: &[TrxConfig]) -> Option<Vec<String>> {
    if rate_gbps == 0 {
        return Some(Vec::new());
    }
    if admissible.is_empty() {
        return None;
    }
    let mut configs: Vec<&TrxConfig> = admissible.iter().collect();
    configs.sort_by(|a, b| a.id.cmp(&b.id));
    let min_rate = configs.iter().map(|c| c.data_rate_gbps).min().unwrap();
    let n_max = rate_gbps.div_ceil(min_rate) as usize;

    let mut best: Option<(f64, usize, u64, Vec<usize>)> = None;
    let mut stack: Vec<usize> = Vec::new();
    enumerate(&configs, rate_gbps, n_max, 0, &mut stack, &mut best);
    best.map(|(_, _, _, indices)| {
        indices.iter().map(|&i| configs[i].id.clone()).collect()
    })
}

fn enumerate(
    configs: &[&TrxConfig],
    demand: u64,
    n_max: usize,
    from: usize,
    stack: &mut Vec<usize>,
    best: &mut Option<(f64, usize, u64, Vec<usize>)>,
) {
    let rate: u64 = stack.iter().map(|&i| configs[i].data_rate_gbps).sum();
    if rate >= demand {
        let bw: f64 = stack.iter().map(|&i| configs[i].bandwidth_ghz).sum();
        let cand = (bw, stack.len(), rate - demand, stack.clone());
        let replace = match best {
            None => true,
            Some((b_bw, b_len, b_over, b_idx)) => {
                (cand.0.total_cmp(b_bw), cand.1.cmp(b_len), cand.2.cmp(b_over), cand.3.cmp(b_idx))
                    < (
                        std::cmp::Ordering::Equal,
                        std::cmp::Ordering::Equal,
                        std::cmp::Ordering::Equal,
                        std::cmp::Ordering::Equal,
                    )
            }
        };
        if replace {
            *best = Some(cand);
        }
        return;
    }
    if stack.len() == n_max {
        return;
    }
    for i in from..configs.len() {
        stack.push(i);
        enumerate(configs, demand, n_max, i, stack, best);
        stack.pop();
    }
}

// --- exhaustive regenerator placement reference -----------------------------

/// Fewest regenerators that keep every transparent segment of a path
/// within `max_length_km` and `max_intermediate_nodes`, by trying all
/// subsets of interior nodes. `None` when no subset works.
pub fn min_regenerators(
    link_lengths_km: &[f64],
    max_length_km: f64,
    max_intermediate_nodes: usize,
) -> Option<usize> {
    let interior = link_lengths_km.len().saturating_sub(1);
    let mut best: Option<usize> = None;
    for mask in 0u32..(1 << interior) {
        let mut feasible = true;
        let mut seg_len = 0.0;
        let mut seg_links = 0usize;
        for (i, &len) in link_lengths_km.iter().enumerate() {
            seg_len += len;
            seg_links += 1;
            let cut = i < interior && mask & (1 << i) != 0;
            if cut || i == link_lengths_km.len() - 1 {
                if seg_len > max_length_km || seg_links - 1 > max_intermediate_nodes {
                    feasible = false;
                    break;
                }
                seg_len = 0.0;
                seg_links = 0;
            }
        }
        if feasible {
            let cuts = mask.count_ones() as usize;
            best = Some(best.map_or(cuts, |b| b.min(cuts)));
        }
    }
    best
}

// --- fixture builders -------------------------------------------------------

/// Two-node topology whose single link concatenates the given spans.
pub fn chain_topology_json(spans: &[OracleSpan], noise_figure_db: f64) -> String {
    let span_objs: Vec<String> = spans
        .iter()
        .map(|s| {
            format!(
                r#"{{"length_km": {}, "attenuation_db_per_km": {}, "beta2_ps2_per_km": {}, "gamma_per_w_km": {}, "amp_noise_figure_db": {}}}"#,
                s.length_km, s.attenuation_db_per_km, s.beta2_ps2_per_km, s.gamma_per_w_km, noise_figure_db
            )
        })
        .collect();
    format!(
        r#"{{
  "schema_version": 1,
  "nodes": [
    {{"id": "head", "name": "Head", "add_drop": true}},
    {{"id": "tail", "name": "Tail", "add_drop": true}}
  ],
  "links": [
    {{"id": "head-tail", "endpoints": ["head", "tail"], "spans": [{}]}}
  ]
}}"#,
        span_objs.join(", ")
    )
}

/// Open chain of single-span links with the given lengths.
pub fn path_topology_json(link_lengths_km: &[f64]) -> String {
    let nodes: Vec<String> = (0..=link_lengths_km.len())
        .map(|i| format!(r#"{{"id": "n{i}", "name": "N{i}", "add_drop": true}}"#))
        .collect();
    let links: Vec<String> = link_lengths_km
        .iter()
        .enumerate()
        .map(|(i, len)| {
            format!(
                r#"{{"id": "l{i}", "endpoints": ["n{i}", "n{}"], "spans": [{{"length_km": {len}, "attenuation_db_per_km": 0.2, "beta2_ps2_per_km": -21.3, "gamma_per_w_km": 1.3, "amp_noise_figure_db": 5.0}}]}}"#,
                i + 1
            )
        })
        .collect();
    format!(
        r#"{{"schema_version": 1, "nodes": [{}], "links": [{}]}}"#,
        nodes.join(", "),
        links.join(", ")
    )
}
