//! Quality-of-transmission engine: ASE budgets, nonlinear interference,
//! and per-group GSNR bounds.
//!
//! Noise model: every amplifier contributes ASE proportional to its gain
//! (normalised to the span loss) and noise figure; nonlinear interference
//! follows the incoherent Gaussian-noise model, accumulating each span's
//! contribution in power. Per span the NLI spectral density at a probe
//! frequency f is
//!
//! ```text
//! G_nli(f) = (16/27) gamma^2 * integral G(f1) G(f2) G(f1+f2-f) mu2(f1-f, f2-f) df1 df2
//! ```
//!
//! with `G` the aggregate rectangular launch PSD and `mu2` the span's
//! phase-matching kernel ([`kernel::SpanKernel`]). The double integral is
//! evaluated adaptively ([`crate::quad`]), seeded on the channel-pair
//! support rectangles so the PSD discontinuities never cross a cell
//! interior at the start.
//!
//! Signal, ASE, and NLI powers are all referenced to the 12.5 GHz noise
//! bandwidth when they meet in a GSNR, so transceiver thresholds compare
//! directly.
//!
//! For planning, [`QotEngine::gsnr_bounds`] brackets a grouped demand's
//! GSNR with exactly two full model evaluations: one homogeneous
//! placement built from the lowest-rate admissible transceiver
//! configuration and one from the highest-rate, both centred mid C-band,
//! probing the central channel as the worst case. The engine counts model
//! evaluations so callers can assert the two-per-group-per-period budget.

pub mod kernel;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::quad::{adaptive_2d, QuadOptions, Rect};
use crate::routing::Route;
use crate::topology::{FiberSpan, NetworkTopology, TopologyError};
use crate::traffic::GroupedDemand;
use crate::transceiver::TrxConfig;
use crate::units::{
    db_to_linear, dbm_to_watt, linear_to_db, watt_to_dbm, OSNR_REFERENCE_FREQ_THZ,
    REFERENCE_BANDWIDTH_GHZ, SLOT_WIDTH_GHZ,
};
use crate::Real;

use kernel::{amplifier_ase_power_w, PsdProfile, SpanKernel};

#[derive(Debug, Error)]
pub enum QotError {
    #[error("invalid channel placement: {0}")]
    Placement(String),
    #[error(
        "placement overflow: {channels} channels of config {config} need \
         {footprint_ghz} GHz, C-band offers {band_ghz} GHz"
    )]
    PlacementOverflow {
        config: String,
        channels: usize,
        footprint_ghz: Real,
        band_ghz: Real,
    },
    #[error("no admissible config yields an in-band probe placement: {reasons}")]
    BoundUnavailable { reasons: String },
    #[error(
        "nonlinear-interference quadrature did not reach relative tolerance \
         {requested:.1e} (achieved {achieved:.1e}, estimate {estimate_w_per_hz:.3e} W/Hz)"
    )]
    QuadratureNotConverged {
        requested: Real,
        achieved: Real,
        estimate_w_per_hz: Real,
    },
    #[error("channel index {index} out of range for a {len}-channel placement")]
    ChannelIndex { index: usize, len: usize },
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// Spectral windows available to the planner, THz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPlan {
    pub c_start_thz: Real,
    pub c_end_thz: Real,
    pub l_enabled: bool,
    pub l_start_thz: Real,
    pub l_end_thz: Real,
}

impl Default for BandPlan {
    fn default() -> Self {
        Self {
            c_start_thz: 191.3,
            c_end_thz: 196.1,
            l_enabled: false,
            l_start_thz: 186.05,
            l_end_thz: 190.85,
        }
    }
}

impl BandPlan {
    /// Centre of the C-band window; probe placements are centred here.
    pub fn c_center_thz(&self) -> Real {
        0.5 * (self.c_start_thz + self.c_end_thz)
    }

    pub fn c_width_ghz(&self) -> Real {
        (self.c_end_thz - self.c_start_thz) * 1e3
    }

    pub fn l_width_ghz(&self) -> Real {
        (self.l_end_thz - self.l_start_thz) * 1e3
    }

    /// Whole 12.5 GHz slots in the C-band window.
    pub fn c_slots(&self) -> usize {
        (self.c_width_ghz() / SLOT_WIDTH_GHZ).round() as usize
    }

    /// Whole 12.5 GHz slots in the L-band window; zero when disabled.
    pub fn l_slots(&self) -> usize {
        if self.l_enabled {
            (self.l_width_ghz() / SLOT_WIDTH_GHZ).round() as usize
        } else {
            0
        }
    }

    pub fn validate(&self) -> Result<(), QotError> {
        let whole = |width_ghz: Real, name: &str| -> Result<(), QotError> {
            let slots = width_ghz / SLOT_WIDTH_GHZ;
            if width_ghz <= 0.0 || (slots - slots.round()).abs() > 1e-9 {
                return Err(QotError::Placement(format!(
                    "{name} window must span a positive whole number of {SLOT_WIDTH_GHZ} GHz slots"
                )));
            }
            Ok(())
        };
        whole(self.c_width_ghz(), "C-band")?;
        if self.l_enabled {
            whole(self.l_width_ghz(), "L-band")?;
            if self.l_end_thz > self.c_start_thz {
                return Err(QotError::Placement(
                    "L-band window must lie below the C-band window".to_string(),
                ));
            }
        }
        Ok(())
    }

    fn covers(&self, lower_thz: Real, upper_thz: Real) -> bool {
        let eps = 1e-9;
        let in_c = lower_thz >= self.c_start_thz - eps && upper_thz <= self.c_end_thz + eps;
        let in_l = self.l_enabled
            && lower_thz >= self.l_start_thz - eps
            && upper_thz <= self.l_end_thz + eps;
        in_c || in_l
    }
}

/// One channel of a placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    pub center_thz: Real,
    pub symbol_rate_gbd: Real,
    pub launch_power_dbm: Real,
}

impl ChannelSpec {
    /// PSD support (lower, upper) in THz; width equals the symbol rate.
    pub fn support_thz(&self) -> (Real, Real) {
        let half = 0.5 * self.symbol_rate_gbd * 1e-3;
        (self.center_thz - half, self.center_thz + half)
    }
}

/// A comb of co-propagating channels, sorted by centre frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPlacement {
    channels: Vec<ChannelSpec>,
}

impl ChannelPlacement {
    /// Validates ordering, pairwise disjoint supports, and band coverage.
    pub fn new(channels: Vec<ChannelSpec>, band: &BandPlan) -> Result<Self, QotError> {
        if channels.is_empty() {
            return Err(QotError::Placement("a placement needs at least one channel".into()));
        }
        for (i, ch) in channels.iter().enumerate() {
            if !(ch.symbol_rate_gbd > 0.0 && ch.symbol_rate_gbd.is_finite()) {
                return Err(QotError::Placement(format!(
                    "channel {i}: symbol rate must be finite and > 0"
                )));
            }
            let (lo, hi) = ch.support_thz();
            if !band.covers(lo, hi) {
                return Err(QotError::Placement(format!(
                    "channel {i} at {:.4} THz falls outside the enabled bands",
                    ch.center_thz
                )));
            }
            if i > 0 {
                let (_, prev_hi) = channels[i - 1].support_thz();
                if ch.center_thz < channels[i - 1].center_thz {
                    return Err(QotError::Placement("channels must be sorted by centre".into()));
                }
                if lo < prev_hi - 1e-12 {
                    return Err(QotError::Placement(format!(
                        "channels {} and {i} overlap spectrally",
                        i - 1
                    )));
                }
            }
        }
        Ok(Self { channels })
    }

    pub fn channels(&self) -> &[ChannelSpec] {
        &self.channels
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    /// Index probed as the worst case: the (lower) middle channel, which
    /// sees co-propagating neighbours on both sides.
    pub fn central_index(&self) -> usize {
        (self.channels.len() - 1) / 2
    }
}

/// GSNR bracket for a grouped demand.
#[derive(Debug, Clone, PartialEq)]
pub struct GsnrBound {
    pub lower_db: Real,
    pub upper_db: Real,
    /// Config whose probe placement produced the lower figure.
    pub lower_config: String,
    pub upper_config: String,
}

/// Linear-domain noise decomposition behind one GSNR figure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseBudget {
    pub p_signal_mw: Real,
    /// ASE power in the reference bandwidth, mW.
    pub p_ase_mw: Real,
    /// NLI power in the reference bandwidth, mW.
    pub p_nli_mw: Real,
    pub gsnr_db: Real,
}

/// Additive per-span correction to the NLI spectral density.
///
/// Extension point for modulation-format-aware refinements of the
/// Gaussian-noise figure; the engine's default applies no correction.
pub trait NliCorrection: Send + Sync {
    /// Correction in W/Hz added to `channel`'s NLI PSD for one `span`.
    fn correction_w_per_hz(
        &self,
        placement: &ChannelPlacement,
        channel: usize,
        span: &FiberSpan,
    ) -> Real;
}

/// Engine parameters; scenario files override the defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QotParams {
    /// Uniform per-channel launch power.
    pub launch_power_dbm: Real,
    pub reference_bandwidth_ghz: Real,
    pub band: BandPlan,
    pub quadrature_rel_tol: Real,
    pub max_quad_cells: usize,
}

impl Default for QotParams {
    fn default() -> Self {
        Self {
            launch_power_dbm: 0.0,
            reference_bandwidth_ghz: REFERENCE_BANDWIDTH_GHZ,
            band: BandPlan::default(),
            quadrature_rel_tol: 1e-3,
            max_quad_cells: 100_000,
        }
    }
}

/// Bit-exact identity of one per-span interference integral: the
/// placement (centre, symbol rate, power per channel), the probe index,
/// and the span parameters. Equal keys give bitwise-equal integrals.
type SpanIntegralKey = (Vec<(u64, u64, u64)>, usize, [u64; 4]);

/// Quality-of-transmission engine bound to one topology.
pub struct QotEngine<'t> {
    topology: &'t NetworkTopology,
    params: QotParams,
    correction: Option<Arc<dyn NliCorrection>>,
    gn_evaluations: AtomicU64,
    /// Memoised per-span integrals; probe placements repeat across groups
    /// and periods, and a cache hit returns the identical bits.
    span_integrals: Mutex<BTreeMap<SpanIntegralKey, Real>>,
}

impl<'t> QotEngine<'t> {
    pub fn new(topology: &'t NetworkTopology, params: QotParams) -> Self {
        Self {
            topology,
            params,
            correction: None,
            gn_evaluations: AtomicU64::new(0),
            span_integrals: Mutex::new(BTreeMap::new()),
        }
    }

    /// Installs an NLI correction model (replacing the zero default).
    pub fn with_correction(mut self, correction: Arc<dyn NliCorrection>) -> Self {
        self.correction = Some(correction);
        self
    }

    pub fn params(&self) -> &QotParams {
        &self.params
    }

    /// Full nonlinear-interference model evaluations so far.
    pub fn gn_evaluations(&self) -> u64 {
        self.gn_evaluations.load(Ordering::Relaxed)
    }

    /// End-of-route ASE power in `bandwidth_ghz`, watts, at `freq_thz`.
    fn route_ase_power_w(
        &self,
        route: &Route,
        freq_thz: Real,
        bandwidth_ghz: Real,
    ) -> Result<Real, QotError> {
        let spans = self.topology.path_spans(&route.links)?;
        let freq_hz = freq_thz * 1e12;
        let bw_hz = bandwidth_ghz * 1e9;
        let mut total = 0.0;
        for (_, amp) in spans {
            total += amplifier_ase_power_w(
                db_to_linear(amp.gain_db),
                db_to_linear(amp.noise_figure_db),
                freq_hz,
                bw_hz,
            );
        }
        Ok(total)
    }

    /// Route-level amplified-spontaneous-emission OSNR in dB.
    ///
    /// Signal is the full launch power; noise is ASE in
    /// `reference_bandwidth_ghz` at the fixed route-budget frequency.
    pub fn ase_osnr(
        &self,
        route: &Route,
        launch_power_dbm: Real,
        reference_bandwidth_ghz: Real,
    ) -> Result<Real, QotError> {
        self.ase_osnr_at(
            route,
            launch_power_dbm,
            reference_bandwidth_ghz,
            OSNR_REFERENCE_FREQ_THZ,
        )
    }

    /// ASE OSNR evaluated at an explicit frequency.
    pub fn ase_osnr_at(
        &self,
        route: &Route,
        launch_power_dbm: Real,
        reference_bandwidth_ghz: Real,
        freq_thz: Real,
    ) -> Result<Real, QotError> {
        let p_ase = self.route_ase_power_w(route, freq_thz, reference_bandwidth_ghz)?;
        Ok(watt_to_dbm(dbm_to_watt(launch_power_dbm)) - watt_to_dbm(p_ase))
    }

    /// Aggregate NLI spectral density seen by `channel` over the route,
    /// W/Hz, accumulated incoherently across spans. One call counts as
    /// one full model evaluation.
    fn nli_psd_w_per_hz(
        &self,
        placement: &ChannelPlacement,
        route: &Route,
        channel: usize,
    ) -> Result<Real, QotError> {
        if channel >= placement.len() {
            return Err(QotError::ChannelIndex {
                index: channel,
                len: placement.len(),
            });
        }
        self.gn_evaluations.fetch_add(1, Ordering::Relaxed);

        let chans: Vec<(Real, Real, Real)> = placement
            .channels()
            .iter()
            .map(|c| {
                (
                    c.center_thz * 1e12,
                    c.symbol_rate_gbd * 1e9,
                    dbm_to_watt(c.launch_power_dbm),
                )
            })
            .collect();
        let psd = PsdProfile::new(&chans);
        let probe_hz = chans[channel].0;
        let chan_bits: Vec<(u64, u64, u64)> = chans
            .iter()
            .map(|(f, r, p)| (f.to_bits(), r.to_bits(), p.to_bits()))
            .collect();

        // Initial cells are channel-pair support rectangles, so PSD edges
        // in f1 and f2 start on cell boundaries. The integrand is exactly
        // symmetric under (f1, f2) swap, so the strict upper triangle is
        // integrated once and counted twice.
        let mut diag_cells = Vec::with_capacity(psd.len());
        let mut off_cells = Vec::with_capacity(psd.len() * (psd.len() - 1) / 2);
        for i in 0..psd.len() {
            let (x0, x1) = psd.support(i);
            diag_cells.push(Rect::new(x0, x1, x0, x1));
            for j in i + 1..psd.len() {
                let (y0, y1) = psd.support(j);
                off_cells.push(Rect::new(x0, x1, y0, y1));
            }
        }
        let opts = QuadOptions {
            rel_tol: self.params.quadrature_rel_tol,
            abs_tol: 0.0,
            max_cells: self.params.max_quad_cells,
        };

        // Spans with identical physics contribute identical integrals;
        // evaluate once per distinct parameter set and scale by count.
        let spans = self.topology.path_spans(&route.links)?;
        let mut distinct: Vec<(&FiberSpan, usize)> = Vec::new();
        for (span, _) in &spans {
            match distinct.iter_mut().find(|(s, _)| {
                s.length_km == span.length_km
                    && s.attenuation_db_per_km == span.attenuation_db_per_km
                    && s.beta2_ps2_per_km == span.beta2_ps2_per_km
                    && s.gamma_per_w_km == span.gamma_per_w_km
            }) {
                Some((_, count)) => *count += 1,
                None => distinct.push((span, 1)),
            }
        }

        let mut total = 0.0;
        for (span, count) in distinct {
            if span.gamma_per_w_km == 0.0 {
                continue;
            }
            let gamma_per_w_m = span.gamma_per_w_km * 1e-3;
            let key: SpanIntegralKey = (
                chan_bits.clone(),
                channel,
                [
                    span.length_km.to_bits(),
                    span.attenuation_db_per_km.to_bits(),
                    span.beta2_ps2_per_km.to_bits(),
                    span.gamma_per_w_km.to_bits(),
                ],
            );
            let cached = self.span_integrals.lock().expect("no poisoned locks").get(&key).copied();
            let integral = match cached {
                Some(value) => value,
                None => {
                    let alpha_per_m =
                        span.attenuation_db_per_km * core::f64::consts::LN_10 / 10.0 / 1e3;
                    let beta2_s2_per_m = span.beta2_ps2_per_km * 1e-27;
                    let kernel = SpanKernel::new(alpha_per_m, beta2_s2_per_m, span.length_km * 1e3);
                    let integrand = |f1: Real, f2: Real| {
                        let g3 = psd.eval(f1 + f2 - probe_hz);
                        if g3 == 0.0 {
                            return 0.0;
                        }
                        psd.eval(f1)
                            * psd.eval(f2)
                            * g3
                            * kernel.mu_squared(f1 - probe_hz, f2 - probe_hz)
                    };
                    let mut value = 0.0;
                    for (cells, weight) in [(&off_cells, 2.0), (&diag_cells, 1.0)] {
                        if cells.is_empty() {
                            continue;
                        }
                        let result = adaptive_2d(integrand, cells, &opts);
                        if !result.converged {
                            let achieved = if result.value != 0.0 {
                                result.error / result.value.abs()
                            } else {
                                result.error
                            };
                            return Err(QotError::QuadratureNotConverged {
                                requested: self.params.quadrature_rel_tol,
                                achieved,
                                estimate_w_per_hz: result.value,
                            });
                        }
                        value += weight * result.value;
                    }
                    self.span_integrals
                        .lock()
                        .expect("no poisoned locks")
                        .insert(key, value);
                    value
                }
            };
            total += count as Real * (16.0 / 27.0) * gamma_per_w_m * gamma_per_w_m * integral;
        }

        if let Some(correction) = &self.correction {
            for (span, _) in &spans {
                total += correction.correction_w_per_hz(placement, channel, span);
            }
        }
        Ok(total)
    }

    /// NLI power in `channel`'s own bandwidth at the end of the route, mW.
    pub fn gn_nli_power_mw(
        &self,
        placement: &ChannelPlacement,
        route: &Route,
        channel: usize,
    ) -> Result<Real, QotError> {
        let psd = self.nli_psd_w_per_hz(placement, route, channel)?;
        let symbol_rate_hz = placement.channels()[channel].symbol_rate_gbd * 1e9;
        Ok(psd * symbol_rate_hz * 1e3)
    }

    /// Signal, ASE, and NLI budget for one channel of a placement.
    ///
    /// All noise terms are referenced to `reference_bandwidth_ghz` at the
    /// channel's own centre frequency.
    pub fn noise_budget(
        &self,
        placement: &ChannelPlacement,
        route: &Route,
        channel: usize,
    ) -> Result<NoiseBudget, QotError> {
        if channel >= placement.len() {
            return Err(QotError::ChannelIndex {
                index: channel,
                len: placement.len(),
            });
        }
        let spec = placement.channels()[channel];
        let ref_bw = self.params.reference_bandwidth_ghz;
        let p_signal_w = dbm_to_watt(spec.launch_power_dbm);
        let p_ase_w = self.route_ase_power_w(route, spec.center_thz, ref_bw)?;
        let nli_psd = self.nli_psd_w_per_hz(placement, route, channel)?;
        let p_nli_w = nli_psd * ref_bw * 1e9;
        let gsnr_db = linear_to_db(p_signal_w / (p_ase_w + p_nli_w));
        Ok(NoiseBudget {
            p_signal_mw: p_signal_w * 1e3,
            p_ase_mw: p_ase_w * 1e3,
            p_nli_mw: p_nli_w * 1e3,
            gsnr_db,
        })
    }

    /// Generalised SNR of one channel in dB.
    pub fn gsnr(
        &self,
        placement: &ChannelPlacement,
        route: &Route,
        channel: usize,
    ) -> Result<Real, QotError> {
        Ok(self.noise_budget(placement, route, channel)?.gsnr_db)
    }

    /// Homogeneous probe placement: `n` channels of `config`, spaced on
    /// the slot grid, centred mid C-band.
    pub fn homogeneous_placement(
        &self,
        config: &TrxConfig,
        n: usize,
    ) -> Result<ChannelPlacement, QotError> {
        let spacing_ghz = (config.bandwidth_ghz / SLOT_WIDTH_GHZ).ceil() * SLOT_WIDTH_GHZ;
        let footprint_ghz = spacing_ghz * n as Real;
        let band_ghz = self.params.band.c_width_ghz();
        if footprint_ghz > band_ghz + 1e-9 {
            return Err(QotError::PlacementOverflow {
                config: config.id.clone(),
                channels: n,
                footprint_ghz,
                band_ghz,
            });
        }
        let center = self.params.band.c_center_thz();
        let spacing_thz = spacing_ghz * 1e-3;
        let channels = (0..n)
            .map(|k| ChannelSpec {
                center_thz: center + (k as Real - (n as Real - 1.0) / 2.0) * spacing_thz,
                symbol_rate_gbd: config.symbol_rate_gbd,
                launch_power_dbm: self.params.launch_power_dbm,
            })
            .collect();
        ChannelPlacement::new(channels, &self.params.band)
    }

    /// Brackets the GSNR a grouped demand would see from its admissible
    /// configs, with exactly two full model evaluations.
    ///
    /// The lowest- and highest-rate configs in `admissible` (first wins a
    /// rate tie) each yield a homogeneous placement of
    /// ceil(rate / config rate) channels; the central channel of each is
    /// probed and the two figures, ordered, form the bound. A config
    /// whose placement overflows the C-band degrades the bound to the
    /// other config alone; if both overflow no bound exists.
    pub fn gsnr_bounds(
        &self,
        group: &GroupedDemand,
        admissible: &[TrxConfig],
        period: usize,
    ) -> Result<GsnrBound, QotError> {
        assert!(!admissible.is_empty(), "gsnr_bounds needs a non-empty admissible set");
        let rate = group.rate(period);

        let mut min_cfg = &admissible[0];
        let mut max_cfg = &admissible[0];
        for cfg in &admissible[1..] {
            if cfg.data_rate_gbps < min_cfg.data_rate_gbps {
                min_cfg = cfg;
            }
            if cfg.data_rate_gbps > max_cfg.data_rate_gbps {
                max_cfg = cfg;
            }
        }

        let mut evaluations = Vec::with_capacity(2);
        let mut failures = Vec::new();
        for cfg in [min_cfg, max_cfg] {
            // A zero-rate group still gets probed with a single channel.
            let n = rate.div_ceil(cfg.data_rate_gbps).max(1) as usize;
            match self.homogeneous_placement(cfg, n) {
                Ok(placement) => {
                    let gsnr = self.gsnr(&placement, &group.route, placement.central_index())?;
                    evaluations.push((gsnr, cfg.id.clone()));
                }
                Err(e @ QotError::PlacementOverflow { .. }) => failures.push(e.to_string()),
                Err(e) => return Err(e),
            }
        }

        match evaluations.as_slice() {
            [] => Err(QotError::BoundUnavailable {
                reasons: failures.join("; "),
            }),
            [(g, cfg)] => Ok(GsnrBound {
                lower_db: *g,
                upper_db: *g,
                lower_config: cfg.clone(),
                upper_config: cfg.clone(),
            }),
            [(g1, c1), (g2, c2)] => {
                let (lo, hi) = if g1 <= g2 {
                    ((g1, c1), (g2, c2))
                } else {
                    ((g2, c2), (g1, c1))
                };
                Ok(GsnrBound {
                    lower_db: *lo.0,
                    upper_db: *hi.0,
                    lower_config: lo.1.clone(),
                    upper_config: hi.1.clone(),
                })
            }
            _ => unreachable!("at most two probe placements"),
        }
    }
}
