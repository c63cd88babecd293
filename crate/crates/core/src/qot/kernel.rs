//! Scalar physics kernels behind the quality-of-transmission engine.
//!
//! Everything here is a pure formula in SI units (hertz, watts, metres),
//! generic over the floating-point type. The engine instantiates these at
//! `f64`; the generic form keeps the maths testable in isolation and free
//! of any domain types.

use crate::scalar::Scalar;

/// Planck constant as the generic scalar.
fn planck<F: Scalar>() -> F {
    F::from_f64(crate::units::PLANCK_J_S)
}

/// ASE noise power added by one amplifier, in watts.
///
/// gain * noise-figure * h * frequency * bandwidth, all linear. With the
/// gain normalised to the preceding span's loss, summing this over the
/// spans of a route gives the end-of-route ASE power in `bandwidth_hz`.
pub fn amplifier_ase_power_w<F: Scalar>(gain_linear: F, nf_linear: F, freq_hz: F, bandwidth_hz: F) -> F {
    gain_linear * nf_linear * planck::<F>() * freq_hz * bandwidth_hz
}

/// Four-wave-mixing phase-matching kernel of one span.
///
/// For frequency offsets d1 = f1 - f, d2 = f2 - f from the probe channel,
/// the span's contribution to the nonlinear-interference integrand is
///
/// ```text
///             1 + e^(-2 a L) - 2 e^(-a L) cos(4 pi^2 b2 d1 d2 L)
/// mu2(d1,d2) = -----------------------------------------------
///                       a^2 + (4 pi^2 b2 d1 d2)^2
/// ```
///
/// with `a` the power attenuation in 1/m, `b2` the group-velocity
/// dispersion in s^2/m and `L` the span length in metres. At d1*d2 = 0
/// this reduces to the squared effective length ((1 - e^(-a L)) / a)^2.
#[derive(Debug, Clone, Copy)]
pub struct SpanKernel<F> {
    alpha_per_m: F,
    /// 4 pi^2 b2, the phase-mismatch rate per (Hz^2 m).
    phase_rate: F,
    /// 4 pi^2 b2 L, the accumulated phase mismatch per Hz^2.
    phase_total: F,
    exp_al: F,
    exp_2al: F,
}

impl<F: Scalar> SpanKernel<F> {
    pub fn new(alpha_per_m: F, beta2_s2_per_m: F, length_m: F) -> Self {
        let four_pi2 = F::from_f64(4.0 * core::f64::consts::PI * core::f64::consts::PI);
        let phase_rate = four_pi2 * beta2_s2_per_m;
        let al = alpha_per_m * length_m;
        Self {
            alpha_per_m,
            phase_rate,
            phase_total: phase_rate * length_m,
            exp_al: (-al).exp(),
            exp_2al: (-(al + al)).exp(),
        }
    }

    /// mu2 at offsets (d1, d2) hertz.
    pub fn mu_squared(&self, d1: F, d2: F) -> F {
        let two = F::from_f64(2.0);
        let dd = d1 * d2;
        let mismatch = self.phase_rate * dd;
        let numerator = F::one() + self.exp_2al - two * self.exp_al * (self.phase_total * dd).cos();
        let denominator = self.alpha_per_m * self.alpha_per_m + mismatch * mismatch;
        numerator / denominator
    }
}

/// Aggregate rectangular power spectral density of a channel comb.
///
/// Channels must be sorted by centre and non-overlapping; at most one
/// covers any frequency, found by binary search.
#[derive(Debug, Clone)]
pub struct PsdProfile<F> {
    lower_hz: Vec<F>,
    upper_hz: Vec<F>,
    level_w_per_hz: Vec<F>,
}

impl<F: Scalar> PsdProfile<F> {
    /// Builds from per-channel (centre Hz, width Hz, power W) triples.
    pub fn new(channels: &[(F, F, F)]) -> Self {
        let half = F::from_f64(0.5);
        let mut lower = Vec::with_capacity(channels.len());
        let mut upper = Vec::with_capacity(channels.len());
        let mut level = Vec::with_capacity(channels.len());
        for &(centre, width, power) in channels {
            lower.push(centre - width * half);
            upper.push(centre + width * half);
            level.push(power / width);
        }
        Self {
            lower_hz: lower,
            upper_hz: upper,
            level_w_per_hz: level,
        }
    }

    /// PSD at `f` hertz, W/Hz; zero between channels.
    pub fn eval(&self, f: F) -> F {
        // Index of the last channel whose lower edge is <= f.
        let idx = self.lower_hz.partition_point(|&lo| lo <= f);
        if idx == 0 {
            return F::zero();
        }
        let k = idx - 1;
        if f <= self.upper_hz[k] {
            self.level_w_per_hz[k]
        } else {
            F::zero()
        }
    }

    /// Support interval of channel `k` as (lower, upper) hertz.
    pub fn support(&self, k: usize) -> (F, F) {
        (self.lower_hz[k], self.upper_hz[k])
    }

    pub fn len(&self) -> usize {
        self.lower_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower_hz.is_empty()
    }
}
