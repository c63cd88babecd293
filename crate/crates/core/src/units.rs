//! Unit conversions and physical constants shared across the crate.
//!
//! Conventions: powers cross module boundaries in dBm, ratios in dB,
//! frequencies in THz and bandwidths in GHz. The physics kernels convert
//! to SI (watts, hertz, metres) at their boundary and nowhere else.

/// Planck constant, J s.
pub const PLANCK_J_S: f64 = 6.626_070_15e-34;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

/// Flex-grid slot width, GHz.
pub const SLOT_WIDTH_GHZ: f64 = 12.5;

/// Noise reference bandwidth, GHz. Matches the 0.1 nm optical convention
/// near 1550 nm; OSNR/GSNR figures and transceiver thresholds all use it.
pub const REFERENCE_BANDWIDTH_GHZ: f64 = 12.5;

/// Frequency used for route-level OSNR budgets, THz.
pub const OSNR_REFERENCE_FREQ_THZ: f64 = 193.4;

/// Wavelength at which chromatic dispersion figures are quoted, nm.
pub const DISPERSION_REFERENCE_WAVELENGTH_NM: f64 = 1550.0;

/// dB ratio to linear ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Linear ratio to dB.
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// dBm to watts.
pub fn dbm_to_watt(dbm: f64) -> f64 {
    1e-3 * db_to_linear(dbm)
}

/// Watts to dBm.
pub fn watt_to_dbm(watt: f64) -> f64 {
    linear_to_db(watt / 1e-3)
}

/// dBm to milliwatts.
pub fn dbm_to_mw(dbm: f64) -> f64 {
    db_to_linear(dbm)
}

/// Milliwatts to dBm.
pub fn mw_to_dbm(mw: f64) -> f64 {
    linear_to_db(mw)
}

/// Chromatic dispersion D (ps/nm/km) to group-velocity dispersion
/// beta2 (ps^2/km), evaluated at the 1550 nm reference wavelength.
pub fn dispersion_to_beta2_ps2_km(dispersion_ps_nm_km: f64) -> f64 {
    // c in nm/ps so the units cancel to ps^2/km directly.
    let c_nm_ps = SPEED_OF_LIGHT_M_S * 1e-3;
    let lambda = DISPERSION_REFERENCE_WAVELENGTH_NM;
    -dispersion_ps_nm_km * lambda * lambda / (2.0 * core::f64::consts::PI * c_nm_ps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn db_round_trip() {
        assert_relative_eq!(db_to_linear(3.0), 1.995_262_314_968_879_6, max_relative = 1e-12);
        assert_relative_eq!(linear_to_db(db_to_linear(-4.7)), -4.7, max_relative = 1e-12);
        assert_relative_eq!(dbm_to_watt(0.0), 1e-3);
        assert_relative_eq!(watt_to_dbm(1e-3), 0.0, epsilon = 1e-12);
        assert_relative_eq!(mw_to_dbm(dbm_to_mw(7.25)), 7.25, max_relative = 1e-12);
    }

    #[test]
    fn dispersion_conversion_matches_known_fibre_value() {
        // Standard single-mode fibre: D = 16.7 ps/nm/km <-> beta2 = -21.3 ps^2/km.
        let beta2 = dispersion_to_beta2_ps2_km(16.7);
        assert_relative_eq!(beta2, -21.3, epsilon = 0.05);
        assert!(beta2 < 0.0);
    }
}
