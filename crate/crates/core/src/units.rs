//! Physical constants and unit conventions.
//!
//! Conventions used throughout the crate:
//!
//! - frequencies in hertz, except where a function says GHz (qubit gaps and
//!   dispersion are handled in GHz because that is how they are quoted);
//! - energies (detuning) in microelectronvolts;
//! - rates κ, γ_c and g_c are stored as `rate / 2π` in hertz. The angular
//!   form is only formed inside the formulas that need it;
//! - gate voltages in millivolts, lengths in nanometers.

use std::f64::consts::PI;

/// CODATA 2018 constants (exact SI defining values for e and h).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Elementary charge, C.
    pub e: f64,
    /// Planck constant, J s.
    pub h: f64,
    /// Reduced Planck constant, J s.
    pub hbar: f64,
}

pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const HBAR: f64 = PLANCK / (2.0 * PI);

/// Planck constant in μeV/GHz, i.e. the photon energy of a 1 GHz tone.
pub const PLANCK_UEV_PER_GHZ: f64 = PLANCK / ELEMENTARY_CHARGE * 1e15;

pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
    e: ELEMENTARY_CHARGE,
    h: PLANCK,
    hbar: HBAR,
};

impl PhysicalConstants {
    /// h expressed in μeV/GHz.
    pub fn h_uev_per_ghz(&self) -> f64 {
        self.h / self.e * 1e15
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        CODATA_2018
    }
}

/// Energy in μeV to frequency in GHz (E = h f).
pub fn energy_to_frequency(energy_uev: f64) -> f64 {
    energy_uev / PLANCK_UEV_PER_GHZ
}

/// Frequency in GHz to energy in μeV.
pub fn frequency_to_energy(freq_ghz: f64) -> f64 {
    freq_ghz * PLANCK_UEV_PER_GHZ
}

pub const GHZ: f64 = 1e9;
pub const MHZ: f64 = 1e6;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hbar_is_h_over_two_pi() {
        let c = PhysicalConstants::default();
        assert_relative_eq!(c.hbar, c.h / (2.0 * PI), max_relative = 1e-15);
    }

    #[test]
    fn planck_in_uev_per_ghz() {
        assert_relative_eq!(PLANCK_UEV_PER_GHZ, 4.135667696, max_relative = 1e-9);
        assert_relative_eq!(
            CODATA_2018.h_uev_per_ghz(),
            PLANCK_UEV_PER_GHZ,
            max_relative = 1e-15
        );
    }

    #[test]
    fn conversion_examples() {
        assert_eq!(energy_to_frequency(0.0), 0.0);
        assert_relative_eq!(energy_to_frequency(4.135667696), 1.0, max_relative = 1e-9);
        // 11.55 / 4.135667696923859 = 2.79278
        assert_relative_eq!(energy_to_frequency(11.55), 2.793, max_relative = 2e-4);
        assert_relative_eq!(frequency_to_energy(1.0), 4.135667696, max_relative = 1e-9);
        // cavity photon at 6.8 GHz: 28.1225 μeV
        assert_relative_eq!(frequency_to_energy(6.8), 28.12, max_relative = 2e-4);
    }

    #[test]
    fn round_trip_examples() {
        for x in [0.1, 6.8, 100.0] {
            assert_relative_eq!(
                energy_to_frequency(frequency_to_energy(x)),
                x,
                max_relative = 1e-12
            );
        }
    }

    proptest::proptest! {
        #[test]
        fn round_trip_identity(x in -1e6f64..1e6) {
            let y = energy_to_frequency(frequency_to_energy(x));
            proptest::prop_assert!((y - x).abs() <= 1e-12 * x.abs());
        }
    }
}
