//! Photon, power and noise-temperature bookkeeping.
//!
//! Constants default to three significant figures (`h = 6.63e-34`,
//! `k_B = 1.38e-23`, `c = 3e8`) so that the reference dBm figures reproduce;
//! [`PhysicalConstants::CODATA`] is available for comparison runs. Background
//! occupancy uses the Rayleigh–Jeans form `N_B = k_B T / (h f)`.

use serde::{Deserialize, Serialize};

use crate::error::{non_negative, positive, Error, Result};
use crate::quantum_states::MeanPhotonNumber;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Planck constant, J·s.
    pub planck: f64,
    /// Boltzmann constant, J/K.
    pub boltzmann: f64,
    /// Speed of light, m/s.
    pub speed_of_light: f64,
}

impl PhysicalConstants {
    pub const ROUNDED: Self = Self {
        planck: 6.63e-34,
        boltzmann: 1.38e-23,
        speed_of_light: 3e8,
    };

    pub const CODATA: Self = Self {
        planck: 6.626_070_15e-34,
        boltzmann: 1.380_649e-23,
        speed_of_light: 299_792_458.0,
    };

    /// `P_t = N_s h f B`.
    pub fn transmit_power(&self, n_s: MeanPhotonNumber, f: Frequency, b: Bandwidth) -> Result<Power> {
        let n = n_s.positive()?;
        Power::from_watts(n * self.planck * f.hertz() * b.hertz())
    }

    /// Inverse of [`Self::transmit_power`].
    pub fn photons_per_mode(&self, p: Power, f: Frequency, b: Bandwidth) -> Result<MeanPhotonNumber> {
        let w = positive("power_w", p.watts())?;
        MeanPhotonNumber::new(w / (self.planck * f.hertz() * b.hertz()))
    }

    /// `N_B = k_B T / (h f)`.
    pub fn thermal_occupancy(&self, t: Temperature, f: Frequency) -> NoiseOccupancy {
        NoiseOccupancy(self.boltzmann * t.kelvin() / (self.planck * f.hertz()))
    }

    /// `P_B = k_B T B`.
    pub fn noise_power(&self, t: Temperature, b: Bandwidth) -> Power {
        Power(self.boltzmann * t.kelvin() * b.hertz())
    }

    /// `T_eff = P_B / (k_B B)`.
    pub fn t_eff_from_noise_power(&self, p_b: Power, b: Bandwidth) -> Result<Temperature> {
        let w = positive("noise_power_w", p_b.watts())?;
        Temperature::new(w / (self.boltzmann * b.hertz()))
    }

    /// Free-space wavelength `c / f`, metres.
    pub fn wavelength(&self, f: Frequency) -> f64 {
        self.speed_of_light / f.hertz()
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::ROUNDED
    }
}

macro_rules! positive_quantity {
    ($(#[$meta:meta])* $name:ident, $accessor:ident, $label:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
        pub struct $name(f64);

        impl $name {
            pub fn new(value: f64) -> Result<Self> {
                positive($label, value).map(Self)
            }

            pub fn $accessor(self) -> f64 {
                self.0
            }
        }
    };
}

positive_quantity!(
    /// Carrier frequency in hertz.
    Frequency, hertz, "frequency_hz"
);
positive_quantity!(
    /// Receiver bandwidth in hertz.
    Bandwidth, hertz, "bandwidth_hz"
);
positive_quantity!(Temperature, kelvin, "temperature_k");

impl Frequency {
    pub fn ghz(self) -> f64 {
        self.0 / 1e9
    }
}

/// Power in watts, non-negative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Power(f64);

impl Power {
    pub fn from_watts(watts: f64) -> Result<Self> {
        non_negative("power_w", watts).map(Self)
    }

    pub fn from_dbm(dbm: f64) -> Result<Self> {
        if !dbm.is_finite() {
            return Err(Error::domain("power_dbm", dbm, "must be finite"));
        }
        Ok(Self(1e-3 * 10f64.powf(dbm / 10.0)))
    }

    pub fn watts(self) -> f64 {
        self.0
    }

    /// `10 log10(P / 1 mW)`; only defined for strictly positive power.
    pub fn dbm(self) -> Result<f64> {
        let w = positive("power_w", self.0)?;
        Ok(10.0 * (w / 1e-3).log10())
    }
}

/// Thermal photons per mode.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct NoiseOccupancy(f64);

impl NoiseOccupancy {
    pub fn new(value: f64) -> Result<Self> {
        non_negative("n_b", value).map(Self)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn transmit_power(n_s: MeanPhotonNumber, f: Frequency, b: Bandwidth) -> Result<Power> {
    PhysicalConstants::ROUNDED.transmit_power(n_s, f, b)
}

pub fn photons_per_mode(p: Power, f: Frequency, b: Bandwidth) -> Result<MeanPhotonNumber> {
    PhysicalConstants::ROUNDED.photons_per_mode(p, f, b)
}

pub fn thermal_occupancy(t: Temperature, f: Frequency) -> NoiseOccupancy {
    PhysicalConstants::ROUNDED.thermal_occupancy(t, f)
}

pub fn noise_power(t: Temperature, b: Bandwidth) -> Power {
    PhysicalConstants::ROUNDED.noise_power(t, b)
}

pub fn t_eff_from_noise_power(p_b: Power, b: Bandwidth) -> Result<Temperature> {
    PhysicalConstants::ROUNDED.t_eff_from_noise_power(p_b, b)
}
