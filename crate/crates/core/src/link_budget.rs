//! Monostatic link budget: gain, transmissivity, received power and SNR.

use std::f64::consts::PI;

use crate::atmosphere::FormFactor;
use crate::error::{positive, Error, Result};
use crate::quantum_states::MeanPhotonNumber;
use crate::radiometry::{Bandwidth, Frequency, NoiseOccupancy, PhysicalConstants, Power};

/// Target and antenna geometry. Gain is always derived from the aperture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadarParams {
    sigma_m2: f64,
    aperture_m2: f64,
}

impl RadarParams {
    pub fn new(sigma_m2: f64, aperture_m2: f64) -> Result<Self> {
        Ok(Self {
            sigma_m2: positive("sigma_m2", sigma_m2)?,
            aperture_m2: positive("aperture_m2", aperture_m2)?,
        })
    }

    pub fn sigma_m2(&self) -> f64 {
        self.sigma_m2
    }

    pub fn aperture_m2(&self) -> f64 {
        self.aperture_m2
    }

    pub fn gain(&self, f: Frequency, consts: &PhysicalConstants) -> f64 {
        gain_with(self.aperture_m2, f, consts)
    }

    pub fn wavelength(&self, f: Frequency, consts: &PhysicalConstants) -> f64 {
        consts.wavelength(f)
    }
}

/// Detection requirement. `snr_min_db` is the configured threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionSpec {
    pub p_d: f64,
    pub p_fa: f64,
    pub snr_min_db: f64,
}

impl DetectionSpec {
    pub fn new(p_d: f64, p_fa: f64, snr_min_db: f64) -> Result<Self> {
        if !(p_fa > 0.0 && p_fa < p_d && p_d < 1.0) {
            return Err(Error::Config(format!(
                "need 0 < p_fa < p_d < 1, got p_fa = {p_fa}, p_d = {p_d}"
            )));
        }
        if !snr_min_db.is_finite() {
            return Err(Error::domain("snr_min_db", snr_min_db, "must be finite"));
        }
        Ok(Self {
            p_d,
            p_fa,
            snr_min_db,
        })
    }

    pub fn snr_min_linear(&self) -> f64 {
        db_to_linear(self.snr_min_db)
    }
}

/// Integration time and the derived mode count `M = round(τ B)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSpec {
    tau_s: f64,
    m: u64,
}

impl IntegrationSpec {
    pub fn new(tau_s: f64, b: Bandwidth) -> Result<Self> {
        let tau_s = positive("tau_s", tau_s)?;
        let m = (tau_s * b.hertz()).round();
        if m < 1.0 {
            return Err(Error::domain("tau_s * bandwidth_hz", tau_s * b.hertz(), "must round to >= 1 mode"));
        }
        Ok(Self { tau_s, m: m as u64 })
    }

    pub fn tau_s(&self) -> f64 {
        self.tau_s
    }

    pub fn modes(&self) -> u64 {
        self.m
    }
}

/// Link quantities at one `(R, N_s, f)` point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub eta: f64,
    pub form_factor: FormFactor,
    pub snr: f64,
    pub snr_eff: f64,
    pub p_r: Power,
}

impl LinkBudget {
    #[allow(clippy::too_many_arguments)]
    pub fn evaluate(
        radar: &RadarParams,
        f: Frequency,
        form_factor: FormFactor,
        range_m: f64,
        p_t: Power,
        n_s: MeanPhotonNumber,
        n_b: NoiseOccupancy,
        integration: &IntegrationSpec,
        consts: &PhysicalConstants,
    ) -> Result<Self> {
        let gain = radar.gain(f, consts);
        let eta = channel_transmissivity(radar.sigma_m2, gain, radar.aperture_m2, form_factor, range_m)?;
        let snr = snr(eta, n_s, n_b)?;
        Ok(Self {
            eta,
            form_factor,
            snr,
            snr_eff: integration.modes() as f64 * snr,
            p_r: received_power(p_t, eta)?,
        })
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn gain_with(aperture_m2: f64, f: Frequency, consts: &PhysicalConstants) -> f64 {
    let lambda = consts.wavelength(f);
    4.0 * PI * aperture_m2 / (lambda * lambda)
}

/// `G = 4π A / λ²` with `c = 3e8 m/s`.
pub fn antenna_gain(aperture_m2: f64, f: Frequency) -> Result<f64> {
    positive("aperture_m2", aperture_m2)?;
    Ok(gain_with(aperture_m2, f, &PhysicalConstants::ROUNDED))
}

/// `σ G A F² / ((4π)^k R⁴)` without the `η ≤ 1` check; `k` is 2 for the
/// link budget, 4 for the literal `(4π)⁴` range-equation denominator.
pub(crate) fn raw_transmissivity(
    sigma_m2: f64,
    gain: f64,
    aperture_m2: f64,
    f_squared: f64,
    range_m: f64,
    four_pi_power: i32,
) -> f64 {
    sigma_m2 * gain * aperture_m2 * f_squared / ((4.0 * PI).powi(four_pi_power) * range_m.powi(4))
}

/// `η = σ G A F² / ((4π)² R⁴)`. A result above 1 means the far-field model
/// is being misused and is reported as an error.
pub fn channel_transmissivity(
    sigma_m2: f64,
    gain: f64,
    aperture_m2: f64,
    form_factor: FormFactor,
    range_m: f64,
) -> Result<f64> {
    positive("sigma_m2", sigma_m2)?;
    positive("gain", gain)?;
    positive("aperture_m2", aperture_m2)?;
    positive("range_m", range_m)?;
    let f = form_factor.value();
    let eta = raw_transmissivity(sigma_m2, gain, aperture_m2, f * f, range_m, 2);
    if eta > 1.0 {
        return Err(Error::UnphysicalGeometry { eta });
    }
    Ok(eta)
}

fn check_eta(eta: f64) -> Result<f64> {
    if eta > 0.0 && eta <= 1.0 {
        Ok(eta)
    } else {
        Err(Error::domain("eta", eta, "must lie in (0, 1]"))
    }
}

pub fn received_power(p_t: Power, eta: f64) -> Result<Power> {
    let eta = check_eta(eta)?;
    Power::from_watts(p_t.watts() * eta)
}

/// `SNR = η N_s / N_B`.
pub fn snr(eta: f64, n_s: MeanPhotonNumber, n_b: NoiseOccupancy) -> Result<f64> {
    let eta = check_eta(eta)?;
    let nb = n_b.value();
    if nb <= 0.0 {
        return Err(Error::domain("n_b", nb, "must be > 0"));
    }
    Ok(eta * n_s.value() / nb)
}

/// `SNR_eff = M η N_s / N_B`.
pub fn snr_eff(eta: f64, m: u64, n_s: MeanPhotonNumber, n_b: NoiseOccupancy) -> Result<f64> {
    if m == 0 {
        return Err(Error::domain("m", 0.0, "must be >= 1"));
    }
    Ok(m as f64 * snr(eta, n_s, n_b)?)
}

/// Albersheim's closed-form single-look-equivalent SNR (dB) for a
/// non-fluctuating target with `m` noncoherently integrated pulses.
pub fn albersheim_snr_min(p_d: f64, p_fa: f64, m: u32) -> Result<f64> {
    if !(0.1..=0.9).contains(&p_d) {
        return Err(Error::ValidityBox(format!("p_d = {p_d} not in [0.1, 0.9]")));
    }
    if !(1e-7..=1e-3).contains(&p_fa) {
        return Err(Error::ValidityBox(format!("p_fa = {p_fa:e} not in [1e-7, 1e-3]")));
    }
    if !(1..=8096).contains(&m) {
        return Err(Error::ValidityBox(format!("m = {m} not in [1, 8096]")));
    }
    let a = (0.62 / p_fa).ln();
    let b = (p_d / (1.0 - p_d)).ln();
    let m = f64::from(m);
    Ok(-5.0 * m.log10() + (6.2 + 4.54 / (m + 0.44).sqrt()) * (a + 0.12 * a * b + 1.7 * b).log10())
}
