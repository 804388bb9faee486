use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::atmosphere::{load_table, AttenuationTable};
use crate::error::{Error, Result};
use crate::link_budget::{DetectionSpec, IntegrationSpec, RadarParams};
use crate::radiometry::{Bandwidth, Frequency, PhysicalConstants, Power};
use crate::range_solver::{FourPiConvention, Scenario};

/// Value of `attenuation_table_path` that selects the table shipped with the crate.
pub const BUNDLED_TABLE: &str = "bundled";

/// Flat JSON scenario. Omitted fields take the reference system parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub sigma_m2: f64,
    pub aperture_m2: f64,
    pub bandwidth_hz: f64,
    pub tau_s: f64,
    pub noise_power_dbm: f64,
    pub snr_min_db: f64,
    pub p_d: f64,
    pub p_fa: f64,
    pub frequencies_hz: Vec<f64>,
    /// CSV path (relative paths resolve against the config file), or `"bundled"`.
    pub attenuation_table_path: Option<String>,
    pub four_pi_exponent: u8,
    pub codata_constants: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            sigma_m2: 1.0,
            aperture_m2: 0.5,
            bandwidth_hz: 1e9,
            tau_s: 1.0,
            noise_power_dbm: -63.82,
            snr_min_db: 10.0,
            p_d: 0.7,
            p_fa: 1e-6,
            frequencies_hz: vec![7e9, 95e9, 1e12],
            attenuation_table_path: None,
            four_pi_exponent: 2,
            codata_constants: false,
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Reads a config file; a relative table path is rebased onto the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        if let Some(table) = &cfg.attenuation_table_path {
            let table_path = PathBuf::from(table);
            if table != BUNDLED_TABLE && table_path.is_relative() {
                if let Some(dir) = path.parent() {
                    cfg.attenuation_table_path = Some(dir.join(table_path).to_string_lossy().into_owned());
                }
            }
        }
        Ok(cfg)
    }

    pub fn constants(&self) -> PhysicalConstants {
        if self.codata_constants {
            PhysicalConstants::CODATA
        } else {
            PhysicalConstants::ROUNDED
        }
    }

    pub fn frequencies(&self) -> Result<Vec<Frequency>> {
        if self.frequencies_hz.is_empty() {
            return Err(Error::Config("frequencies_hz is empty".into()));
        }
        self.frequencies_hz.iter().map(|&f| Frequency::new(f)).collect()
    }

    pub fn attenuation_table(&self) -> Result<Option<AttenuationTable>> {
        match self.attenuation_table_path.as_deref() {
            None => Ok(None),
            Some(BUNDLED_TABLE) => Ok(Some(AttenuationTable::bundled())),
            Some(path) => {
                let file = std::fs::File::open(path)
                    .map_err(|e| Error::Config(format!("cannot open attenuation table {path}: {e}")))?;
                load_table(file, path).map(Some)
            }
        }
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let bandwidth = Bandwidth::new(self.bandwidth_hz)?;
        Ok(Scenario {
            radar: RadarParams::new(self.sigma_m2, self.aperture_m2)?,
            detection: DetectionSpec::new(self.p_d, self.p_fa, self.snr_min_db)?,
            bandwidth,
            integration: IntegrationSpec::new(self.tau_s, bandwidth)?,
            noise_power: Power::from_dbm(self.noise_power_dbm)?,
            convention: FourPiConvention::from_exponent(self.four_pi_exponent)?,
            constants: self.constants(),
            attenuation: self.attenuation_table()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_reference_system() {
        let c = ScenarioConfig::default();
        assert_eq!(c.sigma_m2, 1.0);
        assert_eq!(c.aperture_m2, 0.5);
        assert_eq!(c.bandwidth_hz, 1e9);
        assert_eq!(c.tau_s, 1.0);
        assert_eq!(c.noise_power_dbm, -63.82);
        assert_eq!(c.snr_min_db, 10.0);
        assert_eq!(c.p_d, 0.7);
        assert_eq!(c.p_fa, 1e-6);
        assert_eq!(c.frequencies_hz, vec![7e9, 95e9, 1e12]);
        assert_eq!(c.four_pi_exponent, 2);
        assert!(c.attenuation_table_path.is_none());
        assert_eq!(c.scenario().unwrap().integration.modes(), 1_000_000_000);
    }

    #[test]
    fn partial_json_fills_defaults() {
        let c = ScenarioConfig::from_json(r#"{"snr_min_db": 13.0, "four_pi_exponent": 4}"#).unwrap();
        assert_eq!(c.snr_min_db, 13.0);
        assert_eq!(c.four_pi_exponent, 4);
        assert_eq!(c.aperture_m2, 0.5);
        assert_eq!(c.scenario().unwrap().convention, FourPiConvention::PaperLiteral);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(ScenarioConfig::from_json(r#"{"sigma": 1.0}"#).is_err());
        assert!(ScenarioConfig::from_json("not json").is_err());
        let c = ScenarioConfig::from_json(r#"{"four_pi_exponent": 3}"#).unwrap();
        assert!(c.scenario().is_err());
        let c = ScenarioConfig::from_json(r#"{"p_d": 1e-7}"#).unwrap();
        assert!(c.scenario().is_err());
        let c = ScenarioConfig::from_json(r#"{"attenuation_table_path": "/nonexistent.csv"}"#).unwrap();
        assert!(matches!(c.scenario(), Err(Error::Config(_))));
    }

    #[test]
    fn json_round_trip() {
        let c = ScenarioConfig {
            attenuation_table_path: Some(BUNDLED_TABLE.into()),
            frequencies_hz: vec![1.5e10],
            ..ScenarioConfig::default()
        };
        assert_eq!(ScenarioConfig::from_json(&c.to_json()).unwrap(), c);
    }
}
