//! The JSON configuration document.

use crate::error::Result;
use crate::impedance::{ModelOptions, SsrdcConfig};
use crate::params::{GridParams, OperatingPoint, PlantParams};
use crate::sim::Scenario;
use crate::system::System;
use serde::{Deserialize, Serialize};

/// Every section and field is optional; missing values take their defaults
/// and unknown keys are rejected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub plant: PlantParams,
    pub grid: GridParams,
    pub operating_point: OperatingPoint,
    pub ssrdc: SsrdcConfig,
    /// Impedance-model switches.
    pub model: ModelOptions,
    pub scenario: Scenario,
}

impl Config {
    pub fn system(&self) -> System {
        System {
            plant: self.plant.clone(),
            op: self.operating_point.clone(),
            grid: self.grid.clone(),
            ssrdc: self.ssrdc.clone(),
            model: self.model.clone(),
            units: None,
        }
    }

    /// The configured scenario, bound to [`Config::system`].
    pub fn scenario(&self) -> Scenario {
        Scenario { system: self.system(), ..self.scenario.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario().validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        let c: Config = serde_json::from_str("{}").unwrap();
        assert_eq!(c, Config::default());
        assert_eq!(c.system(), System::default());
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(serde_json::from_str::<Config>(r#"{"plant": {"kpp": 1}}"#).is_err());
        assert!(serde_json::from_str::<Config>(r#"{"extra": {}}"#).is_err());
    }

    #[test]
    fn round_trip() {
        let mut c = Config::default();
        c.operating_point.n = 8;
        c.scenario.t_end = 1.5;
        let back: Config = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
