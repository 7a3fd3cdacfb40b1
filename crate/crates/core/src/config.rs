// SPDX-License-Identifier: Apache-2.0

//! One JSON file with `device`, `energy` and `area` sections. Missing
//! sections fall back to their defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cost::{AreaParams, EnergyParams};
use crate::device::DeviceParams;
use crate::error::{AcamError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub device: DeviceParams,
    pub energy: EnergyParams,
    pub area: AreaParams,
}

impl Config {
    pub fn from_json(s: &str) -> Result<Self> {
        let c: Config = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AcamError::domain(format!("cannot read {}: {e}", path.display())))?;
        Config::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.device.validate()?;
        self.energy.validate()?;
        self.area.validate()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(AcamError::from)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_defaults() {
        assert_eq!(Config::from_json("{}").unwrap(), Config::default());
    }

    #[test]
    fn round_trip() {
        let c = Config::default();
        let back = Config::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!((back.energy, back.area), (c.energy, c.area));
        // unit-suffixed device fields round-trip up to the scaling rounding
        let rel = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
        assert!(rel(back.device.beta, c.device.beta) && rel(back.device.v_th, c.device.v_th));
        assert!(rel(back.device.g_off, c.device.g_off) && rel(back.device.swing, c.device.swing));
    }

    #[test]
    fn errors_carry_lines() {
        let err = Config::from_json("{\n  \"device\": 3\n}").unwrap_err();
        assert!(matches!(err, AcamError::Parse { line: Some(2), .. }), "{err:?}");
        assert!(Config::from_json("{\"bogus\": 1}").is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        let mut c = Config::default();
        c.area.area_acam_cell = 0.0;
        assert!(Config::from_json(&c.to_json().unwrap()).is_err());
    }
}
