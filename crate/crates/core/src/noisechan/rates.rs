use std::path::Path;

use serde::{Deserialize, Serialize};

use super::NoiseError;

/// Physical noise rates. Per-mode vectors share one length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateSet {
    /// Spin scattering rate, 1/s.
    #[serde(rename = "gamma_s_hz", default)]
    pub gamma_s: f64,
    /// Heating rate per mode, 1/s.
    #[serde(rename = "gamma_h_hz", default)]
    pub gamma_h: Vec<f64>,
    /// Steady-state occupation of the heating bath per mode.
    #[serde(default)]
    pub nbar_th: Vec<f64>,
    /// Motional dephasing rate per mode, 1/s.
    #[serde(rename = "gamma_d_hz", default)]
    pub gamma_d: Vec<f64>,
    /// Initial thermal occupation per mode.
    #[serde(default)]
    pub nbar: Vec<f64>,
}

impl RateSet {
    /// All rates zero, ground-state modes.
    pub fn zero(modes: usize) -> Self {
        Self {
            gamma_s: 0.0,
            gamma_h: vec![0.0; modes],
            nbar_th: vec![0.0; modes],
            gamma_d: vec![0.0; modes],
            nbar: vec![0.0; modes],
        }
    }

    /// Same heating, dephasing and occupations on every mode.
    pub fn uniform(modes: usize, gamma_s: f64, gamma_h: f64, nbar_th: f64, gamma_d: f64, nbar: f64) -> Self {
        Self {
            gamma_s,
            gamma_h: vec![gamma_h; modes],
            nbar_th: vec![nbar_th; modes],
            gamma_d: vec![gamma_d; modes],
            nbar: vec![nbar; modes],
        }
    }

    pub fn mode_count(&self) -> usize {
        self.gamma_h.len()
    }

    /// Check signs and that every per-mode vector has `modes` entries.
    pub fn validate(&self, modes: usize) -> Result<(), NoiseError> {
        let vectors = [
            ("gamma_h_hz", &self.gamma_h),
            ("nbar_th", &self.nbar_th),
            ("gamma_d_hz", &self.gamma_d),
            ("nbar", &self.nbar),
        ];
        for (name, v) in vectors {
            if v.len() != modes {
                return Err(NoiseError::RateShape { key: name, expected: modes, got: v.len() });
            }
            if v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(NoiseError::NegativeRate(name));
            }
        }
        if !(self.gamma_s.is_finite() && self.gamma_s >= 0.0) {
            return Err(NoiseError::NegativeRate("gamma_s_hz"));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, NoiseError> {
        toml::from_str(text).map_err(|e| NoiseError::RatesFile(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, NoiseError> {
        let text = std::fs::read_to_string(path).map_err(|e| NoiseError::RatesFile(e.to_string()))?;
        Self::from_toml_str(&text)
    }
}
