//! TOML gate description.
//!
//! ```toml
//! [modes]
//! frequencies_hz = [2.9e6, 3.0e6]
//! eta = [0.07, 0.07, 0.07, -0.07]   # row-major, modes x ions
//!
//! [gate]
//! n = 2
//! tau_us = 200.0
//! targets = [[0, 1, 0.785398]]
//!
//! [tones]
//! rows = [[0, 25000.0, 2.995e6, 1.5708], [1, 25000.0, 2.995e6, 1.5708]]
//! ```
//!
//! Frequencies and amplitudes are given in Hz and converted to rad/s.

use std::f64::consts::TAU;
use std::path::Path;

use ndarray::Array2;
use serde::Deserialize;

use super::{GateError, GateSpec, ModeSpec, Tone};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    modes: ModesSection,
    gate: GateSection,
    tones: TonesSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModesSection {
    frequencies_hz: Vec<f64>,
    eta: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateSection {
    n: usize,
    tau_us: f64,
    #[serde(default)]
    targets: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TonesSection {
    #[serde(default)]
    rows: Vec<(usize, f64, f64, f64)>,
}

/// A parsed gate file.
#[derive(Debug, Clone)]
pub struct GateFile {
    pub gate: GateSpec,
    pub modes: ModeSpec,
}

pub fn parse_gate_file(text: &str) -> Result<GateFile, GateError> {
    let doc: Document = toml::from_str(text).map_err(|e| GateError::GateFile(e.to_string()))?;
    let n = doc.gate.n;
    let m = doc.modes.frequencies_hz.len();
    if doc.modes.eta.len() != m * n {
        return Err(GateError::LambDickeShape {
            rows: if n == 0 { 0 } else { doc.modes.eta.len() / n.max(1) },
            cols: n,
            modes: m,
            ions: n,
        });
    }
    let eta = Array2::from_shape_vec((m, n), doc.modes.eta)
        .map_err(|e| GateError::GateFile(e.to_string()))?;
    let modes = ModeSpec::new(doc.modes.frequencies_hz.iter().map(|f| f * TAU).collect(), eta)?;

    let mut targets = Array2::zeros((n, n));
    for (i, j, phi) in doc.gate.targets {
        if i >= n || j >= n || i == j {
            return Err(GateError::BadTargets);
        }
        targets[[i, j]] = phi;
        targets[[j, i]] = phi;
    }
    let tones = doc
        .tones
        .rows
        .into_iter()
        .map(|(ion, amp, freq, phase)| Tone {
            ion,
            amplitude: amp * TAU,
            frequency: freq * TAU,
            phase,
        })
        .collect();
    let gate = GateSpec::new(n, doc.gate.tau_us * 1e-6, tones, targets)?;
    Ok(GateFile { gate, modes })
}

pub fn load_gate_file(path: &Path) -> Result<GateFile, GateError> {
    let text = std::fs::read_to_string(path)?;
    parse_gate_file(&text)
}
