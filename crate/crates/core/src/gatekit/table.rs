use ndarray::{Array2, Array3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::GateError;

/// Where a trajectory table came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrajectorySource {
    Ms,
    Robust,
    Magnus,
    /// Read back from a trajectory CSV pair.
    Loaded,
}

impl std::fmt::Display for TrajectorySource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Ms => "ms",
            Self::Robust => "robust",
            Self::Magnus => "magnus",
            Self::Loaded => "loaded",
        })
    }
}

/// Sampled displacements `alpha[time, mode, ion]` and pair phases
/// `phi[time, n, m]` on a uniform grid starting at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    source: TrajectorySource,
    times: Vec<f64>,
    alpha: Array3<Complex64>,
    phi: Array3<f64>,
    targets: Array2<f64>,
    quadrature_tolerance: f64,
}

impl TrajectoryTable {
    /// Assemble a table, checking grid uniformity, zero initial values and
    /// phase symmetry.
    pub fn from_parts(
        source: TrajectorySource,
        times: Vec<f64>,
        alpha: Array3<Complex64>,
        phi: Array3<f64>,
        targets: Array2<f64>,
        quadrature_tolerance: f64,
    ) -> Result<Self, GateError> {
        let k = times.len();
        if k < 2 {
            return Err(GateError::BadTable("fewer than two time samples".into()));
        }
        let (ka, _, n) = alpha.dim();
        let (kp, n1, n2) = phi.dim();
        if ka != k || kp != k || n1 != n || n2 != n || targets.dim() != (n, n) {
            return Err(GateError::BadTable("array shapes disagree".into()));
        }
        if times[0] != 0.0 {
            return Err(GateError::BadTable("grid must start at t = 0".into()));
        }
        let dt = times[1] - times[0];
        if !(dt > 0.0) {
            return Err(GateError::BadTable("grid must be increasing".into()));
        }
        for (i, t) in times.iter().enumerate() {
            if (t - dt * i as f64).abs() > 1e-9 * dt * k as f64 {
                return Err(GateError::BadTable("grid is not uniform".into()));
            }
        }
        if alpha.index_axis(ndarray::Axis(0), 0).iter().any(|a| a.norm() > 1e-12)
            || phi.index_axis(ndarray::Axis(0), 0).iter().any(|p| p.abs() > 1e-12)
        {
            return Err(GateError::BadTable("trajectories must vanish at t = 0".into()));
        }
        for s in 0..k {
            for a in 0..n {
                if phi[[s, a, a]] != 0.0 {
                    return Err(GateError::BadTable("phase diagonal must be zero".into()));
                }
                for b in 0..a {
                    if (phi[[s, a, b]] - phi[[s, b, a]]).abs() > 1e-12 {
                        return Err(GateError::BadTable("phase matrix not symmetric".into()));
                    }
                }
            }
        }
        Ok(Self { source, times, alpha, phi, targets, quadrature_tolerance })
    }

    pub fn source(&self) -> TrajectorySource {
        self.source
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    /// Time of the last sample.
    pub fn duration(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn ion_count(&self) -> usize {
        self.alpha.dim().2
    }

    pub fn mode_count(&self) -> usize {
        self.alpha.dim().1
    }

    /// `alpha[time, mode, ion]`.
    pub fn alpha(&self) -> &Array3<Complex64> {
        &self.alpha
    }

    /// `phi[time, n, m]`.
    pub fn phi(&self) -> &Array3<f64> {
        &self.phi
    }

    pub fn targets(&self) -> &Array2<f64> {
        &self.targets
    }

    /// Richardson estimate of the cumulative-quadrature error (zero for
    /// closed-form samples).
    pub fn quadrature_tolerance(&self) -> f64 {
        self.quadrature_tolerance
    }

    /// Index of the grid node at time `t`, if `t` lies on the grid (within
    /// a small fraction of a step).
    pub fn node_at(&self, t: f64) -> Option<usize> {
        let x = t / self.dt();
        let k = x.round();
        if (x - k).abs() < 1e-6 && k >= 0.0 && (k as usize) < self.len() {
            Some(k as usize)
        } else {
            None
        }
    }

    /// Table restricted to the first `last + 1` samples, as if the gate were
    /// stopped early.
    pub fn prefix(&self, last: usize) -> Self {
        let end = (last + 1).min(self.len()).max(2);
        Self {
            source: self.source,
            times: self.times[..end].to_vec(),
            alpha: self.alpha.slice(ndarray::s![..end, .., ..]).to_owned(),
            phi: self.phi.slice(ndarray::s![..end, .., ..]).to_owned(),
            targets: self.targets.clone(),
            quadrature_tolerance: self.quadrature_tolerance,
        }
    }

    /// Largest |phi_nk(t)| over the grid for each ion n.
    pub fn max_abs_phase_with(&self, k: usize) -> Vec<f64> {
        let n = self.ion_count();
        (0..n)
            .map(|m| {
                (0..self.len()).map(|s| self.phi[[s, m, k]].abs()).fold(0.0, f64::max)
            })
            .collect()
    }
}

/// Residual displacement and phase error at the final sample:
/// `(max |alpha(tau)|, max |phi(tau) - target|)`.
pub fn closure_residual(traj: &TrajectoryTable) -> (f64, f64) {
    let last = traj.len() - 1;
    let alpha = traj
        .alpha
        .index_axis(ndarray::Axis(0), last)
        .iter()
        .map(|a| a.norm())
        .fold(0.0, f64::max);
    let phi_final = traj.phi.index_axis(ndarray::Axis(0), last);
    let phi = phi_final
        .iter()
        .zip(traj.targets.iter())
        .map(|(p, t)| (p - t).abs())
        .fold(0.0, f64::max);
    (alpha, phi)
}
