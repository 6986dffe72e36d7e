use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use ndarray::{Array2, Array3};
use num_complex::Complex64;

use super::table::{TrajectorySource, TrajectoryTable};
use super::{check_duration, uniform_targets, GateError, MIN_GRID_POINTS};
use crate::numeric::cumulative_trapezoid;

fn check_inputs(n: usize, tau: f64, grid_points: usize) -> Result<(), GateError> {
    if n < 2 {
        return Err(GateError::TooFewIons(n));
    }
    check_duration(tau)?;
    if grid_points < MIN_GRID_POINTS {
        return Err(GateError::GridTooSmall { min: MIN_GRID_POINTS, got: grid_points });
    }
    Ok(())
}

fn grid(tau: f64, k: usize) -> Vec<f64> {
    let dt = tau / (k - 1) as f64;
    (0..k).map(|i| if i + 1 == k { tau } else { dt * i as f64 }).collect()
}

/// Single-tone MS gate on the centre-of-mass mode:
/// `alpha(t) = (1 - e^{i xi t}) / 4`, `phi(t) = (xi t - sin xi t) / 8`.
pub fn ms_trajectory(n: usize, tau: f64, grid_points: usize) -> Result<TrajectoryTable, GateError> {
    check_inputs(n, tau, grid_points)?;
    let xi = 2.0 * PI / tau;
    let times = grid(tau, grid_points);
    let mut alpha = Array3::zeros((grid_points, 1, n));
    let mut phi = Array3::zeros((grid_points, n, n));
    for (s, &t) in times.iter().enumerate() {
        let a = (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, xi * t)) / 4.0;
        let p = (xi * t - (xi * t).sin()) / 8.0;
        for i in 0..n {
            alpha[[s, 0, i]] = a;
            for j in 0..n {
                if i != j {
                    phi[[s, i, j]] = p;
                }
            }
        }
    }
    TrajectoryTable::from_parts(
        TrajectorySource::Ms,
        times,
        alpha,
        phi,
        uniform_targets(n, FRAC_PI_4),
        0.0,
    )
}

/// Two-harmonic waveform with zero mean displacement,
/// `alpha(t) = (e^{2 i xi t} - e^{i xi t}) / sqrt(24)`.
///
/// The pair phase is integrated numerically from the displacement and its
/// derivative; it reaches pi/2 at the gate time.
pub fn robust_trajectory(
    n: usize,
    tau: f64,
    grid_points: usize,
) -> Result<TrajectoryTable, GateError> {
    check_inputs(n, tau, grid_points)?;
    let xi = 2.0 * PI / tau;
    let norm = 24f64.sqrt();
    let times = grid(tau, grid_points);
    let dt = times[1];
    let a: Vec<Complex64> = times
        .iter()
        .map(|&t| (Complex64::from_polar(1.0, 2.0 * xi * t) - Complex64::from_polar(1.0, xi * t)) / norm)
        .collect();
    let da: Vec<Complex64> = times
        .iter()
        .map(|&t| {
            Complex64::i() * xi
                * (Complex64::from_polar(2.0, 2.0 * xi * t) - Complex64::from_polar(1.0, xi * t))
                / norm
        })
        .collect();
    // Both ordered pairs contribute the same term for identical trajectories.
    let integrand: Vec<f64> = da.iter().zip(&a).map(|(d, x)| 2.0 * (d * x.conj()).im).collect();
    let fine = cumulative_trapezoid(&integrand, dt);
    let coarse_samples: Vec<f64> = integrand.iter().step_by(2).copied().collect();
    let coarse = cumulative_trapezoid(&coarse_samples, 2.0 * dt);
    let tolerance = coarse
        .iter()
        .enumerate()
        .map(|(i, c)| (fine[2 * i] - c).abs() / 3.0)
        .fold(0.0, f64::max);

    let mut alpha = Array3::zeros((grid_points, 1, n));
    let mut phi = Array3::zeros((grid_points, n, n));
    for s in 0..grid_points {
        for i in 0..n {
            alpha[[s, 0, i]] = a[s];
            for j in 0..n {
                if i != j {
                    phi[[s, i, j]] = fine[s];
                }
            }
        }
    }
    let targets: Array2<f64> = uniform_targets(n, FRAC_PI_2);
    TrajectoryTable::from_parts(TrajectorySource::Robust, times, alpha, phi, targets, tolerance)
}
