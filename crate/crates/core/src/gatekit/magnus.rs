use std::f64::consts::PI;

use ndarray::Array3;
use num_complex::Complex64;

use super::table::{TrajectorySource, TrajectoryTable};
use super::{GateError, GateSpec, ModeSpec, MIN_GRID_POINTS};
use crate::numeric::cumulative_trapezoid;

const MIN_SAMPLES_PER_PERIOD: f64 = 20.0;

/// First and second Magnus terms for an arbitrary multi-tone drive.
///
/// `alpha_j^n(t) = eta_jn * int_0^t f_n(s) e^{i nu_j s} ds` by cumulative
/// trapezoid, and the pair phase accumulates
/// `Im(alpha_n' conj(alpha_m) + alpha_m' conj(alpha_n))` over both orderings,
/// summed over modes.
pub fn magnus_trajectories(
    gate: &GateSpec,
    modes: &ModeSpec,
    grid_points: usize,
) -> Result<TrajectoryTable, GateError> {
    let n = gate.ion_count();
    if modes.ion_count() != n {
        return Err(GateError::IonCountMismatch { gate: n, modes: modes.ion_count() });
    }
    if grid_points < MIN_GRID_POINTS {
        return Err(GateError::GridTooSmall { min: MIN_GRID_POINTS, got: grid_points });
    }
    let tau = gate.duration();
    let dt = tau / (grid_points - 1) as f64;
    let max_tone = gate.tones().iter().map(|t| t.frequency.abs()).fold(0.0, f64::max);
    let max_mode = modes.frequencies().iter().copied().fold(0.0, f64::max);
    let fastest = max_tone + max_mode;
    if !gate.tones().is_empty() && fastest > 0.0 {
        let samples = 2.0 * PI / (fastest * dt);
        if samples < MIN_SAMPLES_PER_PERIOD {
            return Err(GateError::UnderResolved { samples });
        }
    }

    let times: Vec<f64> =
        (0..grid_points).map(|i| if i + 1 == grid_points { tau } else { dt * i as f64 }).collect();
    let m = modes.mode_count();
    let eta = modes.lamb_dicke();
    let drives: Vec<Vec<f64>> =
        (0..n).map(|ion| times.iter().map(|&t| gate.drive(ion, t)).collect()).collect();

    let mut alpha = Array3::<Complex64>::zeros((grid_points, m, n));
    let mut phi = Array3::<f64>::zeros((grid_points, n, n));
    let mut tolerance = 0.0f64;
    for (j, &nu) in modes.frequencies().iter().enumerate() {
        let phases: Vec<Complex64> = times.iter().map(|&t| Complex64::from_polar(1.0, nu * t)).collect();
        // Velocity g = d alpha / dt per ion.
        let velocity: Vec<Vec<Complex64>> = (0..n)
            .map(|ion| {
                drives[ion].iter().zip(&phases).map(|(f, e)| e * (eta[[j, ion]] * f)).collect()
            })
            .collect();
        let fine: Vec<Vec<Complex64>> = velocity.iter().map(|g| cumulative_trapezoid(g, dt)).collect();
        let coarse: Vec<Vec<Complex64>> = velocity
            .iter()
            .map(|g| {
                let sub: Vec<Complex64> = g.iter().step_by(2).copied().collect();
                cumulative_trapezoid(&sub, 2.0 * dt)
            })
            .collect();
        for ion in 0..n {
            for (s, a) in fine[ion].iter().enumerate() {
                alpha[[s, j, ion]] = *a;
            }
            for (i, c) in coarse[ion].iter().enumerate() {
                tolerance = tolerance.max((fine[ion][2 * i] - c).norm() / 3.0);
            }
        }
        for a in 0..n {
            for b in 0..a {
                let integrand: Vec<f64> = (0..grid_points)
                    .map(|s| {
                        (velocity[a][s] * fine[b][s].conj() + velocity[b][s] * fine[a][s].conj()).im
                    })
                    .collect();
                let acc = cumulative_trapezoid(&integrand, dt);
                let sub: Vec<f64> = (0..grid_points)
                    .step_by(2)
                    .map(|s| {
                        let c = s / 2;
                        (velocity[a][s] * coarse[b][c].conj() + velocity[b][s] * coarse[a][c].conj()).im
                    })
                    .collect();
                let acc_coarse = cumulative_trapezoid(&sub, 2.0 * dt);
                for (i, c) in acc_coarse.iter().enumerate() {
                    tolerance = tolerance.max((acc[2 * i] - c).abs() / 3.0);
                }
                for (s, p) in acc.iter().enumerate() {
                    phi[[s, a, b]] += p;
                    phi[[s, b, a]] += p;
                }
            }
        }
    }
    TrajectoryTable::from_parts(
        TrajectorySource::Magnus,
        times,
        alpha,
        phi,
        gate.targets().clone(),
        tolerance,
    )
}
