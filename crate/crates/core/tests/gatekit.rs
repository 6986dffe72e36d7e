use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};

use approx::assert_relative_eq;
use ionqec::gatekit::{
    closure_residual, magnus_trajectories, ms_trajectory, parse_gate_file, robust_trajectory, uniform_targets,
    GateError, GateSpec, ModeSpec, Tone,
};
use ionqec::numeric::trapezoid;
use ndarray::Array2;
use num_complex::Complex64;
use proptest::prelude::*;

const TAU: f64 = 450e-6;

fn block_gate() -> ionqec::gatekit::GateFile {
    parse_gate_file(include_str!("fixtures/block_gate.toml")).unwrap()
}

/// One COM mode, every ion driven by the same single tone detuned by
/// `xi = 2 pi / tau` below the mode, amplitude chosen so the slow part of
/// the displacement is `(1 - e^{i xi t}) / 4`.
fn single_tone_ms(n: usize, tau: f64, mode_over_xi: f64) -> (GateSpec, ModeSpec) {
    let xi = 2.0 * PI / tau;
    let nu = mode_over_xi * xi;
    let eta = 0.1;
    let tones = (0..n)
        .map(|ion| Tone { ion, amplitude: xi / (2.0 * eta), frequency: nu - xi, phase: FRAC_PI_2 })
        .collect();
    let gate = GateSpec::new(n, tau, tones, uniform_targets(n, FRAC_PI_4)).unwrap();
    let modes = ModeSpec::new(vec![nu], Array2::from_elem((1, n), eta)).unwrap();
    (gate, modes)
}

/// Exact integral of `eta Omega cos(mu t + pi/2) e^{i nu t}` from 0 to t.
fn single_tone_alpha(t: f64, eta_omega: f64, mu: f64, nu: f64) -> Complex64 {
    let i = Complex64::i();
    let sum = nu + mu;
    let diff = nu - mu;
    eta_omega / 2.0
        * (((i * sum * t).exp() - 1.0) / sum + (1.0 - (i * diff * t).exp()) / diff)
}

#[test]
fn ms_phase_hits_quarter_pi_at_gate_time() {
    let traj = ms_trajectory(3, TAU, 1025).unwrap();
    let last = traj.len() - 1;
    assert_relative_eq!(traj.phi()[[last, 0, 1]], FRAC_PI_4, epsilon = 1e-14);
    assert_relative_eq!(traj.phi()[[512, 1, 2]], FRAC_PI_8, epsilon = 1e-14);
    assert_eq!(traj.phi()[[0, 0, 2]], 0.0);
    assert_eq!(traj.alpha()[[0, 0, 1]], Complex64::new(0.0, 0.0));
}

#[test]
fn ms_closes_exactly() {
    let (a, p) = closure_residual(&ms_trajectory(4, TAU, 256).unwrap());
    assert!(a < 1e-10 && p < 1e-10, "{a} {p}");
}

#[test]
fn truncated_ms_leaves_residual_displacement() {
    let traj = ms_trajectory(2, TAU, 1001).unwrap();
    let (a, _) = closure_residual(&traj.prefix(900));
    // |1 - e^{i 1.8 pi}| / 4
    assert_relative_eq!(a, 0.154_508_497_187_473_7, epsilon = 1e-12);
}

#[test]
fn robust_waveform_moments() {
    let traj = robust_trajectory(2, TAU, 4097).unwrap();
    let alpha: Vec<Complex64> = (0..traj.len()).map(|s| traj.alpha()[[s, 0, 0]]).collect();
    assert!(alpha[0].norm() < 1e-15);
    assert!(alpha[alpha.len() - 1].norm() < 1e-10);
    let re: Vec<f64> = alpha.iter().map(|a| a.re).collect();
    let im: Vec<f64> = alpha.iter().map(|a| a.im).collect();
    assert!(trapezoid(&re, traj.dt()).abs() < 1e-12);
    assert!(trapezoid(&im, traj.dt()).abs() < 1e-12);
    let sq: Vec<f64> = alpha.iter().map(|a| a.norm_sqr()).collect();
    assert_relative_eq!(trapezoid(&sq, traj.dt()), TAU / 12.0, max_relative = 1e-10);
    let (a, p) = closure_residual(&traj);
    assert!(a < 1e-10);
    // The phase is integrated numerically; the Richardson estimate bounds it.
    assert!(p < 10.0 * traj.quadrature_tolerance() + 1e-12, "{p}");
}

#[test]
fn robust_phase_tracks_closed_form() {
    let traj = robust_trajectory(2, TAU, 2049).unwrap();
    let xi = 2.0 * PI / TAU;
    let worst = traj
        .times()
        .iter()
        .enumerate()
        .map(|(s, &t)| (traj.phi()[[s, 0, 1]] - (xi * t - (xi * t).sin()) / 4.0).abs())
        .fold(0.0, f64::max);
    assert!(worst < 4.0 * traj.quadrature_tolerance(), "{worst} vs {}", traj.quadrature_tolerance());
}

#[test]
fn bad_inputs_are_rejected() {
    assert!(matches!(ms_trajectory(1, TAU, 64), Err(GateError::TooFewIons(1))));
    assert!(matches!(ms_trajectory(2, -1.0, 64), Err(GateError::BadDuration(_))));
    assert!(matches!(robust_trajectory(2, TAU, 8), Err(GateError::GridTooSmall { .. })));
    assert!(ModeSpec::new(vec![2.0, 1.0], Array2::zeros((2, 2))).is_err());
    let mut asym = uniform_targets(2, FRAC_PI_4);
    asym[[0, 1]] = 0.1;
    assert!(matches!(GateSpec::new(2, TAU, vec![], asym), Err(GateError::BadTargets)));
}

#[test]
fn magnus_matches_single_tone_closed_form() {
    let (gate, modes) = single_tone_ms(2, TAU, 20.0);
    let traj = magnus_trajectories(&gate, &modes, 4097).unwrap();
    let xi = 2.0 * PI / TAU;
    let (mu, nu) = (gate.tones()[0].frequency, modes.frequencies()[0]);
    // Step measured in radians of the slow gate phase.
    let h = xi * traj.dt();
    let worst = traj
        .times()
        .iter()
        .enumerate()
        .map(|(s, &t)| (traj.alpha()[[s, 0, 0]] - single_tone_alpha(t, xi / 2.0, mu, nu)).norm())
        .fold(0.0, f64::max);
    assert!(worst < 10.0 * h * h, "{worst} vs {}", 10.0 * h * h);
}

#[test]
fn magnus_single_tone_approaches_ms_away_from_sideband() {
    // Counter-rotating terms shrink like xi / (nu + mu); at 200 xi the
    // rotating-wave MS form is within a percent.
    let (gate, modes) = single_tone_ms(2, TAU, 200.0);
    let traj = magnus_trajectories(&gate, &modes, 16385).unwrap();
    let ms = ms_trajectory(2, TAU, 16385).unwrap();
    let bound = 1.0 / (2.0 * 399.0) + 10.0 * traj.quadrature_tolerance();
    for s in 0..traj.len() {
        let d = (traj.alpha()[[s, 0, 1]] - ms.alpha()[[s, 0, 1]]).norm();
        assert!(d < bound, "alpha deviation {d} at {s}");
    }
    let last = traj.len() - 1;
    assert!((traj.phi()[[last, 0, 1]] - FRAC_PI_4).abs() < 0.01);
}

#[test]
fn magnus_zero_waveform_is_trivial() {
    let gate = GateSpec::new(3, TAU, vec![], Array2::zeros((3, 3))).unwrap();
    let modes = ModeSpec::new(vec![2e7], Array2::from_elem((1, 3), 0.1)).unwrap();
    let traj = magnus_trajectories(&gate, &modes, 64).unwrap();
    assert!(traj.alpha().iter().all(|a| a.norm() == 0.0));
    assert!(traj.phi().iter().all(|p| *p == 0.0));
}

#[test]
fn magnus_rejects_coarse_grid_and_shape_mismatch() {
    let (gate, modes) = single_tone_ms(2, TAU, 200.0);
    assert!(matches!(magnus_trajectories(&gate, &modes, 512), Err(GateError::UnderResolved { .. })));
    let wrong = ModeSpec::new(vec![1e6], Array2::from_elem((1, 3), 0.1)).unwrap();
    assert!(matches!(magnus_trajectories(&gate, &wrong, 8192), Err(GateError::IonCountMismatch { .. })));
}

#[test]
fn halving_the_step_stays_within_reported_tolerance() {
    let file = block_gate();
    let coarse = magnus_trajectories(&file.gate, &file.modes, 16385).unwrap();
    let fine = magnus_trajectories(&file.gate, &file.modes, 32769).unwrap();
    let tol = coarse.quadrature_tolerance();
    assert!(tol > 0.0);
    for s in 0..coarse.len() {
        for (a, b) in coarse.alpha().slice(ndarray::s![s, .., ..]).iter().zip(fine.alpha().slice(ndarray::s![2 * s, .., ..])) {
            assert!((a - b).norm() < 4.0 * tol);
        }
        for (a, b) in coarse.phi().slice(ndarray::s![s, .., ..]).iter().zip(fine.phi().slice(ndarray::s![2 * s, .., ..])) {
            assert!((a - b).abs() < 4.0 * tol);
        }
    }
}

#[test]
fn block_gate_entangles_only_driven_pairs() {
    let file = block_gate();
    let traj = magnus_trajectories(&file.gate, &file.modes, 16385).unwrap();
    let last = traj.len() - 1;
    let phi = traj.phi();
    assert!((phi[[last, 0, 1]] - FRAC_PI_4).abs() < 1e-4, "{}", phi[[last, 0, 1]]);
    assert!((phi[[last, 2, 3]] - FRAC_PI_4).abs() < 1e-4, "{}", phi[[last, 2, 3]]);
    assert!(phi[[last, 0, 2]].abs() < 1e-6);
    let (alpha_res, _) = closure_residual(&traj);
    assert!(alpha_res < 1e-3, "{alpha_res}");
}

#[test]
fn gate_file_converts_units() {
    let file = block_gate();
    assert_eq!(file.gate.ion_count(), 4);
    assert_relative_eq!(file.gate.duration(), 100e-6, max_relative = 1e-12);
    assert_relative_eq!(file.modes.frequencies()[1], 2.0 * PI * 2.2e6, max_relative = 1e-12);
    assert_relative_eq!(file.gate.tones()[0].amplitude, 2.0 * PI * 48736.98, max_relative = 1e-12);
    assert_eq!(file.gate.targets()[[1, 0]], FRAC_PI_4);
    assert!(parse_gate_file("[modes]\nfrequencies_hz=[1.0]\neta=[0.1]\n").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn magnus_phases_symmetric_and_start_at_zero(
        amps in proptest::collection::vec(0.0f64..5e4, 3),
        dets in proptest::collection::vec(-3e4f64..3e4, 3),
        phases in proptest::collection::vec(0.0f64..6.3, 3),
    ) {
        let tau = 200e-6;
        let nu = 2.0 * PI * 1e6;
        let tones = (0..3).map(|i| Tone { ion: i, amplitude: amps[i], frequency: nu + dets[i], phase: phases[i] }).collect();
        let gate = GateSpec::new(3, tau, tones, Array2::zeros((3, 3))).unwrap();
        let modes = ModeSpec::new(vec![nu], Array2::from_elem((1, 3), 0.05)).unwrap();
        let traj = magnus_trajectories(&gate, &modes, 8192).unwrap();
        for s in 0..traj.len() {
            for a in 0..3 {
                prop_assert_eq!(traj.phi()[[s, a, a]], 0.0);
                for b in 0..3 {
                    prop_assert_eq!(traj.phi()[[s, a, b]], traj.phi()[[s, b, a]]);
                }
            }
        }
        prop_assert!(traj.alpha().slice(ndarray::s![0, .., ..]).iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn ms_phase_never_jumps(grid in 16usize..600) {
        let traj = ms_trajectory(2, TAU, grid).unwrap();
        // Largest phase slope is xi/4; a step cannot move further than that.
        let bound = 2.0 * PI / TAU / 4.0 * traj.dt() * (1.0 + 1e-9);
        for s in 1..traj.len() {
            prop_assert!((traj.phi()[[s, 0, 1]] - traj.phi()[[s - 1, 0, 1]]).abs() <= bound);
        }
    }
}
