use std::time::Instant;

use ionqec::gatekit::{ms_trajectory, TrajectoryTable};
use ionqec::noisechan::{
    dephasing_channel, heating_1q_probs, heating_channel, scatter_correlated_channel, scatter_single_flip_probs,
    PauliChannel, RateSet, ScatterVariant,
};
use ionqec::oracle::{
    evolve_jump, heating_jumps, leading_order_channel, FlipHistogram, Jump, JumpOp, OracleConfig, OracleError,
};

const TAU: f64 = 450e-6;

fn flip_marginal(ch: &PauliChannel, qubit: usize) -> f64 {
    ch.flip_pattern_marginals().iter().filter(|(m, _)| *m >> qubit & 1 == 1).map(|(_, p)| p).sum()
}

fn assert_channels_close(a: &PauliChannel, b: &PauliChannel, tol: f64) {
    for (pauli, &p) in a.terms().iter().chain(b.terms()) {
        let (x, y) = (a.probability(pauli), b.probability(pauli));
        assert!((x - y).abs() <= tol, "{pauli}: {x} vs {y} (mass {p})");
    }
}

fn config(traj: TrajectoryTable, jumps: Vec<Jump>, cutoff: usize, shots: usize, seed: u64) -> OracleConfig {
    let modes = traj.mode_count();
    OracleConfig { trajectory: traj, jumps, nbar: vec![0.0; modes], cutoff, shots, seed }
}

#[test]
fn leading_order_scattering_matches_closed_form() {
    let ms = ms_trajectory(2, TAU, 2049).unwrap();
    let gs = 40.0;
    for (op, variant) in [(JumpOp::SigmaZ(0), ScatterVariant::Z), (JumpOp::SigmaY(0), ScatterVariant::Y)] {
        for nbar in [0.0, 0.3] {
            let lead = leading_order_channel(&ms, &[Jump::new(op, gs)], &[nbar], 24).unwrap();
            let single = scatter_single_flip_probs(&ms, 0, gs, &[nbar], variant).unwrap();
            for (q, &p) in single.iter().enumerate() {
                let got = flip_marginal(&lead, q);
                assert!((got - p).abs() < 1e-6, "{op} nbar={nbar} qubit {q}: {got} vs {p}");
            }
            let closed = scatter_correlated_channel(&ms, 0, gs, &[nbar], 0.0, variant).unwrap();
            assert_channels_close(&lead, &closed, 1e-6);
        }
    }
}

#[test]
fn leading_order_heating_matches_closed_form() {
    let ms = ms_trajectory(2, TAU, 2049).unwrap();
    let (gh, nth) = (0.5, 0.4);
    let lead = leading_order_channel(&ms, &heating_jumps(0, gh, nth), &[0.0], 12).unwrap();
    let first = heating_1q_probs(&ms, &[gh], &[nth]).unwrap();
    for (q, &p) in first.iter().enumerate() {
        assert!((flip_marginal(&lead, q) - p).abs() < 1e-12 + 1e-9 * p);
    }
    let closed = heating_channel(&ms, &RateSet::uniform(1, 0.0, gh, nth, 0.0, 0.0)).unwrap();
    assert_channels_close(&lead, &closed, 1e-6);
}

#[test]
fn leading_order_dephasing_matches_closed_form() {
    let ms = ms_trajectory(2, TAU, 2049).unwrap();
    for nbar in [0.0, 0.5] {
        let gd = 30.0;
        let lead = leading_order_channel(&ms, &[Jump::new(JumpOp::Number(0), gd)], &[nbar], 30).unwrap();
        let closed = dephasing_channel(&ms, &RateSet::uniform(1, 0.0, 0.0, 0.0, gd, nbar)).unwrap();
        assert_channels_close(&lead, &closed, 1e-6);
        assert!(closed.probability(&"XX".parse().unwrap()) > 1e-4);
    }
}

#[test]
fn leading_order_with_zero_rates_is_identity() {
    let ms = ms_trajectory(3, TAU, 129).unwrap();
    let jumps = [Jump::new(JumpOp::SigmaZ(1), 0.0), Jump::new(JumpOp::Lower(0), 0.0)];
    let ch = leading_order_channel(&ms, &jumps, &[1.0], 8).unwrap();
    assert_eq!(ch.identity(), 1.0);
    assert!(ch.terms().is_empty());
}

#[test]
fn oracle_rejects_bad_systems() {
    let big = ms_trajectory(5, TAU, 33).unwrap();
    assert!(matches!(leading_order_channel(&big, &[], &[0.0], 8), Err(OracleError::TooManySpins(5))));
    let ms = ms_trajectory(2, TAU, 33).unwrap();
    assert!(matches!(leading_order_channel(&ms, &[], &[0.0], 4), Err(OracleError::CutoffTooSmall(4))));
    assert!(matches!(
        leading_order_channel(&ms, &[Jump::new(JumpOp::SigmaX(2), 1.0)], &[0.0], 8),
        Err(OracleError::BadJump(_))
    ));
    assert!(matches!(
        evolve_jump(&config(ms.clone(), vec![], 8, 0, 1)),
        Err(OracleError::NoShots)
    ));
    assert!(matches!(leading_order_channel(&ms, &[], &[0.0, 1.0], 8), Err(OracleError::OccupationShape { .. })));
}

#[test]
fn zero_rates_give_no_flips() {
    let ms = ms_trajectory(3, TAU, 129).unwrap();
    let mut cfg = config(ms, vec![Jump::new(JumpOp::Lower(0), 0.0)], 10, 200, 3);
    cfg.nbar = vec![0.8];
    let h = evolve_jump(&cfg).unwrap();
    assert!((h.probabilities[0] - 1.0).abs() < 1e-9, "{}", h.probabilities[0]);
    assert_eq!(h.counts[0], 200);
    assert!((h.total_probability() - 1.0).abs() < 1e-9);
}

#[test]
fn fixed_seed_is_bit_identical() {
    let ms = ms_trajectory(2, TAU, 129).unwrap();
    let jumps = vec![Jump::new(JumpOp::SigmaZ(0), 300.0), Jump::new(JumpOp::Lower(0), 200.0)];
    let a = evolve_jump(&config(ms.clone(), jumps.clone(), 10, 300, 42)).unwrap();
    let b = evolve_jump(&config(ms.clone(), jumps.clone(), 10, 300, 42)).unwrap();
    assert_eq!(a, b);
    let c = evolve_jump(&config(ms, jumps, 10, 300, 43)).unwrap();
    assert_ne!(a.probabilities, c.probabilities);
}

fn within(h: &FlipHistogram, mask: usize, expected: f64, slack: f64) -> bool {
    (h.probabilities[mask] - expected).abs() <= 3.0 * h.stderr[mask] + slack
}

#[test]
fn dephasing_single_flip_mass() {
    let ms = ms_trajectory(3, TAU, 257).unwrap();
    let gd = 10.0;
    let start = Instant::now();
    let h = evolve_jump(&config(ms, vec![Jump::new(JumpOp::Number(0), gd)], 10, 20_000, 7)).unwrap();
    let single = h.weight_probabilities[1];
    let expected = 3.0 * gd * TAU / 8.0;
    eprintln!("dephasing single-flip mass {single:.4e} vs {expected:.4e} in {:?}", start.elapsed());
    assert!((single / expected - 1.0).abs() < 0.15);
}

#[test]
fn heating_flips_fall_off_exponentially() {
    let ms = ms_trajectory(3, TAU, 257).unwrap();
    let h = evolve_jump(&config(ms, heating_jumps(0, 40.0, 0.5), 12, 20_000, 11)).unwrap();
    let w = &h.weight_probabilities;
    eprintln!("heating weights {w:?} leakage {:.2e}", h.leakage);
    assert!(w[1] > w[2] && w[2] > w[3] && w[3] > 0.0);
    let slope = (w[3].ln() - w[1].ln()) / 2.0;
    assert!(slope < -2.0, "slope {slope}");
}

#[test]
fn spin_jumps_match_closed_form() {
    let ms = ms_trajectory(3, TAU, 257).unwrap();
    let gs = 60.0;
    let h = evolve_jump(&config(ms.clone(), vec![Jump::new(JumpOp::SigmaZ(1), gs)], 12, 20_000, 5)).unwrap();
    let closed = scatter_correlated_channel(&ms, 1, gs, &[0.0], 0.0, ScatterVariant::Z).unwrap();
    let marg = closed.flip_pattern_marginals();
    let slack = 2.0 * (gs * TAU).powi(2);
    for mask in 1..8usize {
        let p = marg.get(&(mask as u64)).copied().unwrap_or(0.0);
        assert!(within(&h, mask, p, slack), "{mask}: {} +- {} vs {p}", h.probabilities[mask], h.stderr[mask]);
    }
}

#[test]
fn doubling_cutoff_is_within_statistics() {
    let ms = ms_trajectory(2, TAU, 129).unwrap();
    let jumps = heating_jumps(0, 100.0, 0.3);
    let a = evolve_jump(&config(ms.clone(), jumps.clone(), 10, 4000, 9)).unwrap();
    let b = evolve_jump(&config(ms, jumps, 20, 4000, 9)).unwrap();
    for m in 0..4 {
        let sigma = (a.stderr[m].powi(2) + b.stderr[m].powi(2)).sqrt();
        assert!((a.probabilities[m] - b.probabilities[m]).abs() <= 3.0 * sigma + 1e-12, "{m}");
    }
}
