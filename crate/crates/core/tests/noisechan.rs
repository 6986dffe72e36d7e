use std::f64::consts::{FRAC_PI_4, PI};

use approx::assert_relative_eq;
use ionqec::gatekit::{ms_trajectory, robust_trajectory, TrajectorySource, TrajectoryTable};
use ionqec::noisechan::{
    coupled_uncoupled_split, dephasing_channel, dephasing_probs, gamma_k, hadamard_conjugate, heating_1q_probs,
    heating_eta, heating_matrix, hook_asymptotics, hook_deviation_from_two_qubit, hook_distribution, raman_rate,
    scatter_budget, scatter_correlated_channel, scatter_single_flip_probs, HeatingMatrix, NoiseError, Pauli,
    PauliChannel, PauliString, RateSet, ScatterVariant,
};
use ndarray::{Array2, Array3};
use num_complex::Complex64;
use proptest::prelude::*;

const TAU: f64 = 450e-6;

fn flat_table(n: usize, alpha: Complex64, phase: f64) -> TrajectoryTable {
    // Two samples: zero at t = 0, then a constant value.
    let k = 33;
    let times: Vec<f64> = (0..k).map(|i| i as f64 * TAU / (k - 1) as f64).collect();
    let mut a = Array3::zeros((k, 1, n));
    let mut p = Array3::zeros((k, n, n));
    for s in 1..k {
        for i in 0..n {
            a[[s, 0, i]] = alpha;
            for j in 0..n {
                if i != j {
                    p[[s, i, j]] = phase;
                }
            }
        }
    }
    TrajectoryTable::from_parts(TrajectorySource::Loaded, times, a, p, Array2::zeros((n, n)), 0.0).unwrap()
}

fn pattern(symbols: &str) -> PauliString {
    symbols.parse().unwrap()
}

#[test]
fn gamma_k_examples() {
    let zero = flat_table(2, Complex64::new(0.0, 0.0), 0.0);
    assert_eq!(gamma_k(&zero, &[0.0], 0, TAU).unwrap(), 0.0);
    let half = flat_table(2, Complex64::new(0.5f64.sqrt(), 0.0), 0.0);
    // (1 - e^-1) / 2
    assert_relative_eq!(gamma_k(&half, &[0.0], 1, TAU).unwrap(), 0.316_060_279_414_278_8, max_relative = 1e-14);
    let mut last = 0.0;
    for nbar in [0.0, 0.5, 2.0, 10.0, 100.0] {
        let g = gamma_k(&half, &[nbar], 0, TAU).unwrap();
        assert!(g >= last && g <= 0.5);
        last = g;
    }
    assert!(last > 0.5 - 1e-12);
    assert!(matches!(gamma_k(&half, &[0.0], 5, TAU), Err(NoiseError::UnknownIon { .. })));
    assert!(matches!(gamma_k(&half, &[0.0], 0, 2.0 * TAU), Err(NoiseError::TimeOutsideGrid(_))));
}

#[test]
fn single_flip_probabilities() {
    let uncoupled = flat_table(3, Complex64::new(0.0, 0.0), 0.0);
    let gs = 10.0;
    let pz = scatter_single_flip_probs(&uncoupled, 0, gs, &[0.0], ScatterVariant::Z).unwrap();
    assert_eq!(pz[1], 0.0);
    let py = scatter_single_flip_probs(&uncoupled, 0, gs, &[0.0], ScatterVariant::Y).unwrap();
    assert_relative_eq!(py[2], gs * TAU, max_relative = 1e-12);

    // MS pair: (1/2pi) int sin^2((u - sin u)/4) du = 1/2 by the mirror
    // symmetry of the phase about the gate midpoint.
    let ms = ms_trajectory(2, TAU, 4097).unwrap();
    let p = scatter_single_flip_probs(&ms, 0, gs, &[0.0], ScatterVariant::Z).unwrap();
    assert_relative_eq!(p[1] / (gs * TAU), 0.5, max_relative = 1e-9);
}

#[test]
fn correlated_channel_reproduces_five_ion_closed_forms() {
    let ms = ms_trajectory(5, TAU, 4097).unwrap();
    let gs = 1.0 / TAU;
    let ch = scatter_correlated_channel(&ms, 0, gs, &[0.0; 1], 0.0, ScatterVariant::Z).unwrap();
    assert_relative_eq!(ch.probability(&pattern("ZIIII")), 0.291_391, epsilon = 1e-4);
    assert_relative_eq!(ch.probability(&pattern("YXXXX")), 0.081, epsilon = 1e-3);
    assert_relative_eq!(ch.error_mass(), 1.0, epsilon = 1e-9);
    // Mirror symmetry of the integration limits.
    assert_relative_eq!(ch.probability(&pattern("ZXXXX")), ch.probability(&pattern("ZIIII")), epsilon = 1e-6);
}

#[test]
fn y_variant_toggles_faulty_symbol() {
    let ms = ms_trajectory(3, TAU, 1025).unwrap();
    let z = scatter_correlated_channel(&ms, 1, 100.0, &[0.2], 0.0, ScatterVariant::Z).unwrap();
    let y = scatter_correlated_channel(&ms, 1, 100.0, &[0.2], 0.0, ScatterVariant::Y).unwrap();
    for (s, p) in z.terms() {
        let mut t = s.clone();
        t.set(1, if s.get(1) == Pauli::Z { Pauli::Y } else { Pauli::Z });
        assert_eq!(y.probability(&t), *p);
    }
}

#[test]
fn truncation_moves_mass_to_identity() {
    let ms = ms_trajectory(5, TAU, 1025).unwrap();
    let gs = 2.0; // Gamma tau ~ 1e-3
    let full = scatter_correlated_channel(&ms, 2, gs, &[0.0], 0.0, ScatterVariant::Z).unwrap();
    let cut = scatter_correlated_channel(&ms, 2, gs, &[0.0], 1e-5, ScatterVariant::Z).unwrap();
    assert!(cut.terms().len() < full.terms().len());
    assert!(cut.terms().values().all(|p| *p >= 1e-5));
    assert_relative_eq!(cut.identity() + cut.error_mass(), 1.0, epsilon = 1e-12);
    assert!(cut.identity() > full.identity());
    assert!(matches!(
        scatter_correlated_channel(&ms, 2, gs, &[0.0], 0.01, ScatterVariant::Z),
        Err(NoiseError::BadTruncation(_))
    ));
}

#[test]
fn large_support_is_rejected() {
    let ms = ms_trajectory(22, TAU, 64).unwrap();
    assert!(matches!(
        scatter_correlated_channel(&ms, 0, 1.0, &[0.0], 0.0, ScatterVariant::Z),
        Err(NoiseError::SupportTooLarge { size: 22, .. })
    ));
}

#[test]
fn hook_distribution_values() {
    let d5 = hook_distribution(5);
    let expect5 = [0.356_122, 0.081_666, 0.062_212, 0.062_212, 0.081_666, 0.356_122];
    for (a, b) in d5.iter().zip(expect5) {
        assert_relative_eq!(*a, b, epsilon = 2e-6);
    }
    let d4 = hook_distribution(4);
    for n in 1..4 {
        assert!(d4[4] > d4[n]);
    }
    let d10 = hook_distribution(10);
    let expect10 = [0.310_971, 0.063_704, 0.042_681, 0.035_167, 0.031_959, 0.031_037];
    for (a, b) in d10.iter().zip(expect10) {
        assert_relative_eq!(*a, b, epsilon = 2e-6);
    }
    assert!(hook_deviation_from_two_qubit(10) > 2.0);
    let d200 = hook_distribution(200);
    let (edge, centre) = hook_asymptotics(200);
    assert_relative_eq!(d200[0], 0.180_36, max_relative = 1e-3);
    assert_relative_eq!(d200[100], 0.001_589_56, max_relative = 1e-3);
    assert!((d200[0] / edge - 1.0).abs() < 0.15);
    assert!((d200[100] / centre - 1.0).abs() < 0.15);
    assert_relative_eq!(hook_asymptotics(1_000_000).0, 0.0430, epsilon = 5e-5);
}

#[test]
fn heating_matrix_for_ms() {
    let ms = ms_trajectory(4, TAU, 4097).unwrap();
    let zero = heating_matrix(&ms, &[0.0], &[0.0]).unwrap();
    assert!(zero.matrix().iter().all(|x| *x == 0.0));
    let a = heating_matrix(&ms, &[20.0], &[0.5]).unwrap();
    let expected = 20.0 * 2.0 * TAU / 16.0;
    for x in a.matrix().iter() {
        assert_relative_eq!(*x, expected, max_relative = 1e-6);
    }
    let p = heating_1q_probs(&ms, &[20.0], &[0.0]).unwrap();
    assert_relative_eq!(p[3], 20.0 * TAU / 8.0, max_relative = 1e-6);
    let robust = robust_trajectory(3, TAU, 4097).unwrap();
    let p = heating_1q_probs(&robust, &[20.0], &[0.0]).unwrap();
    assert_relative_eq!(p[0], 20.0 * TAU / 12.0, max_relative = 1e-6);
    assert!(matches!(heating_matrix(&ms, &[1.0, 2.0], &[0.0]), Err(NoiseError::RateShape { .. })));
}

#[test]
fn heating_eta_limits() {
    let eta = heating_eta(&HeatingMatrix(Array2::zeros((4, 4))), 4).unwrap();
    assert_eq!(eta[0], 1.0);
    assert!(eta[1..].iter().all(|x| *x == 0.0));
    assert!(matches!(heating_eta(&HeatingMatrix(Array2::zeros((15, 15))), 15), Err(NoiseError::TooManyQubits { .. })));
}

#[test]
fn heating_eta_single_flips_agree_with_first_order() {
    let ms = ms_trajectory(5, TAU, 2049).unwrap();
    for gamma in [0.5, 2.0, 10.0] {
        let gt = gamma * TAU;
        let a = heating_matrix(&ms, &[gamma], &[0.0]).unwrap();
        let eta = heating_eta(&a, 5).unwrap();
        let p1 = heating_1q_probs(&ms, &[gamma], &[0.0]).unwrap();
        for n in 0..5 {
            let rel = (eta[1 << n] - p1[n]).abs() / p1[n];
            assert!(rel <= 5.0 * gt, "rel {rel} at gamma tau {gt}");
        }
    }
}

#[test]
fn heating_eta_dominated_by_single_flips() {
    // Gamma_h nbar = 50 Hz over 450 us on six ions.
    let ms = ms_trajectory(6, TAU, 2049).unwrap();
    let a = heating_matrix(&ms, &[100.0], &[0.0]).unwrap();
    let eta = heating_eta(&a, 6).unwrap();
    let single: f64 = (0..6).map(|n| eta[1 << n]).sum();
    let multi: f64 = eta.iter().enumerate().filter(|(m, _)| m.count_ones() > 1).map(|(_, p)| p).sum();
    assert!(single > 10.0 * multi, "{single} {multi}");
    assert_relative_eq!(eta.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
}

#[test]
fn heating_eta_routes_agree() {
    // Random PSD matrix: Gram matrix of small random vectors.
    let n = 8;
    let v = Array2::from_shape_fn((n, 3), |(i, j)| 0.01 * (((i * 7 + j * 3) % 5) as f64 - 2.0));
    let a = HeatingMatrix(v.dot(&v.t()));
    let dense = heating_eta(&a, n).unwrap();
    // Pad to 11 qubits with an uncoupled block; patterns touching the pad
    // have zero weight and the rest must match.
    let mut big = Array2::zeros((11, 11));
    big.slice_mut(ndarray::s![..n, ..n]).assign(a.matrix());
    let grouped = heating_eta(&HeatingMatrix(big), 11).unwrap();
    for (m, p) in dense.iter().enumerate() {
        assert_relative_eq!(grouped[m], *p, max_relative = 1e-9, epsilon = 1e-28);
    }
}

#[test]
fn dephasing_totals_match_closed_forms() {
    let gd = 10.0;
    for n in 2..=8 {
        let ms = ms_trajectory(n, TAU, 4097).unwrap();
        let (p1, p2) = dephasing_probs(&ms, &[gd], &[0.0]).unwrap();
        let pairs = (n * (n - 1) / 2) as f64;
        assert_relative_eq!(p1.iter().sum::<f64>(), n as f64 * gd * TAU / 8.0, max_relative = 1e-6);
        assert_relative_eq!(p2.sum() / 2.0, pairs * 3.0 * gd * TAU / 32.0, max_relative = 1e-6);
        let robust = robust_trajectory(n, TAU, 4097).unwrap();
        let (r1, r2) = dephasing_probs(&robust, &[gd], &[0.0]).unwrap();
        assert_relative_eq!(r1.iter().sum::<f64>(), n as f64 * gd * TAU / 12.0, max_relative = 1e-6);
        // Cross-term squared for the robust waveform: int |alpha|^4 = tau/96.
        assert_relative_eq!(r2.sum() / 2.0, pairs * 4.0 * gd * TAU / 96.0, max_relative = 1e-6);
    }
}

#[test]
fn dephasing_pairs_vanish_for_idle_ion() {
    let mut ms = ms_trajectory(3, TAU, 257).unwrap();
    let (times, mut alpha, mut phi) = (ms.times().to_vec(), ms.alpha().clone(), ms.phi().clone());
    alpha.slice_mut(ndarray::s![.., .., 2]).fill(Complex64::new(0.0, 0.0));
    phi.slice_mut(ndarray::s![.., 2, ..]).fill(0.0);
    phi.slice_mut(ndarray::s![.., .., 2]).fill(0.0);
    ms = TrajectoryTable::from_parts(TrajectorySource::Loaded, times, alpha, phi, Array2::zeros((3, 3)), 0.0).unwrap();
    let (_, p2) = dephasing_probs(&ms, &[5.0], &[1.0]).unwrap();
    assert_eq!(p2[[0, 2]], 0.0);
    assert_eq!(p2[[2, 1]], 0.0);
    assert!(p2[[0, 1]] > 0.0);
    let ch = dephasing_channel(&ms, &RateSet::uniform(1, 0.0, 0.0, 0.0, 5.0, 1.0)).unwrap();
    assert_eq!(ch.probability(&pattern("XIX")), 0.0);
}

#[test]
fn coupled_split() {
    let uniform = Array2::from_elem((4, 4), 1e-4);
    let ms = ms_trajectory(4, TAU, 64).unwrap();
    let s = coupled_uncoupled_split(&uniform, ms.targets()).unwrap();
    assert_eq!(s.coupled_pairs, 6);
    assert_eq!(s.uncoupled_median, None);
    assert!(s.has_empty_class());
    let mut targets = Array2::zeros((4, 4));
    targets[[0, 1]] = FRAC_PI_4;
    targets[[1, 0]] = FRAC_PI_4;
    let s = coupled_uncoupled_split(&uniform, &targets).unwrap();
    assert_eq!(s.coupled_median, s.uncoupled_median);
}

#[test]
fn raman_examples() {
    let budget = scatter_budget(2e5, 2.0 * PI * 20e6, 2.0 * PI * 5e12, 321e-6).unwrap();
    assert_relative_eq!(budget, 2.568e-4, max_relative = 1e-4);
    assert_eq!(raman_rate(0.0, 0.0, 1.0, 1.0).unwrap(), 0.0);
    // Order-of-magnitude estimate with a 1 ms gate.
    let p = scatter_budget(1e5, 2.0 * PI * 20e6, 2.0 * PI * 5e12, 1e-3).unwrap();
    assert!((-4.0..=-2.0).contains(&p.log10()), "{p}");
    assert!(matches!(raman_rate(1.0, 1.0, 0.0, 1.0), Err(NoiseError::ZeroDetuning)));
}

#[test]
fn hadamard_examples() {
    let id = Array2::<f64>::eye(8);
    let h = hadamard_conjugate(&id).unwrap();
    for ((i, j), v) in h.indexed_iter() {
        assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
    }
    let mut zero = Array2::<f64>::zeros((16, 16));
    zero[[0, 0]] = 1.0;
    let u = hadamard_conjugate(&zero).unwrap();
    assert!(u.iter().all(|v| (v - 1.0 / 16.0).abs() < 1e-15));
    assert!(matches!(hadamard_conjugate(&Array2::zeros((4, 2))), Err(NoiseError::NotSquarePow2 { .. })));
}

#[test]
fn channel_json_round_trip() {
    let ms = ms_trajectory(3, TAU, 257).unwrap();
    let ch = scatter_correlated_channel(&ms, 0, 5.0, &[0.0], 0.0, ScatterVariant::Z).unwrap();
    let text = serde_json::to_string(&ch.to_document()).unwrap();
    let back = PauliChannel::from_document(&serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(back.terms().len(), ch.terms().len());
    assert!(PauliChannel::from_terms(2, [(pattern("XI"), 0.6), (pattern("IX"), 0.6)]).is_err());
    assert!(PauliChannel::from_terms(2, [(pattern("XI"), 0.1), (pattern("XI"), 0.1)]).is_err());
    assert!(PauliChannel::from_terms(2, [(pattern("XIX"), 0.1)]).is_err());
}

#[test]
fn rates_file_parses() {
    let r = RateSet::from_toml_str("gamma_s_hz = 1.0\ngamma_h_hz = [2.0]\nnbar_th = [0.1]\ngamma_d_hz = [3.0]\nnbar = [0.0]\n").unwrap();
    r.validate(1).unwrap();
    assert!(r.validate(2).is_err());
    assert!(RateSet::from_toml_str("bogus = 1").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hadamard_is_an_involution(values in proptest::collection::vec(-1.0f64..1.0, 64)) {
        let m = Array2::from_shape_vec((8, 8), values).unwrap();
        let back = hadamard_conjugate(&hadamard_conjugate(&m).unwrap()).unwrap();
        for (a, b) in m.iter().zip(back.iter()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn hook_sums_to_one(n in 1usize..=200) {
        let total: f64 = hook_distribution(n).iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn scatter_mass_matches_rate(n in 2usize..7, k_seed in 0usize..100, nbar in 0.0f64..2.0, gs in 0.1f64..100.0) {
        let ms = ms_trajectory(n, TAU, 513).unwrap();
        let k = k_seed % n;
        let ch = scatter_correlated_channel(&ms, k, gs, &[nbar], 0.0, ScatterVariant::Z).unwrap();
        prop_assert!((ch.error_mass() - gs * TAU).abs() < 1e-9 * gs * TAU + 1e-15);
        prop_assert!(ch.terms().values().all(|p| (0.0..=1.0).contains(p)));
        prop_assert!((ch.identity() + ch.error_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ms_no_flip_equals_all_spectators_flipped(half in 1usize..4, nbar in 0.0f64..1.0) {
        // An even number of spectators keeps both patterns on the same parity branch.
        let n = 2 * half + 1;
        let ms = ms_trajectory(n, TAU, 2049).unwrap();
        let ch = scatter_correlated_channel(&ms, 0, 1.0 / TAU, &[nbar], 0.0, ScatterVariant::Z).unwrap();
        let none = PauliString::from_paulis((0..n).map(|i| if i == 0 { Pauli::Z } else { Pauli::I }).collect());
        let all = PauliString::from_paulis((0..n).map(|i| if i == 0 { Pauli::Z } else { Pauli::X }).collect());
        prop_assert!((ch.probability(&none) - ch.probability(&all)).abs() < 1e-6);
    }

    #[test]
    fn heating_matrix_is_symmetric_psd(g in 0.0f64..50.0, nbar in 0.0f64..3.0) {
        let robust = robust_trajectory(3, TAU, 257).unwrap();
        let a = heating_matrix(&robust, &[g], &[nbar]).unwrap();
        let m = a.matrix();
        for i in 0..3 {
            prop_assert!(m[[i, i]] >= 0.0);
            for j in 0..3 {
                prop_assert!((m[[i, j]] - m[[j, i]]).abs() < 1e-15);
                prop_assert!(m[[i, j]] * m[[i, j]] <= m[[i, i]] * m[[j, j]] * (1.0 + 1e-9));
            }
        }
    }
}
