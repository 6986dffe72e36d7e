//! Spin scattering: a phase flip on one ion mid-gate, rotated through the
//! remainder of the ideal evolution, becomes a correlated bit-flip pattern.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::pauli::{Pauli, PauliChannel, PauliString};
use super::NoiseError;
use crate::gatekit::TrajectoryTable;
use crate::numeric::{ln_binomial, simpson, trapezoid, trapezoid_weights};

/// Ions whose largest |phi_mk(t)| stays below this are left out of the
/// pattern enumeration.
pub const SUPPORT_THRESHOLD: f64 = 1e-3;

/// Largest support set the exact enumeration accepts.
pub const MAX_SUPPORT: usize = 20;

/// Which spin operator the scattering event applies to the faulty ion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScatterVariant {
    Z,
    Y,
}

fn check_ion(traj: &TrajectoryTable, k: usize) -> Result<(), NoiseError> {
    if k >= traj.ion_count() {
        Err(NoiseError::UnknownIon { ion: k, ions: traj.ion_count() })
    } else {
        Ok(())
    }
}

fn check_nbars(traj: &TrajectoryTable, nbars: &[f64]) -> Result<(), NoiseError> {
    if nbars.len() != traj.mode_count() {
        return Err(NoiseError::RateShape { key: "nbar", expected: traj.mode_count(), got: nbars.len() });
    }
    Ok(())
}

/// Weighted displacement exponent `sum_j (2 nbar_j + 1) |alpha_j^k|^2` at a node.
fn thermal_exponent(traj: &TrajectoryTable, nbars: &[f64], k: usize, node: usize) -> f64 {
    let alpha = traj.alpha();
    nbars
        .iter()
        .enumerate()
        .map(|(j, nb)| (2.0 * nb + 1.0) * alpha[[node, j, k]].norm_sqr())
        .sum()
}

fn gamma_from_exponent(x: f64) -> f64 {
    -0.5 * (-2.0 * x).exp_m1()
}

/// Phonon-trace flip probability on ion `k` at time `t`,
/// `(1 - exp(-2 sum_j (2 nbar_j + 1) |alpha_j^k(t)|^2)) / 2`, evaluated on
/// the stored trajectory. Off-grid times interpolate linearly.
pub fn gamma_k(traj: &TrajectoryTable, nbars: &[f64], k: usize, t: f64) -> Result<f64, NoiseError> {
    check_ion(traj, k)?;
    check_nbars(traj, nbars)?;
    let dt = traj.dt();
    if !(t >= -1e-12 * dt && t <= traj.duration() + 1e-9 * dt) {
        return Err(NoiseError::TimeOutsideGrid(t));
    }
    let x = (t / dt).clamp(0.0, (traj.len() - 1) as f64);
    let lo = (x.floor() as usize).min(traj.len() - 2);
    let s = x - lo as f64;
    let alpha = traj.alpha();
    let mut exponent = 0.0;
    for (j, nb) in nbars.iter().enumerate() {
        let a = alpha[[lo, j, k]] + (alpha[[lo + 1, j, k]] - alpha[[lo, j, k]]) * s;
        exponent += (2.0 * nb + 1.0) * a.norm_sqr();
    }
    Ok(gamma_from_exponent(exponent))
}

/// `gamma_k` along the grid as seen by a scattering jump. The jump shifts
/// the motional state by twice the trajectory, so the exponent carries a
/// factor four relative to [`gamma_k`] on the same table.
fn scattering_gamma_series(traj: &TrajectoryTable, nbars: &[f64], k: usize) -> Vec<f64> {
    (0..traj.len())
        .map(|s| gamma_from_exponent(4.0 * thermal_exponent(traj, nbars, k, s)))
        .collect()
}

/// Marginal flip probability of every ion after a scattering event on ion
/// `k` at rate `gamma_s`.
///
/// For the phase-flip variant, ion `n != k` flips with
/// `gamma_s int sin^2(2 phi_nk)`, and the faulty ion with
/// `gamma_s int (1/2 - (1 - 2 gamma_k)/2 prod cos(4 phi_n'k))`. The
/// `Y` variant uses `cos^2` for the spectators and the complement for the
/// faulty ion.
pub fn scatter_single_flip_probs(
    traj: &TrajectoryTable,
    k: usize,
    gamma_s: f64,
    nbars: &[f64],
    variant: ScatterVariant,
) -> Result<Vec<f64>, NoiseError> {
    check_ion(traj, k)?;
    check_nbars(traj, nbars)?;
    warn_if_open(traj);
    let n = traj.ion_count();
    let dt = traj.dt();
    let phi = traj.phi();
    let gammas = scattering_gamma_series(traj, nbars, k);
    let mut out = vec![0.0; n];
    for (m, slot) in out.iter_mut().enumerate() {
        if m == k {
            continue;
        }
        let samples: Vec<f64> = (0..traj.len())
            .map(|s| {
                let c = (2.0 * phi[[s, m, k]]).sin();
                match variant {
                    ScatterVariant::Z => c * c,
                    ScatterVariant::Y => 1.0 - c * c,
                }
            })
            .collect();
        *slot = gamma_s * trapezoid(&samples, dt);
    }
    let faulty: Vec<f64> = (0..traj.len())
        .map(|s| {
            let prod: f64 = (0..n).filter(|&m| m != k).map(|m| (4.0 * phi[[s, m, k]]).cos()).product();
            0.5 - 0.5 * (1.0 - 2.0 * gammas[s]) * prod
        })
        .collect();
    let pz = gamma_s * trapezoid(&faulty, dt);
    out[k] = match variant {
        ScatterVariant::Z => pz,
        ScatterVariant::Y => gamma_s * traj.duration() - pz,
    };
    Ok(out)
}

fn warn_if_open(traj: &TrajectoryTable) {
    let (a, p) = crate::gatekit::closure_residual(traj);
    if a > 1e-6 || p > 1e-6 {
        log::warn!("trajectory not closed at gate time (alpha residual {a:.3e}, phase residual {p:.3e})");
    }
}

/// Ions that take part in the pattern enumeration for faulty ion `k`: `k`
/// itself plus every ion whose phase with `k` ever exceeds the threshold.
pub fn scatter_support(traj: &TrajectoryTable, k: usize, threshold: f64) -> Vec<usize> {
    let max_phase = traj.max_abs_phase_with(k);
    (0..traj.ion_count()).filter(|&m| m == k || max_phase[m] > threshold).collect()
}

/// Unnormalised pattern weights before truncation, one per bitmask over the
/// support (bit order follows `support`). Sums to `gamma_s * tau`.
pub(crate) fn pattern_probabilities(
    traj: &TrajectoryTable,
    k: usize,
    gamma_s: f64,
    nbars: &[f64],
    support: &[usize],
) -> Vec<f64> {
    let others: Vec<usize> = support.iter().copied().filter(|&m| m != k).collect();
    let m = others.len();
    let size = 1usize << m;
    let phi = traj.phi();
    let gammas = scattering_gamma_series(traj, nbars, k);
    let weights = trapezoid_weights(traj.len(), traj.dt());

    // even[p] integrates the product times (1 - gamma_k); odd[p] times gamma_k.
    let mut even = vec![0.0; size];
    let mut odd = vec![0.0; size];
    let mut prod = vec![0.0; size];
    for s in 0..traj.len() {
        prod[0] = 1.0;
        for (bit, &ion) in others.iter().enumerate() {
            let sn = (2.0 * phi[[s, ion, k]]).sin();
            let sin2 = sn * sn;
            let cos2 = 1.0 - sin2;
            let half = 1usize << bit;
            for p in 0..half {
                let v = prod[p];
                prod[p] = v * cos2;
                prod[p + half] = v * sin2;
            }
        }
        let w = weights[s];
        let g = gammas[s];
        for p in 0..size {
            even[p] += w * prod[p] * (1.0 - g);
            odd[p] += w * prod[p] * g;
        }
    }

    // Expand to patterns over the full support, faulty bit included. An
    // even overall parity takes the (1 - gamma) weight.
    let k_bit = support.iter().position(|&x| x == k).expect("support contains k");
    let mut out = vec![0.0; 1usize << support.len()];
    for (p, (&e, &o)) in even.iter().zip(&odd).enumerate() {
        let others_parity = p.count_ones() % 2;
        let base = spread_bits(p, &others, support);
        out[base] = gamma_s * if others_parity == 0 { e } else { o };
        out[base | (1 << k_bit)] = gamma_s * if others_parity == 0 { o } else { e };
    }
    out
}

/// Map a bitmask over `others` onto bit positions within `support`.
fn spread_bits(mask: usize, others: &[usize], support: &[usize]) -> usize {
    let mut out = 0;
    for (bit, ion) in others.iter().enumerate() {
        if mask >> bit & 1 == 1 {
            let pos = support.iter().position(|x| x == ion).unwrap();
            out |= 1 << pos;
        }
    }
    out
}

/// Full correlated scattering channel for a phase flip (or `Y` flip) on ion
/// `k`. Every string carries the faulty-ion operator, which becomes `Y`
/// (resp. `Z`) when the faulty ion is itself flipped. Strings below
/// `eps_trunc` are dropped into the identity.
pub fn scatter_correlated_channel(
    traj: &TrajectoryTable,
    k: usize,
    gamma_s: f64,
    nbars: &[f64],
    eps_trunc: f64,
    variant: ScatterVariant,
) -> Result<PauliChannel, NoiseError> {
    check_ion(traj, k)?;
    check_nbars(traj, nbars)?;
    if !(0.0..=1e-3).contains(&eps_trunc) {
        return Err(NoiseError::BadTruncation(eps_trunc));
    }
    warn_if_open(traj);
    let support = scatter_support(traj, k, SUPPORT_THRESHOLD);
    if support.len() > MAX_SUPPORT {
        return Err(NoiseError::SupportTooLarge { size: support.len(), limit: MAX_SUPPORT });
    }
    let probs = pattern_probabilities(traj, k, gamma_s, nbars, &support);
    let n = traj.ion_count();
    let k_bit = support.iter().position(|&x| x == k).unwrap();
    let mut terms = Vec::new();
    for (mask, &p) in probs.iter().enumerate() {
        if p < eps_trunc || p <= 0.0 {
            continue;
        }
        let mut pauli = PauliString::identity(n);
        for (bit, &ion) in support.iter().enumerate() {
            if ion != k && mask >> bit & 1 == 1 {
                pauli.set(ion, Pauli::X);
            }
        }
        let flipped = mask >> k_bit & 1 == 1;
        let symbol = match (variant, flipped) {
            (ScatterVariant::Z, false) | (ScatterVariant::Y, true) => Pauli::Z,
            (ScatterVariant::Z, true) | (ScatterVariant::Y, false) => Pauli::Y,
        };
        pauli.set(k, symbol);
        terms.push((pauli, p));
    }
    PauliChannel::from_terms(n, terms)
}

/// Probability that `n` of `data_qubits` coupled ions flip after a phase
/// flip on an ancilla driven by an MS gate, with the ancilla traced out:
/// `(1/2pi) int_0^{2pi} C(N,n) sin^{2n}(phi) cos^{2N-2n}(phi) du`,
/// `phi(u) = (u - sin u)/4`.
pub fn hook_distribution(data_qubits: usize) -> Vec<f64> {
    let big_n = data_qubits;
    let intervals = 8192.max(64 * big_n);
    (0..=big_n)
        .map(|n| {
            let ln_c = ln_binomial(big_n, n);
            let f = |u: f64| {
                let phi = (u - u.sin()) / 4.0;
                let (s, c) = phi.sin_cos();
                let mut ln = ln_c;
                if n > 0 {
                    ln += 2.0 * n as f64 * s.abs().ln();
                }
                if n < big_n {
                    ln += 2.0 * (big_n - n) as f64 * c.abs().ln();
                }
                ln.exp()
            };
            simpson(f, 0.0, 2.0 * PI, intervals) / (2.0 * PI)
        })
        .collect()
}

/// Hook distribution of the same stabilizer read out with a sequence of
/// two-qubit gates: the fault lands between any two of the `N` gates with
/// equal odds, so every count `0..=N` is equally likely.
pub fn two_qubit_hook_distribution(data_qubits: usize) -> Vec<f64> {
    vec![1.0 / (data_qubits + 1) as f64; data_qubits + 1]
}

/// Largest relative deviation of the multiqubit hook distribution from the
/// two-qubit-gate one.
pub fn hook_deviation_from_two_qubit(data_qubits: usize) -> f64 {
    let mq = hook_distribution(data_qubits);
    let tq = two_qubit_hook_distribution(data_qubits);
    mq.iter().zip(&tq).map(|(a, b)| ((a - b) / b).abs()).fold(0.0, f64::max)
}

/// Large-N asymptotes of the hook distribution: `(0.43 N^{-1/6}, 1/(pi N))`
/// for the edge (no flips) and the centre (`N/2` flips).
pub fn hook_asymptotics(data_qubits: usize) -> (f64, f64) {
    let n = data_qubits as f64;
    (0.43 * n.powf(-1.0 / 6.0), 1.0 / (PI * n))
}
