//! Heating and motional dephasing channels.

use std::f64::consts::FRAC_PI_4;

use ndarray::Array2;

use super::hadamard::{conjugate_in_place, MAX_HADAMARD_QUBITS};
use super::NoiseError;
use crate::gatekit::TrajectoryTable;
use crate::numeric::{median, trapezoid_weights, DoubleDouble};

/// Largest qubit count handled by the dense density-matrix route; beyond
/// it, [`heating_eta`] switches to a diagonal-only transform.
const DENSE_ETA_LIMIT: usize = 10;

/// Gram-type matrix of trajectory overlaps weighted by heating rates.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatingMatrix(pub Array2<f64>);

impl HeatingMatrix {
    pub fn ion_count(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.0
    }
}

fn check_modes(traj: &TrajectoryTable, values: &[f64], key: &'static str) -> Result<(), NoiseError> {
    if values.len() != traj.mode_count() {
        return Err(NoiseError::RateShape { key, expected: traj.mode_count(), got: values.len() });
    }
    Ok(())
}

/// `Re int alpha_j^n conj(alpha_j^m) dt` for every mode and ion pair,
/// indexed `[mode][n][m]`.
fn overlap_integrals(traj: &TrajectoryTable) -> Vec<Array2<f64>> {
    let alpha = traj.alpha();
    let w = trapezoid_weights(traj.len(), traj.dt());
    let n = traj.ion_count();
    (0..traj.mode_count())
        .map(|j| {
            let mut out = Array2::zeros((n, n));
            for (s, ws) in w.iter().enumerate() {
                for a in 0..n {
                    let za = alpha[[s, j, a]];
                    for b in 0..=a {
                        out[[a, b]] += ws * (za * alpha[[s, j, b]].conj()).re;
                    }
                }
            }
            for a in 0..n {
                for b in 0..a {
                    out[[b, a]] = out[[a, b]];
                }
            }
            out
        })
        .collect()
}

/// `A_nm = sum_j Gamma_h,j (2 nbar_th,j + 1)/2 Re int alpha_j^n conj(alpha_j^m)`.
pub fn heating_matrix(traj: &TrajectoryTable, gamma_h: &[f64], nbar_th: &[f64]) -> Result<HeatingMatrix, NoiseError> {
    check_modes(traj, gamma_h, "gamma_h_hz")?;
    check_modes(traj, nbar_th, "nbar_th")?;
    let n = traj.ion_count();
    let mut a = Array2::zeros((n, n));
    for (j, overlap) in overlap_integrals(traj).iter().enumerate() {
        let c = gamma_h[j] * (2.0 * nbar_th[j] + 1.0) / 2.0;
        a.scaled_add(c, overlap);
    }
    Ok(HeatingMatrix(a))
}

/// Diagonal of the heating process matrix: probability of every bit-flip
/// pattern (bit `n` of the index is ion `n`).
///
/// The reduced spin state in the gate basis is
/// `rho_{x,x'} = 2^-N exp(-sum A_nm d_n d_m)` with `d = x - x'`; the
/// pattern probabilities are the diagonal of its Hadamard conjugate.
/// High-weight patterns sit many orders of magnitude below one, so the
/// transform runs in double-double arithmetic.
pub fn heating_eta(a: &HeatingMatrix, n: usize) -> Result<Vec<f64>, NoiseError> {
    if a.ion_count() != n {
        return Err(NoiseError::RateShape { key: "heating matrix", expected: n, got: a.ion_count() });
    }
    if n > MAX_HADAMARD_QUBITS {
        return Err(NoiseError::TooManyQubits { n, limit: MAX_HADAMARD_QUBITS });
    }
    let raw = if n <= DENSE_ETA_LIMIT { eta_dense(a.matrix(), n) } else { eta_diagonal(a.matrix(), n) };
    let mut eta: Vec<f64> = raw.into_iter().map(|v| if v < 0.0 && v > -1e-12 { 0.0 } else { v.max(0.0) }).collect();
    let total: f64 = eta.iter().sum();
    if total > 0.0 {
        eta.iter_mut().for_each(|v| *v /= total);
    }
    Ok(eta)
}

/// `exp(-d^T A d)` for every `d in {-2, 0, 2}^N`, indexed in base 3 with
/// digit 0 -> 0, 1 -> +2, 2 -> -2.
fn displacement_weights(a: &Array2<f64>, n: usize) -> Vec<DoubleDouble> {
    let total = 3usize.pow(n as u32);
    let mut d = vec![0.0f64; n];
    (0..total)
        .map(|mut idx| {
            for slot in d.iter_mut() {
                *slot = match idx % 3 {
                    0 => 0.0,
                    1 => 2.0,
                    _ => -2.0,
                };
                idx /= 3;
            }
            let mut q = DoubleDouble::ZERO;
            for i in 0..n {
                if d[i] == 0.0 {
                    continue;
                }
                for j in 0..n {
                    if d[j] != 0.0 {
                        q += DoubleDouble::new(a[[i, j]] * d[i] * d[j]);
                    }
                }
            }
            DoubleDouble::exp_neg(q)
        })
        .collect()
}

fn eta_dense(a: &Array2<f64>, n: usize) -> Vec<f64> {
    let dim = 1usize << n;
    let weights = displacement_weights(a, n);
    let pow3: Vec<usize> = (0..n).map(|i| 3usize.pow(i as u32)).collect();
    let mut rho = vec![DoubleDouble::ZERO; dim * dim];
    for b in 0..dim {
        for bp in 0..dim {
            // x = 1 - 2b, so d_n = x_n - x'_n is +2 when b_n = 0, b'_n = 1.
            let mut idx = 0;
            for (i, p) in pow3.iter().enumerate() {
                let (u, v) = (b >> i & 1, bp >> i & 1);
                if u != v {
                    idx += p * if u == 0 { 1 } else { 2 };
                }
            }
            rho[b * dim + bp] = weights[idx];
        }
    }
    conjugate_in_place(&mut rho, dim);
    let scale = 1.0 / (dim as f64 * dim as f64);
    (0..dim).map(|z| rho[z * dim + z].scale_pow2(scale).to_f64()).collect()
}

/// Same diagonal without the dense matrix: group the double sum by the
/// difference mask `c = b xor b'`, then transform over `c`.
fn eta_diagonal(a: &Array2<f64>, n: usize) -> Vec<f64> {
    let dim = 1usize << n;
    let mut g = vec![DoubleDouble::ZERO; dim];
    for (c, slot) in g.iter_mut().enumerate() {
        let ions: Vec<usize> = (0..n).filter(|i| c >> i & 1 == 1).collect();
        let w = ions.len();
        let mut acc = DoubleDouble::ZERO;
        // Sign vectors s and -s give the same quadratic form; fix the
        // first sign and double.
        let free = w.saturating_sub(1);
        for signs in 0..(1usize << free) {
            let s: Vec<f64> = (0..w)
                .map(|i| if i == 0 { 1.0 } else if signs >> (i - 1) & 1 == 1 { -1.0 } else { 1.0 })
                .collect();
            let mut q = DoubleDouble::ZERO;
            for (i, &ii) in ions.iter().enumerate() {
                for (j, &jj) in ions.iter().enumerate() {
                    q += DoubleDouble::new(4.0 * a[[ii, jj]] * s[i] * s[j]);
                }
            }
            acc += DoubleDouble::exp_neg(q);
        }
        let multiplicity = if w == 0 { 1.0 } else { 2.0 };
        *slot = acc.mul_f64(multiplicity * (1u64 << (n - w)) as f64);
    }
    crate::numeric::fwht(&mut g);
    let scale = 1.0 / (dim as f64 * dim as f64);
    g.into_iter().map(|v| v.scale_pow2(scale).to_f64()).collect()
}

/// Leading-order heating flip probability per ion,
/// `sum_j Gamma_h,j (2 nbar_th,j + 1) int |alpha_j^n|^2`.
pub fn heating_1q_probs(traj: &TrajectoryTable, gamma_h: &[f64], nbar_th: &[f64]) -> Result<Vec<f64>, NoiseError> {
    let a = heating_matrix(traj, gamma_h, nbar_th)?;
    Ok((0..traj.ion_count()).map(|n| 2.0 * a.0[[n, n]]).collect())
}

/// Motional-dephasing flip probabilities.
///
/// Single flips: `sum_j Gamma_d,j (2 nbar_j + 1) int |alpha_j^n|^2`.
/// Pair flips: `4 sum_j Gamma_d,j int (Re alpha_j^n conj(alpha_j^m))^2`,
/// the square of the cross term in `|sum_n alpha_j^n x_n|^2`.
pub fn dephasing_probs(
    traj: &TrajectoryTable,
    gamma_d: &[f64],
    nbar: &[f64],
) -> Result<(Vec<f64>, Array2<f64>), NoiseError> {
    check_modes(traj, gamma_d, "gamma_d_hz")?;
    check_modes(traj, nbar, "nbar")?;
    let n = traj.ion_count();
    let alpha = traj.alpha();
    let w = trapezoid_weights(traj.len(), traj.dt());
    let mut p1 = vec![0.0; n];
    let mut p2 = Array2::zeros((n, n));
    for j in 0..traj.mode_count() {
        let g = gamma_d[j];
        if g == 0.0 {
            continue;
        }
        let thermal = 2.0 * nbar[j] + 1.0;
        for (s, ws) in w.iter().enumerate() {
            for a in 0..n {
                let za = alpha[[s, j, a]];
                p1[a] += g * thermal * ws * za.norm_sqr();
                for b in 0..a {
                    let re = (za * alpha[[s, j, b]].conj()).re;
                    p2[[a, b]] += 4.0 * g * ws * re * re;
                }
            }
        }
    }
    for a in 0..n {
        for b in 0..a {
            p2[[b, a]] = p2[[a, b]];
        }
    }
    Ok((p1, p2))
}

/// Medians of the pair-flip matrix over coupled and uncoupled pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSummary {
    pub coupled_median: Option<f64>,
    pub uncoupled_median: Option<f64>,
    pub coupled_pairs: usize,
    pub uncoupled_pairs: usize,
}

impl SplitSummary {
    /// Coupled over uncoupled median, when both classes are populated.
    pub fn ratio(&self) -> Option<f64> {
        match (self.coupled_median, self.uncoupled_median) {
            (Some(c), Some(u)) if u > 0.0 => Some(c / u),
            _ => None,
        }
    }

    pub fn has_empty_class(&self) -> bool {
        self.coupled_pairs == 0 || self.uncoupled_pairs == 0
    }
}

/// Split pair-flip probabilities by whether the gate entangles the pair.
/// Pairs with target phase near pi/4 (mod pi/2) count as coupled, those
/// near zero as uncoupled; anything else is ignored.
pub fn coupled_uncoupled_split(p2q: &Array2<f64>, targets: &Array2<f64>) -> Result<SplitSummary, NoiseError> {
    let n = p2q.nrows();
    if p2q.dim() != (n, n) || targets.dim() != (n, n) {
        return Err(NoiseError::RateShape { key: "targets", expected: n, got: targets.nrows() });
    }
    const TOL: f64 = 1e-3;
    let mut coupled = Vec::new();
    let mut uncoupled = Vec::new();
    for a in 0..n {
        for b in 0..a {
            let phase = targets[[a, b]].rem_euclid(2.0 * FRAC_PI_4);
            let dist_zero = phase.min(2.0 * FRAC_PI_4 - phase);
            if (phase - FRAC_PI_4).abs() < TOL {
                coupled.push(p2q[[a, b]]);
            } else if dist_zero < TOL {
                uncoupled.push(p2q[[a, b]]);
            }
        }
    }
    let summary = SplitSummary {
        coupled_median: median(&coupled),
        uncoupled_median: median(&uncoupled),
        coupled_pairs: coupled.len(),
        uncoupled_pairs: uncoupled.len(),
    };
    if summary.has_empty_class() {
        log::warn!(
            "pair split has an empty class ({} coupled, {} uncoupled)",
            summary.coupled_pairs,
            summary.uncoupled_pairs
        );
    }
    Ok(summary)
}
