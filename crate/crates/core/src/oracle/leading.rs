//! Single-jump (leading-order) channel by direct operator algebra.

use num_complex::Complex64;

use super::fock::thermal_populations;
use super::ops::{apply_rotated, flip_mask, spin_transform, PhononSpace};
use super::{check_system, Frame, Jump, OracleError};
use crate::gatekit::TrajectoryTable;
use crate::noisechan::{Pauli, PauliChannel, PauliString};
use crate::numeric::trapezoid_weights;

/// Thermal product-state weights at or above this are traced over.
const COLUMN_FLOOR: f64 = 1e-16;

/// Pauli channel from integrating, over the gate, the probability that one
/// jump at time `t` leaves the spins with Pauli error `P` after the ideal
/// gate is undone. Phonons start thermal with occupations `nbar` and are
/// traced out; the result carries only first-order terms in the rates.
pub fn leading_order_channel(
    traj: &TrajectoryTable,
    jumps: &[Jump],
    nbar: &[f64],
    cutoff: usize,
) -> Result<PauliChannel, OracleError> {
    let (n, modes, _) = check_system(traj, jumps, nbar, cutoff)?;
    let space = PhononSpace::new(cutoff, modes);
    let configs = 1usize << n;
    let columns = thermal_columns(&space, nbar);
    let weights = trapezoid_weights(traj.len(), traj.dt());
    let norm = 1.0 / (configs * configs) as f64;

    // chi[z][d]: z is the x-basis flip mask, d the sign (diagonal) mask.
    let mut chi = vec![vec![0.0; configs]; configs];
    let mut input = vec![Complex64::new(0.0, 0.0); configs * space.dim];
    let mut out = input.clone();
    for (s, &w) in weights.iter().enumerate() {
        let active: Vec<&Jump> = jumps.iter().filter(|j| j.rate > 0.0).collect();
        if active.is_empty() {
            break;
        }
        let frame = Frame::at(traj, s, 0.0);
        for jump in active {
            let z = flip_mask(jump.op);
            for &(col, pw) in &columns {
                input.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
                for b in 0..configs {
                    input[b * space.dim + col] = Complex64::new(1.0, 0.0);
                }
                apply_rotated(&space, &frame, jump.op, &input, &mut out);
                spin_transform(&mut out, space.dim);
                let scale = w * jump.rate * pw * norm;
                for (d, slot) in chi[z].iter_mut().enumerate() {
                    let block = &out[d * space.dim..(d + 1) * space.dim];
                    *slot += scale * block.iter().map(|c| c.norm_sqr()).sum::<f64>();
                }
            }
        }
    }

    let mut terms = Vec::new();
    for (z, row) in chi.iter().enumerate() {
        for (d, &p) in row.iter().enumerate() {
            if (z, d) == (0, 0) || p <= 0.0 {
                continue;
            }
            let paulis = (0..n).map(|q| Pauli::from_bits(d >> q & 1 == 1, z >> q & 1 == 1)).collect();
            terms.push((PauliString::from_paulis(paulis), p));
        }
    }
    Ok(PauliChannel::from_terms(n, terms)?)
}

/// Phonon basis states with their thermal weights.
fn thermal_columns(space: &PhononSpace, nbar: &[f64]) -> Vec<(usize, f64)> {
    let pops: Vec<Vec<f64>> = nbar.iter().map(|&nb| thermal_populations(nb, space.cutoff)).collect();
    (0..space.dim)
        .filter_map(|idx| {
            let w: f64 = (0..space.modes).map(|j| pops[j][space.level(idx, j)]).product();
            (w >= COLUMN_FLOOR).then_some((idx, w))
        })
        .collect()
}
