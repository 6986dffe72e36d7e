//! Rotated jump operators acting on spin (x basis) by phonon vectors.

use num_complex::Complex64;

use super::fock::displacement_matrix;
use super::{spin_value, Frame, JumpOp};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Truncated multi-mode Fock space with mode `j` at stride `(cutoff+1)^j`.
#[derive(Debug, Clone)]
pub(crate) struct PhononSpace {
    pub cutoff: usize,
    pub modes: usize,
    pub dim: usize,
    strides: Vec<usize>,
    /// `levels[mode][idx]`
    levels: Vec<Vec<usize>>,
    sqrt: Vec<f64>,
}

impl PhononSpace {
    pub fn new(cutoff: usize, modes: usize) -> Self {
        let dim = (cutoff + 1).pow(modes as u32);
        let strides: Vec<usize> = (0..modes).map(|j| (cutoff + 1).pow(j as u32)).collect();
        let levels = strides.iter().map(|&s| (0..dim).map(|i| i / s % (cutoff + 1)).collect()).collect();
        let sqrt = (0..=cutoff + 1).map(|n| (n as f64).sqrt()).collect();
        Self { cutoff, modes, dim, strides, levels, sqrt }
    }

    pub fn stride(&self, mode: usize) -> usize {
        self.strides[mode]
    }

    pub fn level(&self, idx: usize, mode: usize) -> usize {
        self.levels[mode][idx]
    }

    pub fn index(&self, levels: &[usize]) -> usize {
        levels.iter().enumerate().map(|(j, &n)| n * self.stride(j)).sum()
    }

    /// `out = (a_j + beta) v`
    pub fn lower_shifted(&self, v: &[Complex64], mode: usize, beta: Complex64, out: &mut [Complex64]) {
        let s = self.stride(mode);
        let levels = &self.levels[mode];
        for (idx, o) in out.iter_mut().enumerate() {
            let n = levels[idx];
            let mut acc = beta * v[idx];
            if n < self.cutoff {
                acc += v[idx + s] * self.sqrt[n + 1];
            }
            *o = acc;
        }
    }

    /// `out = (a_j^dag + conj(beta)) v`, dropping amplitude pushed past the cutoff.
    pub fn raise_shifted(&self, v: &[Complex64], mode: usize, beta: Complex64, out: &mut [Complex64]) {
        let s = self.stride(mode);
        let bc = beta.conj();
        let levels = &self.levels[mode];
        for (idx, o) in out.iter_mut().enumerate() {
            let n = levels[idx];
            let mut acc = bc * v[idx];
            if n > 0 {
                acc += v[idx - s] * self.sqrt[n];
            }
            *o = acc;
        }
    }

    /// Applies a single-mode matrix (row-major, `(cutoff+1)^2`) along `mode`.
    pub fn apply_mode_matrix(&self, v: &[Complex64], mode: usize, mat: &[Complex64], out: &mut [Complex64]) {
        let s = self.stride(mode);
        let d = self.cutoff + 1;
        for (idx, o) in out.iter_mut().enumerate() {
            let n = self.level(idx, mode);
            let base = idx - n * s;
            let row = &mat[n * d..(n + 1) * d];
            *o = row.iter().enumerate().map(|(m, &r)| r * v[base + m * s]).sum();
        }
    }

    /// `out = D(delta) v` with `delta` per mode.
    pub fn displace(&self, v: &[Complex64], delta: &[Complex64], out: &mut [Complex64]) {
        let mut cur = v.to_vec();
        for (j, &d) in delta.iter().enumerate() {
            let mat = displacement_matrix(d, self.cutoff);
            self.apply_mode_matrix(&cur, j, &mat, out);
            cur.copy_from_slice(out);
        }
        out.copy_from_slice(&cur);
    }
}

/// Spin configuration flipped by the operator (x-basis bit mask).
pub(crate) fn flip_mask(op: JumpOp) -> usize {
    match op {
        JumpOp::SigmaY(k) | JumpOp::SigmaZ(k) => 1 << k,
        _ => 0,
    }
}

/// Coefficient and phonon displacement of a rotated `sigma_z` or `sigma_y`
/// on the block mapping configuration `src` to `dst = src ^ (1 << k)`:
/// `e^{-i theta_dst} D(beta_dst)^dag D(beta_src) e^{i theta_src}`
/// `= coeff * D(beta_src - beta_dst)`.
pub(crate) fn spin_flip_block(frame: &Frame, op: JumpOp, dst: usize) -> (Complex64, Vec<Complex64>) {
    let (k, y) = match op {
        JumpOp::SigmaZ(k) => (k, false),
        JumpOp::SigmaY(k) => (k, true),
        _ => unreachable!("not a spin-flip jump"),
    };
    let src = dst ^ (1 << k);
    let bd = &frame.beta[dst];
    let bs = &frame.beta[src];
    let bch: f64 = bd.iter().zip(bs).map(|(d, s)| (d.conj() * s).im).sum();
    let mut coeff = Complex64::from_polar(1.0, frame.theta[src] - frame.theta[dst] + bch);
    if y {
        coeff *= Complex64::new(0.0, spin_value(dst, k));
    }
    let delta = bs.iter().zip(bd).map(|(s, d)| s - d).collect();
    (coeff, delta)
}

/// Applies the rotated jump operator to a full state laid out as
/// `state[b * dim + phonon]`.
pub(crate) fn apply_rotated(
    space: &PhononSpace,
    frame: &Frame,
    op: JumpOp,
    state: &[Complex64],
    out: &mut [Complex64],
) {
    let dim = space.dim;
    let configs = state.len() / dim;
    let mut tmp = vec![ZERO; dim];
    for b in 0..configs {
        let dst = &mut out[b * dim..(b + 1) * dim];
        match op {
            JumpOp::SigmaX(k) => {
                let x = spin_value(b, k);
                for (o, &s) in dst.iter_mut().zip(&state[b * dim..(b + 1) * dim]) {
                    *o = s * x;
                }
            }
            JumpOp::SigmaY(k) | JumpOp::SigmaZ(k) => {
                let src = b ^ (1 << k);
                let (coeff, delta) = spin_flip_block(frame, op, b);
                space.displace(&state[src * dim..(src + 1) * dim], &delta, dst);
                for o in dst.iter_mut() {
                    *o *= coeff;
                }
            }
            JumpOp::Lower(j) => space.lower_shifted(&state[b * dim..(b + 1) * dim], j, frame.beta[b][j], dst),
            JumpOp::Raise(j) => space.raise_shifted(&state[b * dim..(b + 1) * dim], j, frame.beta[b][j], dst),
            JumpOp::Number(j) => {
                space.lower_shifted(&state[b * dim..(b + 1) * dim], j, frame.beta[b][j], &mut tmp);
                space.raise_shifted(&tmp, j, frame.beta[b][j], dst);
            }
        }
    }
}

/// Applies `C^dag C` of a phonon jump blockwise (spin jumps give the identity).
pub(crate) fn apply_decay(
    space: &PhononSpace,
    frame: &Frame,
    op: JumpOp,
    state: &[Complex64],
    out: &mut [Complex64],
    tmp: &mut [Complex64],
    tmp2: &mut [Complex64],
) {
    let dim = space.dim;
    let tmp = &mut tmp[..dim];
    let tmp2 = &mut tmp2[..dim];
    for b in 0..state.len() / dim {
        let src = &state[b * dim..(b + 1) * dim];
        let dst = &mut out[b * dim..(b + 1) * dim];
        match op {
            JumpOp::SigmaX(_) | JumpOp::SigmaY(_) | JumpOp::SigmaZ(_) => dst.copy_from_slice(src),
            JumpOp::Lower(j) => {
                space.lower_shifted(src, j, frame.beta[b][j], tmp);
                space.raise_shifted(tmp, j, frame.beta[b][j], dst);
            }
            JumpOp::Raise(j) => {
                space.raise_shifted(src, j, frame.beta[b][j], tmp);
                space.lower_shifted(tmp, j, frame.beta[b][j], dst);
            }
            JumpOp::Number(j) => {
                let beta = frame.beta[b][j];
                space.lower_shifted(src, j, beta, tmp);
                space.raise_shifted(tmp, j, beta, tmp2);
                space.lower_shifted(tmp2, j, beta, tmp);
                space.raise_shifted(tmp, j, beta, dst);
            }
        }
    }
}

/// Walsh-Hadamard transform over the spin index of a blocked state.
pub(crate) fn spin_transform(state: &mut [Complex64], dim: usize) {
    let configs = state.len() / dim;
    let mut h = 1;
    while h < configs {
        for block in (0..configs).step_by(2 * h) {
            for b in block..block + h {
                for p in 0..dim {
                    let u = state[b * dim + p];
                    let w = state[(b + h) * dim + p];
                    state[b * dim + p] = u + w;
                    state[(b + h) * dim + p] = u - w;
                }
            }
        }
        h *= 2;
    }
}
