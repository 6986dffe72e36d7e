//! Quantum-jump unravelling in the ideal-gate frame.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Geometric};
use rayon::prelude::*;
use serde::Serialize;
use std::sync::OnceLock;

use super::ops::{apply_decay, apply_rotated, spin_transform, PhononSpace};
use super::{check_system, Frame, Jump, OracleConfig, OracleError, LEAKAGE_WARNING};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
/// Largest jump probability allowed in one integration step.
const MAX_STEP_JUMP_PROBABILITY: f64 = 1e-3;

/// Flip statistics over many shots. Probabilities are averages of each
/// shot's exact conditional outcome distribution; `counts` holds one
/// sampled outcome per shot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlipHistogram {
    pub qubits: usize,
    pub shots: usize,
    pub seed: u64,
    /// Indexed by flip mask (bit `q` set when qubit `q` flipped).
    pub probabilities: Vec<f64>,
    pub stderr: Vec<f64>,
    pub counts: Vec<u64>,
    /// Indexed by the number of flipped qubits.
    pub weight_probabilities: Vec<f64>,
    pub weight_stderr: Vec<f64>,
    /// Mean population of the top Fock level at the end of the gate.
    pub leakage: f64,
}

impl FlipHistogram {
    /// Pattern label with qubit 0 first, e.g. `"0110"`.
    pub fn pattern_label(&self, mask: usize) -> String {
        (0..self.qubits).map(|q| if mask >> q & 1 == 1 { '1' } else { '0' }).collect()
    }

    pub fn total_probability(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// Mean flip probability of one qubit.
    pub fn marginal(&self, qubit: usize) -> f64 {
        self.probabilities.iter().enumerate().filter(|(m, _)| m >> qubit & 1 == 1).map(|(_, p)| p).sum()
    }
}

struct Shot {
    probs: Vec<f64>,
    sampled: usize,
    leak: f64,
}

/// Outcome of the jump-free evolution from one initial Fock state.
struct NoJumpPath {
    final_norm: f64,
    probs: Vec<f64>,
    leak: f64,
}

struct Context<'a> {
    no_jump: Vec<OnceLock<NoJumpPath>>,
    space: PhononSpace,
    qubits: usize,
    frames: Vec<Frame>,
    times: &'a [f64],
    jumps: Vec<Jump>,
    spin_rate: f64,
    phonon_jumps: bool,
    nbar: &'a [f64],
}

/// Runs `config.shots` independent trajectories. Each starts with all
/// spins in `|0>` and a Fock state drawn from the thermal distribution,
/// evolves under the configured jumps, has the ideal gate undone and is
/// read out in the computational basis.
pub fn evolve_jump(config: &OracleConfig) -> Result<FlipHistogram, OracleError> {
    let traj = &config.trajectory;
    let (n, modes, _) = check_system(traj, &config.jumps, &config.nbar, config.cutoff)?;
    if config.shots == 0 {
        return Err(OracleError::NoShots);
    }
    let jumps: Vec<Jump> = config.jumps.iter().copied().filter(|j| j.rate > 0.0).collect();
    let phonon_dim = (config.cutoff + 1).pow(modes as u32);
    let ctx = Context {
        no_jump: (0..phonon_dim).map(|_| OnceLock::new()).collect(),
        space: PhononSpace::new(config.cutoff, modes),
        qubits: n,
        frames: (0..traj.len()).map(|s| Frame::at(traj, s, 0.0)).collect(),
        times: traj.times(),
        spin_rate: jumps.iter().filter(|j| j.op.is_spin()).map(|j| j.rate).sum(),
        phonon_jumps: jumps.iter().any(|j| !j.op.is_spin()),
        jumps,
        nbar: &config.nbar,
    };
    let shots: Vec<Shot> = (0..config.shots)
        .into_par_iter()
        .map(|shot| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(shot as u64);
            run_shot(&ctx, &mut rng)
        })
        .collect();

    let patterns = 1usize << n;
    let mut sum = vec![0.0; patterns];
    let mut sumsq = vec![0.0; patterns];
    let mut wsum = vec![0.0; n + 1];
    let mut wsumsq = vec![0.0; n + 1];
    let mut counts = vec![0u64; patterns];
    let mut leak = 0.0;
    for shot in &shots {
        let mut by_weight = vec![0.0; n + 1];
        for (m, &p) in shot.probs.iter().enumerate() {
            sum[m] += p;
            sumsq[m] += p * p;
            by_weight[m.count_ones() as usize] += p;
        }
        for (w, &p) in by_weight.iter().enumerate() {
            wsum[w] += p;
            wsumsq[w] += p * p;
        }
        counts[shot.sampled] += 1;
        leak += shot.leak;
    }
    let s = config.shots as f64;
    let finish = |sum: &[f64], sumsq: &[f64]| -> (Vec<f64>, Vec<f64>) {
        sum.iter()
            .zip(sumsq)
            .map(|(&a, &b)| {
                let mean = a / s;
                let var = if config.shots > 1 { ((b / s - mean * mean) * s / (s - 1.0)).max(0.0) } else { 0.0 };
                (mean, (var / s).sqrt())
            })
            .unzip()
    };
    let (probabilities, stderr) = finish(&sum, &sumsq);
    let (weight_probabilities, weight_stderr) = finish(&wsum, &wsumsq);
    let leakage = leak / s;
    if leakage > LEAKAGE_WARNING {
        log::warn!("Fock cutoff {} leaks {leakage:.3e} of the population", config.cutoff);
    }
    Ok(FlipHistogram {
        qubits: n,
        shots: config.shots,
        seed: config.seed,
        probabilities,
        stderr,
        counts,
        weight_probabilities,
        weight_stderr,
        leakage,
    })
}

fn run_shot(ctx: &Context, rng: &mut ChaCha8Rng) -> Shot {
    let space = &ctx.space;
    let configs = 1usize << ctx.qubits;
    let levels: Vec<usize> = ctx
        .nbar
        .iter()
        .map(|&nb| {
            let g = Geometric::new(1.0 / (nb + 1.0)).expect("valid occupation");
            (g.sample(rng) as usize).min(space.cutoff)
        })
        .collect();
    let col = space.index(&levels);
    let initial = || {
        let mut psi = vec![ZERO; configs * space.dim];
        let amp = (configs as f64).sqrt().recip();
        for b in 0..configs {
            psi[b * space.dim + col] = Complex64::new(amp, 0.0);
        }
        psi
    };
    if ctx.phonon_jumps {
        // The squared norm only decreases, so a shot whose threshold sits
        // below the jump-free final norm never jumps and can reuse the
        // cached outcome of that deterministic path.
        let threshold: f64 = rng.random();
        let cached = ctx.no_jump[col].get_or_init(|| {
            let mut psi = initial();
            integrate_with_decay(ctx, None, 0.0, &mut psi);
            let final_norm = norm_sqr(&psi);
            let (probs, leak) = outcome(ctx, psi);
            NoJumpPath { final_norm, probs, leak }
        });
        if threshold < cached.final_norm {
            let (probs, leak) = (cached.probs.clone(), cached.leak);
            return sample_outcome(rng, probs, leak);
        }
        let mut psi = initial();
        integrate_with_decay(ctx, Some(rng), threshold, &mut psi);
        let (probs, leak) = outcome(ctx, psi);
        return sample_outcome(rng, probs, leak);
    }
    let mut psi = initial();
    if ctx.spin_rate > 0.0 {
        poisson_spin_jumps(ctx, rng, &mut psi);
    }
    let (probs, leak) = outcome(ctx, psi);
    sample_outcome(rng, probs, leak)
}

/// Frame at time `t` by interpolation between grid nodes.
fn frame_at(ctx: &Context, t: f64, out: &mut Frame) {
    let last = ctx.times.len() - 1;
    let s = ctx.times.partition_point(|&x| x <= t).saturating_sub(1).min(last.saturating_sub(1));
    let span = ctx.times[s + 1] - ctx.times[s];
    let f = ((t - ctx.times[s]) / span).clamp(0.0, 1.0);
    out.lerp_into(&ctx.frames[s], &ctx.frames[s + 1], f);
}

fn choose_jump<'a>(jumps: impl Iterator<Item = (&'a Jump, f64)>, total: f64, rng: &mut ChaCha8Rng) -> &'a Jump {
    let mut target = rng.random::<f64>() * total;
    let mut last = None;
    for (j, w) in jumps {
        last = Some(j);
        if target < w {
            return j;
        }
        target -= w;
    }
    last.expect("at least one jump")
}

/// Spin-only jump sets leave the no-jump evolution trivial: jumps arrive as
/// a Poisson process at the summed rate.
fn poisson_spin_jumps(ctx: &Context, rng: &mut ChaCha8Rng, psi: &mut Vec<Complex64>) {
    let tau = *ctx.times.last().expect("non-empty grid");
    let wait = Exp::new(ctx.spin_rate).expect("positive rate");
    let mut frame = ctx.frames[0].clone();
    let mut out = psi.clone();
    let mut t = ctx.times[0];
    loop {
        t += wait.sample(rng);
        if t > tau {
            break;
        }
        let jump = choose_jump(ctx.jumps.iter().map(|j| (j, j.rate)), ctx.spin_rate, rng);
        frame_at(ctx, t, &mut frame);
        apply_rotated(&ctx.space, &frame, jump.op, psi, &mut out);
        std::mem::swap(psi, &mut out);
    }
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

struct Scratch {
    full: Vec<Complex64>,
    block: Vec<Complex64>,
    block2: Vec<Complex64>,
}

/// `out = -K psi` with `K = (1/2) sum_c rate_c C_c^dag C_c`.
fn decay_derivative(ctx: &Context, frame: &Frame, psi: &[Complex64], scratch: &mut Scratch, out: &mut [Complex64]) {
    let spin = -0.5 * ctx.spin_rate;
    for (o, &p) in out.iter_mut().zip(psi) {
        *o = p * spin;
    }
    for j in ctx.jumps.iter().filter(|j| !j.op.is_spin()) {
        apply_decay(&ctx.space, frame, j.op, psi, &mut scratch.full, &mut scratch.block, &mut scratch.block2);
        let c = -0.5 * j.rate;
        for (o, &s) in out.iter_mut().zip(scratch.full.iter()) {
            *o += s * c;
        }
    }
}

/// Waiting-time unravelling: the unnormalised state decays under the
/// effective non-Hermitian generator (Heun steps) and a jump fires when
/// its squared norm drops below a uniform threshold. Without an RNG the
/// evolution runs jump-free.
fn integrate_with_decay(ctx: &Context, mut rng: Option<&mut ChaCha8Rng>, first_threshold: f64, psi: &mut Vec<Complex64>) {
    let len = psi.len();
    let mut k1 = vec![ZERO; len];
    let mut k2 = vec![ZERO; len];
    let mut trial = vec![ZERO; len];
    let mut scratch = Scratch { full: vec![ZERO; len], block: vec![ZERO; ctx.space.dim], block2: vec![ZERO; ctx.space.dim] };
    let mut frame = ctx.frames[0].clone();
    let mut next = ctx.frames[0].clone();
    let mut threshold = first_threshold;
    for s in 0..ctx.times.len() - 1 {
        let (t0, t1) = (ctx.times[s], ctx.times[s + 1]);
        let mut t = t0;
        frame_at(ctx, t, &mut frame);
        while t < t1 {
            decay_derivative(ctx, &frame, psi, &mut scratch, &mut k1);
            let norm = norm_sqr(psi);
            let rate = -2.0 * psi.iter().zip(&k1).map(|(p, k)| (p.conj() * k).re).sum::<f64>() / norm;
            let mut h = t1 - t;
            if rate * h > MAX_STEP_JUMP_PROBABILITY {
                h = MAX_STEP_JUMP_PROBABILITY / rate;
            }
            let t_next = if t1 - (t + h) < 1e-12 * (t1 - t0) { t1 } else { t + h };
            let h = t_next - t;
            frame_at(ctx, t_next, &mut next);
            for ((tr, &p), &k) in trial.iter_mut().zip(psi.iter()).zip(&k1) {
                *tr = p + k * h;
            }
            decay_derivative(ctx, &next, &trial, &mut scratch, &mut k2);
            for ((p, &a), &b) in psi.iter_mut().zip(&k1).zip(&k2) {
                *p += (a + b) * (0.5 * h);
            }
            t = t_next;
            std::mem::swap(&mut frame, &mut next);
            if let Some(rng) = rng.as_deref_mut() {
                if norm_sqr(psi) <= threshold {
                    jump_now(ctx, rng, &frame, psi, &mut trial);
                    threshold = rng.random();
                }
            }
        }
    }
}

fn jump_now(ctx: &Context, rng: &mut ChaCha8Rng, frame: &Frame, psi: &mut [Complex64], out: &mut [Complex64]) {
    let mut candidates: Vec<(&Jump, f64, Vec<Complex64>)> = Vec::with_capacity(ctx.jumps.len());
    for j in &ctx.jumps {
        apply_rotated(&ctx.space, frame, j.op, psi, out);
        candidates.push((j, j.rate * norm_sqr(out), out.to_vec()));
    }
    let total: f64 = candidates.iter().map(|c| c.1).sum();
    if total <= 0.0 {
        return;
    }
    let chosen = choose_jump(candidates.iter().map(|c| (c.0, c.1)), total, rng);
    let (_, _, state) = candidates.into_iter().find(|c| std::ptr::eq(c.0, chosen)).expect("chosen jump");
    let scale = norm_sqr(&state).sqrt().recip();
    for (p, s) in psi.iter_mut().zip(state) {
        *p = s * scale;
    }
}

/// Readout distribution over flip patterns and the top-level population.
fn outcome(ctx: &Context, mut psi: Vec<Complex64>) -> (Vec<f64>, f64) {
    let space = &ctx.space;
    let norm = norm_sqr(&psi);
    let leak = psi
        .chunks(space.dim)
        .flat_map(|block| block.iter().enumerate())
        .filter(|(idx, _)| (0..space.modes).any(|j| space.level(*idx, j) == space.cutoff))
        .map(|(_, c)| c.norm_sqr())
        .sum::<f64>()
        / norm;
    spin_transform(&mut psi, space.dim);
    let scale = 1.0 / ((1usize << ctx.qubits) as f64 * norm);
    (psi.chunks(space.dim).map(|block| norm_sqr(block) * scale).collect(), leak)
}

fn sample_outcome(rng: &mut ChaCha8Rng, probs: Vec<f64>, leak: f64) -> Shot {
    let mut target = rng.random::<f64>() * probs.iter().sum::<f64>();
    let mut sampled = probs.len() - 1;
    for (m, &p) in probs.iter().enumerate() {
        if target < p {
            sampled = m;
            break;
        }
        target -= p;
    }
    Shot { probs, sampled, leak }
}
